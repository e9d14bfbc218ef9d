#include "ttbys/llm_gateway.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "http_util.hpp"
#include "ttbys/embedding.hpp"
#include "ttbys/error.hpp"

namespace ttbys {

namespace {

// One-exchange example shown to the summarizer.
constexpr std::string_view kSummaryExample =
    "Example:\n"
    "persuader: Our gym is running a student discount this month, and the morning classes are "
    "short enough to fit before lectures.\n"
    "persuadee: It sounds reasonable, but I am worried I won't keep going after the first week.\n"
    "Summary: x promotes the gym by stressing affordability and convenience. y shows some interest "
    "but doubts their own persistence.";

constexpr std::string_view kDesireLabels = "ABC";
constexpr std::string_view kStrategyLabels = "VLETPARIG";

std::string desire_text(DesireLevel d) { return std::to_string(d.value()); }

std::string strategy_line(Strategy s) {
  return std::string(name_of(s)) + " (" + letter_of(s) + "): " + std::string(definition_of(s));
}

std::string strategy_definitions() {
  std::string out;
  for (Strategy s : all_strategies()) {
    out += "\n";
    out += strategy_line(s);
  }
  return out;
}

MockReply reply_from_json(const json& j) {
  MockReply r;
  r.text = j.value("text", std::string());
  r.fail = j.value("fail", false);
  if (j.contains("logprobs")) {
    std::vector<TokenLogprob> lp;
    const auto& obj = j.at("logprobs");
    if (obj.is_object()) {
      for (const auto& [token, value] : obj.items()) lp.push_back({token, value.get<double>()});
    } else {
      for (const auto& e : obj) lp.push_back({e.at("token").get<std::string>(), e.at("logprob").get<double>()});
    }
    r.logprobs = std::move(lp);
  }
  return r;
}

std::vector<TokenLogprob> uniform_logprobs(std::string_view labels) {
  std::vector<TokenLogprob> out;
  const double lp = -std::log(static_cast<double>(labels.size()));
  for (char c : labels) out.push_back({std::string(1, c), lp});
  return out;
}

bool meta_matches(const std::map<std::string, std::string>& want,
                  const std::map<std::string, std::string>& have) {
  return std::all_of(want.begin(), want.end(), [&](const auto& kv) {
    const auto it = have.find(kv.first);
    return it != have.end() && it->second == kv.second;
  });
}

std::string normalized(std::string_view text) {
  std::string out;
  for (const auto& tok : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::string extract_json_object(const std::string& text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return {};
  return text.substr(open, close - open + 1);
}

}  // namespace

// ---------------------------------------------------------------------------

void BackendConfig::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
  }
  if (top_logprobs < 1 || top_logprobs > 20) fail(ErrorCode::InvalidArgument, "top_logprobs must be in [1, 20]");
  if (max_in_flight < 1 || max_in_flight > 64) fail(ErrorCode::InvalidArgument, "max_in_flight must be in [1, 64]");
  if (timeout.count() <= 0) fail(ErrorCode::InvalidArgument, "timeout must be positive");
  if (kind == Kind::Http) {
    if (endpoint.empty()) fail(ErrorCode::InvalidArgument, "http backend needs an endpoint");
    if (model.empty()) fail(ErrorCode::InvalidArgument, "http backend needs a model id");
  }
}

json BackendConfig::to_json() const {
  json j = {{"kind", kind == Kind::Mock ? "mock" : "http"},
            {"temperature", temperature},
            {"top_logprobs", top_logprobs},
            {"timeout_ms", timeout.count()},
            {"max_in_flight", max_in_flight}};
  if (kind == Kind::Http) {
    j["endpoint"] = endpoint;
    j["model"] = model;
  } else if (!mock_script.empty()) {
    j["mock_script"] = mock_script.string();
  }
  return j;
}

// ---------------------------------------------------------------------------
// MockBackend

MockBackend::MockBackend() {
  set_fallback(PromptKind::Summary, {std::string(kFallbackSummary), std::nullopt, false});
  set_fallback(PromptKind::Desire, {"B", uniform_logprobs(kDesireLabels), false});
  set_fallback(PromptKind::Belief, {std::string(kFallbackBelief), std::nullopt, false});
  set_fallback(PromptKind::Strategy, {"V", uniform_logprobs(kStrategyLabels), false});
  set_fallback(PromptKind::PreannotateDesire, {R"({"desire": 0})", std::nullopt, false});
  set_fallback(PromptKind::PreannotateBelief, {R"({"belief": []})", std::nullopt, false});
}

std::uint64_t MockBackend::slot(PromptKind kind, std::uint64_t hash) {
  return fnv1a64(std::to_string(hash), fnv1a64(name_of(kind)));
}

void MockBackend::script_prompt(PromptKind kind, const std::string& rendered_prompt, MockReply reply) {
  by_prompt_[slot(kind, fnv1a64(rendered_prompt))] = std::move(reply);
}

void MockBackend::script_history(PromptKind kind, const DialogueHistory& history, MockReply reply,
                                 std::map<std::string, std::string> meta) {
  by_history_[slot(kind, history_key(history))].push_back({std::move(meta), std::move(reply)});
}

void MockBackend::script_contains(PromptKind kind, std::string needle, MockReply reply) {
  contains_.push_back({kind, std::move(needle), std::move(reply)});
}

void MockBackend::set_fallback(PromptKind kind, MockReply reply) { fallbacks_[kind] = std::move(reply); }

void MockBackend::load_script(const json& script) {
  try {
    if (script.contains("entries")) {
      for (const auto& e : script.at("entries")) {
        const PromptKind kind = prompt_kind_from_string(e.at("template").get<std::string>());
        MockReply reply = reply_from_json(e);
        if (e.contains("prompt")) {
          script_prompt(kind, e.at("prompt").get<std::string>(), std::move(reply));
        } else if (e.contains("history")) {
          std::map<std::string, std::string> meta;
          if (e.contains("meta")) meta = e.at("meta").get<std::map<std::string, std::string>>();
          script_history(kind, decode_history(e.at("history")), std::move(reply), std::move(meta));
        } else if (e.contains("contains")) {
          script_contains(kind, e.at("contains").get<std::string>(), std::move(reply));
        } else {
          fail(ErrorCode::Parse, "mock script entry needs one of prompt, history or contains");
        }
      }
    }
    if (script.contains("fallbacks")) {
      for (const auto& [name, value] : script.at("fallbacks").items()) {
        set_fallback(prompt_kind_from_string(name), reply_from_json(value));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad mock script: ") + e.what());
  }
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open mock script " + path.string());
  json script;
  try {
    script = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "mock script " + path.string() + ": " + e.what());
  }
  MockBackend backend;
  backend.load_script(script);
  return backend;
}

LlmResponse MockBackend::complete(const LlmRequest& request) const {
  const MockReply* reply = nullptr;

  if (const auto it = by_prompt_.find(slot(request.kind, fnv1a64(request.prompt))); it != by_prompt_.end()) {
    reply = &it->second;
  }
  if (!reply && request.history_key != 0) {
    if (const auto it = by_history_.find(slot(request.kind, request.history_key)); it != by_history_.end()) {
      // The rule constraining the most meta keys wins; earlier rules win ties.
      std::size_t best = 0;
      for (const auto& rule : it->second) {
        if (!meta_matches(rule.meta, request.meta)) continue;
        if (!reply || rule.meta.size() > best) {
          reply = &rule.reply;
          best = rule.meta.size();
        }
      }
    }
  }
  if (!reply) {
    for (const auto& rule : contains_) {
      if (rule.kind == request.kind && request.prompt.find(rule.needle) != std::string::npos) {
        reply = &rule.reply;
        break;
      }
    }
  }

  LlmResponse out;
  if (!reply) {
    if (request.kind == PromptKind::AgentResponse) {
      const auto it = request.meta.find("strategy_letter");
      const std::string letter = it == request.meta.end() ? "?" : it->second;
      out.text = "[" + letter + "] " + std::string(kFallbackReplySentence);
      return out;
    }
    if (request.kind == PromptKind::BeliefJudge) {
      // Rule judge over the structured beliefs carried in meta.
      try {
        const auto gt = decode_belief(json::parse(request.meta.at("gt_belief")));
        const auto pred = decode_belief(json::parse(request.meta.at("pred_belief")));
        const double s = RuleJudge{}.score(gt, pred);
        out.text = s == 1.0 ? "1" : (s == 0.5 ? "0.5" : "0");
      } catch (const std::out_of_range&) {
        out.text = "0";
      }
      return out;
    }
    const auto it = fallbacks_.find(request.kind);
    if (it == fallbacks_.end()) {
      fail(ErrorCode::BackendFailure, "mock has no reply for template '" + std::string(name_of(request.kind)) + "'");
    }
    reply = &it->second;
  }

  if (reply->fail) {
    fail(ErrorCode::BackendFailure, "scripted failure for template '" + std::string(name_of(request.kind)) + "'");
  }
  out.text = reply->text;
  if (request.want_logprobs) {
    if (reply->logprobs) {
      out.first_token_top = *reply->logprobs;
    } else {
      const std::string t = trim(reply->text);
      if (!t.empty()) out.first_token_top.push_back({t.substr(0, 1), 0.0});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  config_.validate();
}

std::string HttpBackend::describe() const { return "http:" + config_.model + "@" + config_.endpoint; }

LlmResponse HttpBackend::complete(const LlmRequest& request) const {
  const auto url = detail::split_url(config_.endpoint);
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"temperature", config_.temperature},
               {"max_tokens", request.max_tokens}};
  if (request.want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = config_.top_logprobs;
  }

  httplib::Result res;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<64>& sem;
      ~Release() { sem.release(); }
    } release{in_flight_};
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    res = client.Post(url.path, headers, body.dump(), "application/json");
  }
  if (!res) {
    fail(ErrorCode::BackendFailure,
         "chat request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::BackendFailure, "chat backend returned HTTP " + std::to_string(res->status));
  }

  LlmResponse out;
  try {
    const json reply = json::parse(res->body);
    const auto& choice = reply.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_null() ? std::string() : content.get<std::string>();
    if (request.want_logprobs && choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      const auto& tokens = choice["logprobs"].at("content");
      if (!tokens.empty()) {
        for (const auto& alt : tokens.at(0).at("top_logprobs")) {
          out.first_token_top.push_back({alt.at("token").get<std::string>(), alt.at("logprob").get<double>()});
        }
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("malformed chat response: ") + e.what());
  }
  return out;
}

std::shared_ptr<const LlmBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendConfig::Kind::Http) return std::make_shared<HttpBackend>(config);
  if (config.mock_script.empty()) return std::make_shared<MockBackend>();
  return std::make_shared<MockBackend>(MockBackend::from_file(config.mock_script));
}

// ---------------------------------------------------------------------------
// Belief text

Polarity classify_belief_polarity(const std::string& statement) {
  static constexpr std::array<std::string_view, 5> kPrefixes = {"uncertain", "unsure", "concern", "worried",
                                                                "doubt"};
  for (const auto& word : tokenize(statement)) {
    if (word == "not") return Polarity::Negative;
    for (auto p : kPrefixes) {
      if (word.starts_with(p)) return Polarity::Negative;
    }
  }
  return Polarity::Positive;
}

BeliefState parse_belief_line(const std::string& text) {
  std::vector<BeliefStatement> out;
  std::string current;
  auto flush = [&] {
    std::string t = trim(current);
    while (!t.empty() && (t.back() == ',' || t.back() == ':')) t.pop_back();
    t = trim(t);
    if (!t.empty()) out.push_back({classify_belief_polarity(t), t});
    current.clear();
  };
  for (char c : text) {
    if (c == '.' || c == ';' || c == '\n') {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  if (out.empty()) fail(ErrorCode::UnparseableBelief, "no belief statement in '" + text + "'");
  return BeliefState(std::move(out));
}

std::string belief_prose(const BeliefState& belief) {
  std::string out;
  for (const auto& s : belief.statements()) {
    if (!out.empty()) out += ' ';
    out += s.text;
    out += '.';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gateway

LlmGateway::LlmGateway(std::shared_ptr<const LlmBackend> backend) : backend_(std::move(backend)) {
  if (!backend_) fail(ErrorCode::InvalidArgument, "gateway needs a backend");
}

LlmResponse LlmGateway::call(LlmRequest request) const {
  try {
    return backend_->complete(request);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::BackendFailure, e.what());
  }
}

LabelLogprobs LlmGateway::extract_labels(const LlmResponse& response, std::string_view labels) const {
  LabelLogprobs out;
  for (const auto& alt : response.first_token_top) {
    const std::string t = trim(alt.token);
    if (t.empty() || labels.find(t.front()) == std::string_view::npos) continue;
    // "A", "A." and "A)" all count; "Agree" does not.
    if (t.size() > 1 && std::isalnum(static_cast<unsigned char>(t[1]))) continue;
    if (!std::isfinite(alt.logprob)) continue;
    const double lp = std::min(alt.logprob, 0.0);
    auto [it, inserted] = out.entries.emplace(t.front(), lp);
    if (!inserted) {
      // Variants of one label share its mass.
      const double hi = std::max(it->second, lp);
      const double lo = std::min(it->second, lp);
      it->second = std::min(0.0, hi + std::log1p(std::exp(lo - hi)));
    }
  }
  if (out.empty()) {
    fail(ErrorCode::NoLabelTokens, "no candidate label among the first-token alternatives");
  }
  return out;
}

std::string LlmGateway::render_summary_prompt(const DialogueHistory& history) {
  return prompt_template(PromptKind::Summary)
      .render({{"example", std::string(kSummaryExample)}, {"dialogue_history", render_history(history)}});
}

std::string LlmGateway::render_desire_prompt(const DialogueHistory& history) {
  return prompt_template(PromptKind::Desire).render({{"dialogue_history", render_history(history)}});
}

std::string LlmGateway::render_belief_prompt(const DialogueHistory& history, DesireLevel desire,
                                             std::span<const Experience* const> exemplars) {
  std::string block;
  if (!exemplars.empty()) {
    block = "Relevant Experience:";
    std::size_t k = 1;
    for (const Experience* e : exemplars) {
      block += "\nTop-" + std::to_string(k++) + " Experience:\n";
      block += render_history(e->history);
      block += "\nDesire level: " + desire_text(e->desire);
      block += "\nBelief: " + belief_prose(e->belief);
    }
    block += "\n";
  }
  return prompt_template(PromptKind::Belief)
      .render({{"experience_block", block},
               {"dialogue_history", render_history(history)},
               {"desire", desire_text(desire)}});
}

std::string LlmGateway::render_strategy_prompt(const DialogueHistory& history, DesireLevel desire,
                                               const BeliefState& belief) {
  return prompt_template(PromptKind::Strategy)
      .render({{"dialogue_history", render_history(history)},
               {"desire", desire_text(desire)},
               {"belief", belief.empty() ? std::string("unknown") : belief_prose(belief)},
               {"strategy_definitions", strategy_definitions()}});
}

DialogueSummary LlmGateway::generate_summary(const DialogueHistory& history) const {
  validate_history(history);
  LlmRequest req{PromptKind::Summary, render_summary_prompt(history), history_key(history), {}, false, 256};
  std::string text = trim(call(std::move(req)).text);
  if (text.starts_with("Summary:")) text = trim(text.substr(8));
  if (text.empty()) fail(ErrorCode::EmptyGeneration, "summary generation returned nothing");
  return DialogueSummary{std::move(text)};
}

LabelLogprobs LlmGateway::desire_logprobs(const DialogueHistory& history) const {
  validate_history(history);
  LlmRequest req{PromptKind::Desire, render_desire_prompt(history), history_key(history), {}, true, 1};
  return extract_labels(call(std::move(req)), kDesireLabels);
}

BeliefState LlmGateway::generate_belief(const DialogueHistory& history, DesireLevel desire,
                                        std::span<const Experience* const> exemplars) const {
  validate_history(history);
  LlmRequest req{PromptKind::Belief,
                 render_belief_prompt(history, desire, exemplars),
                 history_key(history),
                 {{"desire", desire_text(desire)}},
                 false,
                 128};
  return parse_belief_line(call(std::move(req)).text);
}

LabelLogprobs LlmGateway::strategy_logprobs(const DialogueHistory& history, DesireLevel desire,
                                            const BeliefState& belief) const {
  validate_history(history);
  LlmRequest req{PromptKind::Strategy,
                 render_strategy_prompt(history, desire, belief),
                 history_key(history),
                 {{"desire", desire_text(desire)}},
                 true,
                 1};
  return extract_labels(call(std::move(req)), kStrategyLabels);
}

std::string LlmGateway::generate_agent_response(const std::string& task, const std::string& background,
                                                const DialogueHistory& history, const ToMState& state,
                                                Strategy strategy) const {
  if (trim(task).empty()) fail(ErrorCode::InvalidArgument, "task must not be empty");
  validate_history(history);
  const std::string prompt = prompt_template(PromptKind::AgentResponse)
                                 .render({{"task", task},
                                          {"background", background},
                                          {"dialog", render_history(history)},
                                          {"desire", desire_text(state.desire)},
                                          {"belief", state.belief.empty() ? "unknown" : belief_prose(state.belief)},
                                          {"strategy", strategy_line(strategy)}});
  LlmRequest req{PromptKind::AgentResponse, prompt, history_key(history),
                 {{"strategy_letter", std::string(1, letter_of(strategy))}}, false, 256};
  std::string text = trim(call(std::move(req)).text);
  if (text.empty()) fail(ErrorCode::EmptyGeneration, "agent response was empty");
  return text;
}

std::string LlmGateway::generate_opener(const std::string& task, const std::string& background) const {
  if (trim(task).empty()) fail(ErrorCode::InvalidArgument, "task must not be empty");
  const Strategy strategy = Strategy::SupplyingInformation;
  const std::string prompt = prompt_template(PromptKind::AgentResponse)
                                 .render({{"task", task},
                                          {"background", background},
                                          {"dialog", "(no messages yet)"},
                                          {"desire", "unknown"},
                                          {"belief", "unknown"},
                                          {"strategy", strategy_line(strategy)}});
  LlmRequest req{PromptKind::AgentResponse, prompt, 0,
                 {{"strategy_letter", std::string(1, letter_of(strategy))}, {"opener", "1"}}, false, 256};
  std::string text = trim(call(std::move(req)).text);
  if (text.empty()) fail(ErrorCode::EmptyGeneration, "opener was empty");
  return text;
}

double LlmGateway::judge_belief(const BeliefState& ground_truth, const BeliefState& predicted) const {
  if (ground_truth.empty()) fail(ErrorCode::InvalidArgument, "ground-truth belief must not be empty");
  const std::string prompt = prompt_template(PromptKind::BeliefJudge)
                                 .render({{"gt_belief", ground_truth.text()},
                                          {"pred_belief", predicted.empty() ? "(none)" : predicted.text()}});
  LlmRequest req{PromptKind::BeliefJudge, prompt, 0,
                 {{"gt_belief", encode(ground_truth).dump()}, {"pred_belief", encode(predicted).dump()}},
                 false, 8};
  const std::string text = trim(call(std::move(req)).text);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !(v == 0.0 || v == 0.5 || v == 1.0)) {
    fail(ErrorCode::MalformedJudgeOutput, "judge returned '" + text + "'");
  }
  return v;
}

Preannotation LlmGateway::preannotate(const DialogueHistory& history, const BeliefState& prior_negatives) const {
  validate_history(history);
  const std::string rendered = render_history(history);

  LlmRequest dreq{PromptKind::PreannotateDesire,
                  prompt_template(PromptKind::PreannotateDesire).render({{"dialogue_history", rendered}}),
                  history_key(history),
                  {},
                  false,
                  64};
  const std::string dtext = call(std::move(dreq)).text;

  std::string previous = "Dialogue history:\n" + rendered + "\nPrevious unresolved negative beliefs: ";
  previous += prior_negatives.empty() ? "none" : belief_prose(prior_negatives);
  LlmRequest breq{PromptKind::PreannotateBelief,
                  prompt_template(PromptKind::PreannotateBelief)
                      .render({{"dialogue_history_and_previous_beliefs", previous}}),
                  history_key(history),
                  {},
                  false,
                  256};
  const std::string btext = call(std::move(breq)).text;

  Preannotation out{DesireLevel::hesitant(), {}};
  try {
    const json d = json::parse(extract_json_object(dtext));
    const auto& field = d.at("desire");
    if (!field.is_number_integer()) fail(ErrorCode::MalformedAnnotation, "desire is not an integer");
    const int v = field.get<int>();
    if (v < -1 || v > 1) fail(ErrorCode::MalformedAnnotation, "desire " + std::to_string(v) + " out of range");
    out.desire = DesireLevel::from_int(v);

    const json b = json::parse(extract_json_object(btext));
    std::vector<BeliefStatement> statements;
    for (const auto& s : b.at("belief")) {
      const std::string t = trim(s.get<std::string>());
      if (!t.empty()) statements.push_back({classify_belief_polarity(t), t});
    }
    out.belief = BeliefState(std::move(statements));
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedAnnotation, std::string("annotation output is not the required JSON: ") + e.what());
  }
  return out;
}

Summarizer llm_summarizer(const LlmGateway& gateway) {
  return [&gateway](const DialogueHistory& h) { return gateway.generate_summary(h); };
}

// ---------------------------------------------------------------------------

double RuleJudge::score(const BeliefState& ground_truth, const BeliefState& predicted) const {
  auto split = [](const BeliefState& b) {
    std::array<std::vector<std::string>, 2> by;
    for (const auto& s : b.statements()) by[s.polarity == Polarity::Positive ? 0 : 1].push_back(normalized(s.text));
    for (auto& v : by) std::sort(v.begin(), v.end());
    return by;
  };
  const auto gt = split(ground_truth);
  const auto pr = split(predicted);
  if (gt == pr) return 1.0;
  if (gt[0].size() == pr[0].size() && gt[1].size() == pr[1].size()) return 0.5;
  return 0.0;
}

}  // namespace ttbys
