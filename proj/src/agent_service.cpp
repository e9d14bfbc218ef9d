#include "ttbys/agent_service.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

namespace ttbys {

namespace {

constexpr std::array<RatingDimension, 5> kDimensions = {
    RatingDimension::Identification, RatingDimension::Empathy, RatingDimension::Persuasion,
    RatingDimension::Fluency, RatingDimension::Consistency};

std::size_t persuadee_turns(const DialogueHistory& h) {
  std::size_t n = 0;
  for (const auto& u : h.utterances) n += u.role == Role::Persuadee ? 1 : 0;
  return n;
}

void check_session_shape(const Session& s) {
  if (trim(s.task).empty()) fail(ErrorCode::InvalidArgument, "session task must not be empty");
  validate_history(s.transcript);
  if (s.transcript.utterances.front().role != Role::Persuader) {
    fail(ErrorCode::NonAlternatingRoles, "a session transcript starts with the agent");
  }
  if (s.inferences.size() != persuadee_turns(s.transcript)) {
    fail(ErrorCode::Parse, "session has " + std::to_string(s.inferences.size()) + " inferences for " +
                               std::to_string(persuadee_turns(s.transcript)) + " persuadee turns");
  }
}

}  // namespace

std::string_view to_string(RatingDimension d) {
  switch (d) {
    case RatingDimension::Identification: return "identification";
    case RatingDimension::Empathy: return "empathy";
    case RatingDimension::Persuasion: return "persuasion";
    case RatingDimension::Fluency: return "fluency";
    case RatingDimension::Consistency: return "consistency";
  }
  return "";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "win";
    case Verdict::Lose: return "lose";
    case Verdict::Tie: return "tie";
  }
  return "";
}

RatingDimension rating_dimension_from_string(std::string_view name) {
  const std::string lower = to_lower(trim(name));
  for (auto d : kDimensions) {
    if (to_string(d) == lower) return d;
  }
  fail(ErrorCode::UnknownDimension, "unknown rating dimension '" + std::string(name) + "'");
}

Verdict verdict_from_string(std::string_view name) {
  const std::string lower = to_lower(trim(name));
  if (lower == "win") return Verdict::Win;
  if (lower == "lose") return Verdict::Lose;
  if (lower == "tie") return Verdict::Tie;
  fail(ErrorCode::InvalidArgument, "verdict must be win, lose or tie, got '" + std::string(name) + "'");
}

std::span<const RatingDimension> all_rating_dimensions() { return kDimensions; }

json encode(const RatingRecord& r) {
  json j = {{"dimension", to_string(r.dimension)},
            {"verdict", to_string(r.verdict)},
            {"comparison_target", r.comparison_target}};
  j["turn_index"] = r.turn_index ? json(*r.turn_index) : json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

RatingRecord decode_rating(const json& j) {
  RatingRecord r;
  try {
    r.dimension = rating_dimension_from_string(require(j, "dimension").get<std::string>());
    r.verdict = verdict_from_string(require(j, "verdict").get<std::string>());
    r.comparison_target = j.value("comparison_target", std::string());
    if (j.contains("turn_index") && !j["turn_index"].is_null()) r.turn_index = j["turn_index"].get<std::size_t>();
    r.note = j.value("note", std::string());
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad rating: ") + e.what());
  }
  return r;
}

json export_session(const Session& s, bool include_traces) {
  json ratings = json::array();
  for (const auto& r : s.ratings) ratings.push_back(encode(r));
  json doc = {{"id", s.id},
              {"task", s.task},
              {"background", s.background},
              {"transcript", encode(s.transcript)},
              {"created_at", s.created_at},
              {"updated_at", s.updated_at},
              {"ratings", ratings}};
  if (include_traces) {
    json inf = json::array();
    for (const auto& t : s.inferences) inf.push_back(encode(t));
    doc["inferences"] = inf;
  }
  return doc;
}

Session import_session(const json& doc) {
  Session s;
  try {
    s.id = require(doc, "id").get<std::string>();
    s.task = require(doc, "task").get<std::string>();
    s.background = doc.value("background", std::string());
    s.transcript = decode_history(require(doc, "transcript"));
    s.created_at = doc.value("created_at", std::int64_t{0});
    s.updated_at = doc.value("updated_at", s.created_at);
    if (doc.contains("ratings")) {
      for (const auto& r : doc["ratings"]) s.ratings.push_back(decode_rating(r));
    }
    const auto& inf = require(doc, "inferences");
    for (const auto& t : inf) s.inferences.push_back(decode_turn_inference(t));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad session document: ") + e.what());
  }
  check_session_shape(s);
  return s;
}

double WinRate::win_pct() const {
  const auto n = wins + losses + ties;
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(wins) / static_cast<double>(n);
}

double WinRate::lose_pct() const {
  const auto n = wins + losses + ties;
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(losses) / static_cast<double>(n);
}

std::map<RatingDimension, WinRate> win_rates(std::span<const RatingRecord> ratings) {
  std::map<RatingDimension, WinRate> out;
  for (auto d : kDimensions) out[d];
  for (const auto& r : ratings) {
    auto& w = out[r.dimension];
    (r.verdict == Verdict::Win ? w.wins : r.verdict == Verdict::Lose ? w.losses : w.ties) += 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

AgentService::AgentService(const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm,
                           ServiceConfig config)
    : kb_(kb), embedder_(embedder), llm_(llm), config_(std::move(config)),
      id_rng_(config_.id_seed != 0 ? config_.id_seed : std::random_device{}() ^ (std::uint64_t{std::random_device{}()} << 32)) {
  config_.cfg.validate();
  if (!config_.now_ms) {
    config_.now_ms = [] {
      using namespace std::chrono;
      return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    };
  }
  if (!config_.clock_factory) config_.clock_factory = [] { return steady_clock(); };
  if (!config_.data_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config_.data_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create data dir " + config_.data_dir.string() + ": " + ec.message());
    replay();
  }
}

std::int64_t AgentService::now() const { return config_.now_ms(); }

std::string AgentService::new_id() {
  std::lock_guard lock(id_mutex_);
  while (true) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng_.next()));
    std::string id(buf);
    std::shared_lock reg(registry_mutex_);
    if (!sessions_.contains(id)) return id;
  }
}

std::shared_ptr<AgentService::Entry> AgentService::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::SessionNotFound, "no session '" + id + "'");
  return it->second;
}

void AgentService::add(Session s) {
  auto entry = std::make_shared<Entry>();
  const std::string id = s.id;
  entry->session = std::move(s);
  std::unique_lock lock(registry_mutex_);
  sessions_[id] = std::move(entry);
}

void AgentService::append(const std::string& id, const json& event) const {
  if (config_.data_dir.empty()) return;
  std::lock_guard lock(file_mutex_);
  std::ofstream out(config_.data_dir / (id + ".jsonl"), std::ios::app);
  if (!out) fail(ErrorCode::Io, "cannot append to session file for " + id);
  out << event.dump() << '\n';
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed for session " + id);
}

void AgentService::replay() {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config_.data_dir)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string line;
    std::size_t lineno = 0;
    Session s;
    bool created = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        const json ev = json::parse(line);
        const std::string kind = require(ev, "event").get<std::string>();
        if (kind == "create") {
          s = import_session(require(ev, "session"));
          created = true;
        } else if (!created) {
          fail(ErrorCode::Parse, "event before session creation");
        } else if (kind == "turn") {
          s.transcript.utterances.push_back({Role::Persuadee, require(ev, "persuadee").get<std::string>()});
          s.transcript.utterances.push_back({Role::Persuader, require(ev, "agent_reply").get<std::string>()});
          s.inferences.push_back(decode_turn_inference(require(ev, "inference")));
          s.updated_at = require(ev, "at").get<std::int64_t>();
        } else if (kind == "rating") {
          s.ratings.push_back(decode_rating(require(ev, "rating")));
          s.updated_at = require(ev, "at").get<std::int64_t>();
        } else {
          fail(ErrorCode::Parse, "unknown event '" + kind + "'");
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what(), lineno);
      } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what(), lineno);
      }
    }
    if (created) add(std::move(s));
  }
}

Session AgentService::create_session(const std::string& task, const std::string& background) {
  if (trim(task).empty()) fail(ErrorCode::InvalidArgument, "task must not be empty");
  Session s;
  s.id = new_id();
  s.task = task;
  s.background = background;
  s.transcript.utterances.push_back({Role::Persuader, llm_.generate_opener(task, background)});
  s.created_at = s.updated_at = now();
  append(s.id, {{"event", "create"}, {"session", export_session(s, true)}});
  add(s);
  return s;
}

TurnResult AgentService::post_utterance(const std::string& session_id, const std::string& text) {
  const auto entry = find(session_id);
  std::unique_lock turn(entry->turn, std::try_to_lock);
  if (!turn.owns_lock()) fail(ErrorCode::SessionBusy, "session '" + session_id + "' is processing a turn");
  if (trim(text).empty()) fail(ErrorCode::EmptyUtterance, "utterance must not be empty");

  Session draft;
  {
    std::lock_guard lock(entry->data);
    draft = entry->session;
  }
  draft.transcript.utterances.push_back({Role::Persuadee, text});
  PipelineContext ctx{kb_, embedder_, llm_, config_.cfg, config_.clock_factory(), true, config_.summarizer};
  const TurnInference computed = infer_turn(draft.transcript, ctx);
  // Keep exactly what a reload would see.
  TurnInference inference = decode_turn_inference(encode(computed));
  const std::string reply = llm_.generate_agent_response(draft.task, draft.background, draft.transcript,
                                                         inference.state(), inference.strategy);
  const std::int64_t at = now();
  append(session_id, {{"event", "turn"},
                      {"persuadee", text},
                      {"agent_reply", reply},
                      {"inference", encode(inference)},
                      {"at", at}});
  {
    std::lock_guard lock(entry->data);
    auto& s = entry->session;
    s.transcript.utterances.push_back({Role::Persuadee, text});
    s.transcript.utterances.push_back({Role::Persuader, reply});
    s.inferences.push_back(inference);
    s.updated_at = at;
  }
  return {reply, std::move(inference)};
}

void AgentService::record_rating(const std::string& session_id, const RatingRecord& rating) {
  const auto entry = find(session_id);
  const std::int64_t at = now();
  std::lock_guard lock(entry->data);
  append(session_id, {{"event", "rating"}, {"rating", encode(rating)}, {"at", at}});
  entry->session.ratings.push_back(rating);
  entry->session.updated_at = at;
}

Session AgentService::get(const std::string& session_id) const {
  const auto entry = find(session_id);
  std::lock_guard lock(entry->data);
  return entry->session;
}

json AgentService::export_transcript(const std::string& session_id, bool include_traces) const {
  return export_session(get(session_id), include_traces);
}

std::string AgentService::import(const json& doc) {
  Session s = import_session(doc);
  {
    std::shared_lock lock(registry_mutex_);
    if (sessions_.contains(s.id)) s.id.clear();
  }
  if (s.id.empty()) s.id = new_id();
  append(s.id, {{"event", "create"}, {"session", export_session(s, true)}});
  const std::string id = s.id;
  add(std::move(s));
  return id;
}

std::vector<std::string> AgentService::session_ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace ttbys
