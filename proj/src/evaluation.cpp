#include "ttbys/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>

namespace ttbys {

double belief_score(std::span<const BeliefState> predictions, std::span<const BeliefState> gold,
                    const BeliefJudge& judge) {
  if (predictions.size() != gold.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predicted beliefs for " +
                                        std::to_string(gold.size()) + " gold beliefs");
  }
  if (gold.empty()) fail(ErrorCode::Empty, "nothing to score");
  double total = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    try {
      total += judge.score(gold[i], predictions[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "instance " + std::to_string(i) + ": " + e.what());
    }
  }
  return 100.0 * total / static_cast<double>(gold.size());
}

std::vector<TurnCase> labeled_turns(const Corpus& split) {
  std::vector<TurnCase> out;
  for (const auto& d : split) {
    const auto& us = d.utterances.utterances;
    for (std::size_t t = 0; t + 1 < us.size(); ++t) {
      if (us[t].role != Role::Persuadee) continue;
      const auto& l = d.labels[t];
      const auto& reply = d.labels[t + 1];
      if (!l.desire || !l.belief || !reply.strategy) continue;
      TurnCase c;
      c.dialogue_id = d.id;
      c.utterance_index = t;
      c.history.utterances.assign(us.begin(), us.begin() + static_cast<std::ptrdiff_t>(t) + 1);
      c.gold_desire = *l.desire;
      c.gold_belief = *l.belief;
      c.gold_strategy = *reply.strategy;
      out.push_back(std::move(c));
    }
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::Empty, "no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::Pipelined ? "pipelined" : "gold-state"; }

EvalMode eval_mode_from_string(std::string_view name) {
  if (name == "pipelined") return EvalMode::Pipelined;
  if (name == "gold-state") return EvalMode::GoldState;
  fail(ErrorCode::InvalidArgument, "unknown eval mode '" + std::string(name) + "'");
}

void check_split(const Corpus& test, const KnowledgeBase& kb) {
  const auto kb_ids = kb.dialogue_ids();
  std::vector<std::string> shared;
  for (const auto& d : test) {
    if (std::binary_search(kb_ids.begin(), kb_ids.end(), d.id)) shared.push_back(d.id);
  }
  if (!shared.empty()) {
    std::string msg = "test dialogues also present in the knowledge base:";
    for (const auto& id : shared) msg += " " + id;
    fail(ErrorCode::SplitOverlap, msg);
  }
}

namespace {

json config_snapshot(const KnowledgeBase& kb, const LlmGateway& llm, const EvalOptions& o) {
  return {{"blend", encode(o.cfg)},
          {"n_runs", o.n_runs},
          {"mode", to_string(o.mode)},
          {"use_summary_query", o.use_summary_query},
          {"summarizer", o.summarizer ? "override" : "llm"},
          {"kb_size", kb.size()},
          {"embedder", kb.fingerprint()},
          {"backend", llm.backend().describe()}};
}

std::vector<TurnInference> run_once(const std::vector<TurnCase>& cases, const KnowledgeBase& kb,
                                    const Embedder& embedder, const LlmGateway& llm, const EvalOptions& o) {
  std::vector<TurnInference> out(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  const long n = static_cast<long>(cases.size());

  auto one = [&](long i) {
    try {
      PipelineContext ctx{kb, embedder, llm, o.cfg, o.clock_factory(), o.use_summary_query, o.summarizer};
      const auto& c = cases[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = o.mode == EvalMode::Pipelined
                                             ? infer_turn(c.history, ctx)
                                             : infer_turn_gold_state(c.history, c.gold_desire, c.gold_belief, ctx);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (o.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "turn " + cases[i].dialogue_id + "/" + std::to_string(cases[i].utterance_index) +
                                ": " + e.what());
    }
  }
  return out;
}

}  // namespace

EvalReport run_static_eval(const Corpus& test, const KnowledgeBase& kb, const Embedder& embedder,
                           const LlmGateway& llm, const BeliefJudge& judge, const EvalOptions& options) {
  if (options.n_runs == 0) fail(ErrorCode::InvalidArgument, "n_runs must be >= 1");
  options.cfg.validate();
  check_split(test, kb);
  const auto cases = labeled_turns(test);
  if (cases.empty()) fail(ErrorCode::Empty, "test split has no labeled persuadee turns");

  std::vector<DesireLevel> gold_d;
  std::vector<BeliefState> gold_b;
  std::vector<Strategy> gold_s;
  for (const auto& c : cases) {
    gold_d.push_back(c.gold_desire);
    gold_b.push_back(c.gold_belief);
    gold_s.push_back(c.gold_strategy);
  }

  EvalReport report;
  report.n_runs = options.n_runs;
  report.n_turns = cases.size();
  report.config = config_snapshot(kb, llm, options);
  std::vector<double> acc_d, acc_b, acc_s;
  for (std::size_t run = 0; run < options.n_runs; ++run) {
    auto inferences = run_once(cases, kb, embedder, llm, options);
    std::vector<DesireLevel> pd;
    std::vector<BeliefState> pb;
    std::vector<Strategy> ps;
    for (const auto& t : inferences) {
      pd.push_back(t.desire);
      pb.push_back(t.belief);
      ps.push_back(t.strategy);
    }
    acc_d.push_back(accuracy<DesireLevel>(pd, gold_d));
    acc_b.push_back(belief_score(pb, gold_b, judge));
    acc_s.push_back(accuracy<Strategy>(ps, gold_s));
    report.runs.push_back(std::move(inferences));
  }
  report.desire_accuracy = mean_std(acc_d);
  report.belief_accuracy = mean_std(acc_b);
  report.strategy_accuracy = mean_std(acc_s);
  return report;
}

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> parts;
  std::string s(spec);
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad grid '" + s + "', expected lo:hi:step");
    }
  }
  if (parts.size() != 3) fail(ErrorCode::InvalidArgument, "bad grid '" + s + "', expected lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo || lo < 0.0 || hi > 1.0) {
    fail(ErrorCode::InvalidArgument, "grid '" + s + "' must satisfy 0 <= lo <= hi <= 1 and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) {
    // Snap to 1e-12 so 0.1 * 3 prints as 0.3.
    out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
  }
  return out;
}

std::vector<double> default_grid() { return parse_grid("0:1:0.1"); }

SweepReport sweep_blend(const std::string& parameter, std::span<const double> grid, const Corpus& test,
                        const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm,
                        const BeliefJudge& judge, const EvalOptions& options) {
  if (parameter != "alpha" && parameter != "beta") {
    fail(ErrorCode::InvalidArgument, "sweep parameter must be alpha or beta");
  }
  if (grid.empty()) fail(ErrorCode::Empty, "empty sweep grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0) fail(ErrorCode::InvalidArgument, "grid values must lie in [0, 1]");
    if (i > 0 && grid[i] <= grid[i - 1]) fail(ErrorCode::InvalidArgument, "grid must be strictly ascending");
  }
  SweepReport out{parameter, llm.backend().describe(), {}};
  for (double v : grid) {
    EvalOptions o = options;
    (parameter == "alpha" ? o.cfg.alpha : o.cfg.beta) = v;
    out.points.push_back({v, run_static_eval(test, kb, embedder, llm, judge, o)});
  }
  return out;
}

std::vector<KbSizePoint> ablate_kb_size(std::span<const std::size_t> sizes, std::uint64_t seed, const Corpus& test,
                                        const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm,
                                        const BeliefJudge& judge, const EvalOptions& options) {
  std::vector<KbSizePoint> out;
  for (std::size_t size : sizes) {
    const KnowledgeBase sub = subsample(kb, size, seed);
    out.push_back({size, run_static_eval(test, sub, embedder, llm, judge, options)});
  }
  return out;
}

KnowledgeBase with_history_embeddings(const KnowledgeBase& kb, const Embedder& embedder) {
  kb.check_embedder(embedder);
  std::vector<Experience> experiences = kb.experiences();
  std::vector<std::string> texts;
  for (const auto& e : experiences) texts.push_back(render_history(e.history));
  auto vectors = embedder.embed_batch(texts);
  for (std::size_t i = 0; i < experiences.size(); ++i) experiences[i].summary_embedding = std::move(vectors[i]);
  KnowledgeBase out(std::move(experiences), kb.fingerprint());
  out.set_parallel(kb.parallel());
  return out;
}

SummaryAblation ablate_summary(const Corpus& test, const KnowledgeBase& kb, const Embedder& embedder,
                               const LlmGateway& llm, const BeliefJudge& judge, const EvalOptions& options) {
  EvalOptions with = options;
  with.use_summary_query = true;
  EvalOptions without = options;
  without.use_summary_query = false;
  SummaryAblation out;
  out.with_summary = run_static_eval(test, kb, embedder, llm, judge, with);
  out.without_summary =
      run_static_eval(test, with_history_embeddings(kb, embedder), embedder, llm, judge, without);
  return out;
}

RuntimeReport runtime_report(std::span<const TurnInference> turns) {
  if (turns.empty()) fail(ErrorCode::Empty, "no turns to report");
  RuntimeReport r;
  r.n_turns = turns.size();
  for (std::size_t s = 0; s < 3; ++s) r.rows[s].stage = static_cast<Stage>(s);
  for (const auto& t : turns) {
    for (std::size_t s = 0; s < 3; ++s) {
      r.rows[s].total_s += t.traces[s].total_seconds;
      r.rows[s].llm_s += t.traces[s].llm_seconds;
      r.rows[s].retrieval_s += t.traces[s].retrieval_seconds;
    }
  }
  for (auto& row : r.rows) row.avg_per_turn_s = row.total_s / static_cast<double>(r.n_turns);
  return r;
}

json encode(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

json encode(const EvalReport& r, bool include_traces) {
  json j = {{"desire_accuracy", encode(r.desire_accuracy)},
            {"belief_accuracy", encode(r.belief_accuracy)},
            {"strategy_accuracy", encode(r.strategy_accuracy)},
            {"n_runs", r.n_runs},
            {"n_turns", r.n_turns},
            {"config", r.config}};
  if (include_traces) {
    json runs = json::array();
    for (const auto& run : r.runs) {
      json turns = json::array();
      for (const auto& t : run) turns.push_back(encode(t));
      runs.push_back(turns);
    }
    j["runs"] = runs;
  }
  return j;
}

json encode(const SweepReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"value", p.value},
                      {"desire_accuracy", encode(p.report.desire_accuracy)},
                      {"belief_accuracy", encode(p.report.belief_accuracy)},
                      {"strategy_accuracy", encode(p.report.strategy_accuracy)}});
  }
  return {{"parameter", r.parameter}, {"backbone", r.backbone}, {"points", points}};
}

json encode(const RuntimeReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"stage", to_string(row.stage)},
                    {"total_s", row.total_s},
                    {"llm_s", row.llm_s},
                    {"retrieval_s", row.retrieval_s},
                    {"avg_per_turn_s", row.avg_per_turn_s}});
  }
  return {{"n_turns", r.n_turns}, {"rows", rows}};
}

namespace {

std::string fmt(const char* f, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "turns: " << r.n_turns << "  runs: " << r.n_runs << "\n";
  out << "Dimension   Accuracy (%)\n";
  out << "Desire      " << fmt("%6.2f ± %.2f", r.desire_accuracy.mean, r.desire_accuracy.std) << "\n";
  out << "Belief      " << fmt("%6.2f ± %.2f", r.belief_accuracy.mean, r.belief_accuracy.std) << "\n";
  out << "Strategy    " << fmt("%6.2f ± %.2f", r.strategy_accuracy.mean, r.strategy_accuracy.std) << "\n";
  return out.str();
}

std::string format_sweep(const SweepReport& r) {
  std::ostringstream out;
  out << r.parameter << "   Desire   Belief   Strategy   (" << r.backbone << ")\n";
  for (const auto& p : r.points) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-5.2f %7.2f  %7.2f  %9.2f\n", p.value, p.report.desire_accuracy.mean,
                  p.report.belief_accuracy.mean, p.report.strategy_accuracy.mean);
    out << buf;
  }
  return out.str();
}

std::string format_runtime(const RuntimeReport& r) {
  static constexpr const char* kNames[] = {"1st Think", "2nd Think", "3rd Think"};
  std::ostringstream out;
  out << "Stage       Total (s)    LLM (s)  Retrieval (s)   Avg. (s)\n";
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = r.rows[i];
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %10.2f %10.2f %14.2f %10.4f\n", kNames[i], row.total_s, row.llm_s,
                  row.retrieval_s, row.avg_per_turn_s);
    out << buf;
  }
  return out.str();
}

}  // namespace ttbys
