#include "ttbys/pipeline.hpp"

#include <chrono>
#include <memory>

namespace ttbys {

Clock steady_clock() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

Clock stepping_clock(double step) {
  auto ticks = std::make_shared<long long>(0);
  return [ticks, step] { return static_cast<double>((*ticks)++) * step; };
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::First: return "first";
    case Stage::Second: return "second";
    case Stage::Third: return "third";
  }
  return "";
}

Stage stage_from_string(std::string_view name) {
  if (name == "first") return Stage::First;
  if (name == "second") return Stage::Second;
  if (name == "third") return Stage::Third;
  fail(ErrorCode::Parse, "unknown stage '" + std::string(name) + "'");
}

namespace {

DialogueSummary query_of(const DialogueHistory& h, const DialogueSummary& summary, const PipelineContext& ctx) {
  return ctx.use_summary_query ? summary : DialogueSummary{render_history(h)};
}

}  // namespace

std::pair<DesireLevel, StageTrace> first_think(const DialogueHistory& h, const DialogueSummary& summary,
                                                const PipelineContext& ctx) {
  StageTrace trace;
  trace.stage = Stage::First;
  const double t0 = ctx.clock();

  trace.retrieved = ctx.kb.retrieve_by_summary(ctx.embedder, query_of(h, summary, ctx), ctx.cfg.n_first);
  std::vector<DesireLevel> observed;
  for (const auto& hit : trace.retrieved) observed.push_back(ctx.kb.at(hit.index).desire);
  trace.desire_exp = experience_distribution<DesireLevel>(observed, all_desires());
  const double t1 = ctx.clock();

  LabelLogprobs lp;
  try {
    lp = ctx.llm.desire_logprobs(h);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoLabelTokens) throw;
    trace.fallback_used = true;
  }
  const double t2 = ctx.clock();

  trace.desire_model = model_distribution<DesireLevel>(lp, all_desires(), ctx.cfg.floor);
  const double coeff = trace.fallback_used ? 0.0 : ctx.cfg.alpha;
  trace.desire_fused = blend(*trace.desire_model, *trace.desire_exp, coeff);
  const DesireLevel desire = argmax_label(*trace.desire_fused);
  const double t3 = ctx.clock();

  trace.retrieval_seconds = t1 - t0;
  trace.llm_seconds = t2 - t1;
  trace.total_seconds = t3 - t0;
  return {desire, std::move(trace)};
}

std::pair<BeliefState, StageTrace> second_think(const DialogueHistory& h, DesireLevel desire,
                                                const DialogueSummary& summary, const PipelineContext& ctx) {
  StageTrace trace;
  trace.stage = Stage::Second;
  const double t0 = ctx.clock();

  if (ctx.kb.empty()) fail(ErrorCode::EmptyKnowledgeBase, "knowledge base is empty");
  trace.retrieved =
      ctx.kb.retrieve_desire_filtered(ctx.embedder, query_of(h, summary, ctx), desire, ctx.cfg.n_second);
  std::vector<const Experience*> exemplars;
  for (const auto& hit : trace.retrieved) exemplars.push_back(&ctx.kb.at(hit.index));
  const double t1 = ctx.clock();

  BeliefState belief = ctx.llm.generate_belief(h, desire, exemplars);
  const double t2 = ctx.clock();

  trace.retrieval_seconds = t1 - t0;
  trace.llm_seconds = t2 - t1;
  trace.total_seconds = t2 - t0;
  return {std::move(belief), std::move(trace)};
}

std::pair<Strategy, StageTrace> third_think(const DialogueHistory& h, const DialogueSummary& summary,
                                            DesireLevel desire, const BeliefState& belief,
                                            const PipelineContext& ctx) {
  StageTrace trace;
  trace.stage = Stage::Third;
  const double t0 = ctx.clock();

  trace.retrieved = ctx.kb.retrieve_joint(ctx.embedder, query_of(h, summary, ctx), belief, ctx.cfg.n_third);
  std::vector<Strategy> observed;
  for (const auto& hit : trace.retrieved) observed.push_back(ctx.kb.at(hit.index).strategy);
  trace.strategy_exp = experience_distribution<Strategy>(observed, all_strategies());
  const double t1 = ctx.clock();

  LabelLogprobs lp;
  try {
    lp = ctx.llm.strategy_logprobs(h, desire, belief);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoLabelTokens) throw;
    trace.fallback_used = true;
  }
  const double t2 = ctx.clock();

  trace.strategy_model = model_distribution<Strategy>(lp, all_strategies(), ctx.cfg.floor);
  const double coeff = trace.fallback_used ? 0.0 : ctx.cfg.beta;
  trace.strategy_fused = blend(*trace.strategy_model, *trace.strategy_exp, coeff);
  const Strategy strategy = argmax_label(*trace.strategy_fused);
  const double t3 = ctx.clock();

  trace.retrieval_seconds = t1 - t0;
  trace.llm_seconds = t2 - t1;
  trace.total_seconds = t3 - t0;
  return {strategy, std::move(trace)};
}

namespace {

template <class F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

TurnInference run_turn(const DialogueHistory& h, const PipelineContext& ctx, const DesireLevel* gold_desire,
                       const BeliefState* gold_belief) {
  validate_inference_history(h);
  ctx.cfg.validate();
  TurnInference out;

  staged("first", [&] {
    if (ctx.kb.empty()) fail(ErrorCode::EmptyKnowledgeBase, "knowledge base is empty");
    ctx.kb.check_embedder(ctx.embedder);
    return 0;
  });

  const double s0 = ctx.clock();
  out.summary = staged("summary", [&] {
    if (!ctx.use_summary_query) return DialogueSummary{render_history(h)};
    return ctx.summarizer ? ctx.summarizer(h) : ctx.llm.generate_summary(h);
  });
  out.summary_seconds = ctx.clock() - s0;

  std::tie(out.desire, out.traces[0]) = staged("first", [&] { return first_think(h, out.summary, ctx); });
  const DesireLevel desire_in = gold_desire ? *gold_desire : out.desire;
  std::tie(out.belief, out.traces[1]) =
      staged("second", [&] { return second_think(h, desire_in, out.summary, ctx); });
  const BeliefState& belief_in = gold_belief ? *gold_belief : out.belief;
  std::tie(out.strategy, out.traces[2]) =
      staged("third", [&] { return third_think(h, out.summary, desire_in, belief_in, ctx); });
  return out;
}

json encode_hits(const std::vector<RetrievalHit>& hits) {
  json out = json::array();
  for (const auto& h : hits) out.push_back({{"id", h.experience_id}, {"score", h.score}, {"index", h.index}});
  return out;
}

}  // namespace

TurnInference infer_turn(const DialogueHistory& h, const PipelineContext& ctx) {
  return run_turn(h, ctx, nullptr, nullptr);
}

TurnInference infer_turn_gold_state(const DialogueHistory& h, DesireLevel gold_desire,
                                    const BeliefState& gold_belief, const PipelineContext& ctx) {
  return run_turn(h, ctx, &gold_desire, &gold_belief);
}

json encode(const StageTrace& t) {
  json j = {{"stage", to_string(t.stage)}, {"retrieved", encode_hits(t.retrieved)}};
  if (t.desire_exp) j["p_exp"] = encode(*t.desire_exp);
  if (t.desire_model) j["p_model"] = encode(*t.desire_model);
  if (t.desire_fused) j["fused"] = encode(*t.desire_fused);
  if (t.strategy_exp) j["p_exp"] = encode(*t.strategy_exp);
  if (t.strategy_model) j["p_model"] = encode(*t.strategy_model);
  if (t.strategy_fused) j["fused"] = encode(*t.strategy_fused);
  j["fallback_used"] = t.fallback_used;
  j["llm_seconds"] = t.llm_seconds;
  j["retrieval_seconds"] = t.retrieval_seconds;
  j["total_seconds"] = t.total_seconds;
  return j;
}

StageTrace decode_stage_trace(const json& j) {
  StageTrace t;
  try {
    t.stage = stage_from_string(require(j, "stage").get<std::string>());
    for (const auto& h : require(j, "retrieved")) {
      t.retrieved.push_back({h.at("id").get<std::string>(), h.at("score").get<double>(),
                             h.value("index", std::size_t{0})});
    }
    if (t.stage == Stage::First) {
      if (j.contains("p_exp")) t.desire_exp = decode_desire_distribution(j["p_exp"]);
      if (j.contains("p_model")) t.desire_model = decode_desire_distribution(j["p_model"]);
      if (j.contains("fused")) t.desire_fused = decode_desire_distribution(j["fused"]);
    } else if (t.stage == Stage::Third) {
      if (j.contains("p_exp")) t.strategy_exp = decode_strategy_distribution(j["p_exp"]);
      if (j.contains("p_model")) t.strategy_model = decode_strategy_distribution(j["p_model"]);
      if (j.contains("fused")) t.strategy_fused = decode_strategy_distribution(j["fused"]);
    }
    t.fallback_used = j.value("fallback_used", false);
    t.llm_seconds = j.value("llm_seconds", 0.0);
    t.retrieval_seconds = j.value("retrieval_seconds", 0.0);
    t.total_seconds = j.value("total_seconds", 0.0);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad stage trace: ") + e.what());
  }
  return t;
}

json encode(const TurnInference& t) {
  json stages = json::array();
  for (const auto& s : t.traces) stages.push_back(encode(s));
  return {{"summary", t.summary.text},
          {"desire", encode_desire(t.desire)},
          {"belief", encode(t.belief)},
          {"strategy", encode_strategy(t.strategy)},
          {"strategy_letter", std::string(1, letter_of(t.strategy))},
          {"summary_seconds", t.summary_seconds},
          {"stages", stages}};
}

TurnInference decode_turn_inference(const json& j) {
  TurnInference t;
  try {
    t.summary.text = require(j, "summary").get<std::string>();
    t.desire = decode_desire(require(j, "desire"));
    t.belief = decode_belief(require(j, "belief"));
    t.strategy = decode_strategy(require(j, "strategy"));
    t.summary_seconds = j.value("summary_seconds", 0.0);
    const auto& stages = require(j, "stages");
    if (stages.size() != 3) fail(ErrorCode::Parse, "a turn needs exactly three stage traces");
    for (std::size_t i = 0; i < 3; ++i) {
      t.traces[i] = decode_stage_trace(stages[i]);
      if (t.traces[i].stage != static_cast<Stage>(i)) fail(ErrorCode::Parse, "stage traces out of order");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad turn inference: ") + e.what());
  }
  return t;
}

}  // namespace ttbys
