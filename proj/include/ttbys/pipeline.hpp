#pragma once
// One turn of reverse mental-state inference: summary, then desire
// (first think), belief (second think) and strategy (third think).

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/embedding.hpp"
#include "ttbys/fusion.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/llm_gateway.hpp"

namespace ttbys {

/// Monotonic seconds. Injected so tests can make timings deterministic.
using Clock = std::function<double()>;

Clock steady_clock();
/// Returns 0, step, 2*step, ... on successive calls. Not thread-safe;
/// meant for one pipeline at a time.
Clock stepping_clock(double step);

enum class Stage { First, Second, Third };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

struct StageTrace {
  Stage stage = Stage::First;
  std::vector<RetrievalHit> retrieved;
  // First think fills the desire distributions, third think the strategy
  // ones; second think fills none.
  std::optional<DesireDistribution> desire_exp, desire_model, desire_fused;
  std::optional<StrategyDistribution> strategy_exp, strategy_model, strategy_fused;
  bool fallback_used = false;
  double llm_seconds = 0.0;
  double retrieval_seconds = 0.0;
  double total_seconds = 0.0;

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct TurnInference {
  DialogueSummary summary;
  DesireLevel desire = DesireLevel::hesitant();
  BeliefState belief;
  Strategy strategy = Strategy::ExpressionOfViews;
  std::array<StageTrace, 3> traces;
  double summary_seconds = 0.0;

  ToMState state() const { return {summary, desire, belief}; }
  friend bool operator==(const TurnInference&, const TurnInference&) = default;
};

/// Everything a turn needs besides the history. The KB, embedder and
/// gateway are borrowed and must outlive the context.
struct PipelineContext {
  const KnowledgeBase& kb;
  const Embedder& embedder;
  const LlmGateway& llm;
  BlendConfig cfg;
  Clock clock = steady_clock();
  /// When false, retrieval queries use the raw rendered history in place
  /// of the generated summary, and no summary is generated.
  bool use_summary_query = true;
  /// Replaces the gateway's summary call when set.
  Summarizer summarizer;
};

std::pair<DesireLevel, StageTrace> first_think(const DialogueHistory& h, const DialogueSummary& summary,
                                                const PipelineContext& ctx);
std::pair<BeliefState, StageTrace> second_think(const DialogueHistory& h, DesireLevel desire,
                                                const DialogueSummary& summary, const PipelineContext& ctx);
std::pair<Strategy, StageTrace> third_think(const DialogueHistory& h, const DialogueSummary& summary,
                                            DesireLevel desire, const BeliefState& belief,
                                            const PipelineContext& ctx);

/// Errors are rethrown with the failing stage ("summary", "first",
/// "second", "third") attached.
TurnInference infer_turn(const DialogueHistory& h, const PipelineContext& ctx);

/// Runs the thinks with a caller-supplied desire and belief feeding the
/// later stages (the gold-state evaluation mode). The returned desire and
/// belief are still the predicted ones.
TurnInference infer_turn_gold_state(const DialogueHistory& h, DesireLevel gold_desire,
                                    const BeliefState& gold_belief, const PipelineContext& ctx);

json encode(const StageTrace& t);
StageTrace decode_stage_trace(const json& j);
json encode(const TurnInference& t);
TurnInference decode_turn_inference(const json& j);

}  // namespace ttbys
