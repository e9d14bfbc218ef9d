#pragma once
// Static evaluation: accuracies over labeled persuadee turns, belief
// judging, blending sweeps, KB-size and summary ablations, runtime tables.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/dataset.hpp"
#include "ttbys/error.hpp"
#include "ttbys/fusion.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/llm_gateway.hpp"
#include "ttbys/pipeline.hpp"

namespace ttbys {

/// 100 * matches / n.
template <class T>
double accuracy(std::span<const T> predictions, std::span<const T> gold) {
  if (predictions.size() != gold.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                        std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) fail(ErrorCode::Empty, "nothing to score");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predictions[i] == gold[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(gold.size());
}

/// 100 * mean judge score. Judge errors are rethrown naming the instance.
double belief_score(std::span<const BeliefState> predictions, std::span<const BeliefState> gold,
                    const BeliefJudge& judge);

/// A persuadee turn with gold labels and the strategy of the reply to it.
struct TurnCase {
  std::string dialogue_id;
  std::size_t utterance_index = 0;
  DialogueHistory history;  // through the persuadee utterance
  DesireLevel gold_desire = DesireLevel::hesitant();
  BeliefState gold_belief;
  Strategy gold_strategy = Strategy::ExpressionOfViews;
};

/// Same selection rule as KB decomposition: labeled persuadee turns that
/// are followed by a labeled persuader reply.
std::vector<TurnCase> labeled_turns(const Corpus& split);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std over runs

  friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

MeanStd mean_std(std::span<const double> values);

enum class EvalMode {
  Pipelined,  // predicted desire/belief feed the later stages
  GoldState,  // gold desire/belief feed the later stages
};

std::string_view to_string(EvalMode mode);
EvalMode eval_mode_from_string(std::string_view name);

struct EvalOptions {
  BlendConfig cfg;
  std::size_t n_runs = 3;
  EvalMode mode = EvalMode::Pipelined;
  bool use_summary_query = true;
  /// Evaluate turns concurrently (OpenMP). Results do not depend on it.
  bool parallel = true;
  /// Builds the clock for each turn; steady clock by default.
  std::function<Clock()> clock_factory = [] { return steady_clock(); };
  /// Overrides the gateway summarizer when set.
  Summarizer summarizer;
};

struct EvalReport {
  MeanStd desire_accuracy;
  MeanStd belief_accuracy;
  MeanStd strategy_accuracy;
  std::size_t n_runs = 0;
  std::size_t n_turns = 0;
  json config;
  /// Per run, one inference per turn in labeled_turns order.
  std::vector<std::vector<TurnInference>> runs;
};

/// Throws SplitOverlap naming the shared dialogue ids when any test
/// dialogue contributed experiences to `kb`.
void check_split(const Corpus& test, const KnowledgeBase& kb);

EvalReport run_static_eval(const Corpus& test, const KnowledgeBase& kb, const Embedder& embedder,
                           const LlmGateway& llm, const BeliefJudge& judge, const EvalOptions& options);

/// "lo:hi:step" inclusive; e.g. "0:1:0.1" gives 11 points.
std::vector<double> parse_grid(std::string_view spec);
std::vector<double> default_grid();

struct SweepPoint {
  double value = 0.0;
  EvalReport report;
};

struct SweepReport {
  std::string parameter;  // "alpha" or "beta"
  std::string backbone;
  std::vector<SweepPoint> points;
};

SweepReport sweep_blend(const std::string& parameter, std::span<const double> grid, const Corpus& test,
                        const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm,
                        const BeliefJudge& judge, const EvalOptions& options);

struct KbSizePoint {
  std::size_t size = 0;
  EvalReport report;
};

std::vector<KbSizePoint> ablate_kb_size(std::span<const std::size_t> sizes, std::uint64_t seed, const Corpus& test,
                                        const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm,
                                        const BeliefJudge& judge, const EvalOptions& options);

struct SummaryAblation {
  EvalReport with_summary;
  EvalReport without_summary;
};

/// The "without" arm embeds raw rendered histories on both the query and
/// the KB side in place of summaries.
SummaryAblation ablate_summary(const Corpus& test, const KnowledgeBase& kb, const Embedder& embedder,
                               const LlmGateway& llm, const BeliefJudge& judge, const EvalOptions& options);

/// KB copy whose summary embeddings are embeddings of the rendered history.
KnowledgeBase with_history_embeddings(const KnowledgeBase& kb, const Embedder& embedder);

struct RuntimeRow {
  Stage stage = Stage::First;
  double total_s = 0.0;
  double llm_s = 0.0;
  double retrieval_s = 0.0;
  double avg_per_turn_s = 0.0;
};

struct RuntimeReport {
  std::size_t n_turns = 0;
  std::array<RuntimeRow, 3> rows;
};

RuntimeReport runtime_report(std::span<const TurnInference> turns);

json encode(const MeanStd& m);
json encode(const EvalReport& r, bool include_traces = false);
json encode(const SweepReport& r);
json encode(const RuntimeReport& r);

std::string format_report(const EvalReport& r);
std::string format_sweep(const SweepReport& r);
std::string format_runtime(const RuntimeReport& r);

}  // namespace ttbys
