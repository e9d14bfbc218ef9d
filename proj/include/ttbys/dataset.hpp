#pragma once
// Annotated persuasion corpus: file format, validation, the sentence-level
// desire labeling rules, corpus statistics and a synthetic generator.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/serialization.hpp"

namespace ttbys {

struct UtteranceLabels {
  std::optional<DesireLevel> desire;   // persuadee turns only
  std::optional<BeliefState> belief;   // persuadee turns only
  std::optional<Strategy> strategy;    // persuader turns only

  friend bool operator==(const UtteranceLabels&, const UtteranceLabels&) = default;
};

struct AnnotatedDialogue {
  std::string id;
  std::string background;
  DialogueHistory utterances;
  /// Parallel to utterances.
  std::vector<UtteranceLabels> labels;
  /// Optional speaker names parallel to utterances; empty when not recorded.
  std::vector<std::string> speakers;

  friend bool operator==(const AnnotatedDialogue&, const AnnotatedDialogue&) = default;
};

using Corpus = std::vector<AnnotatedDialogue>;

inline constexpr int kCorpusFormatVersion = 1;

/// Checks history invariants, label/role alignment and the two-party rule.
void validate_dialogue(const AnnotatedDialogue& dialogue);

json encode(const AnnotatedDialogue& dialogue);
AnnotatedDialogue decode_dialogue(const json& j);

/// One dialogue object per line. Blank lines are skipped; errors carry the
/// 1-based line number.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// ---------------------------------------------------------------------------
// Annotation rules

enum class SentenceKind { Positive, Negative, Neutral };

struct SentencePolarity {
  std::string text;
  SentenceKind polarity = SentenceKind::Neutral;
  /// Only meaningful for negatives carried from an earlier turn.
  bool resolved = false;

  friend bool operator==(const SentencePolarity&, const SentencePolarity&) = default;
};

/// Only positive -> 1, mixed -> 0, only negative -> -1. Neutral sentences
/// are ignored; a list with nothing else throws AllNeutral.
DesireLevel label_desire(const std::vector<SentencePolarity>& sentences);

/// Non-neutral sentences of `current` followed by the unresolved entries of
/// `prev_negatives`.
std::vector<SentencePolarity> carry_over(const std::vector<SentencePolarity>& prev_negatives,
                                         const std::vector<SentencePolarity>& current);

/// Belief statements recorded for a labeled sentence list.
BeliefState beliefs_from_sentences(const std::vector<SentencePolarity>& sentences);

// ---------------------------------------------------------------------------
// Statistics

inline constexpr std::size_t kProgressPoints = 6;

/// Progress point (0-based) of item k among `count` items in a dialogue.
std::size_t progress_bucket(std::size_t k, std::size_t count);

struct CorpusStats {
  std::size_t dialogues = 0;
  std::size_t utterances = 0;
  double utterances_per_dialogue = 0.0;
  double exchanges_per_dialogue = 0.0;
  double persuader_utterance_tokens = 0.0;
  double persuadee_utterance_tokens = 0.0;
  double mean_desire = 0.0;
  double beliefs_per_turn = 0.0;
  std::array<std::size_t, kStrategyCount> strategy_counts{};
  std::array<double, kStrategyCount> strategy_percentages{};
  /// [point][strategy] share of persuader turns at that point, in percent.
  std::array<std::array<double, kStrategyCount>, kProgressPoints> strategy_progress{};
  /// Mean desire of persuadee turns falling in each progress point.
  std::array<double, kProgressPoints> desire_trajectory{};
  std::array<double, kProgressPoints> positive_belief_share{};
  std::array<double, kProgressPoints> negative_belief_share{};
};

CorpusStats compute_stats(const Corpus& corpus);

/// Overall and strategy tables with the reference row labels, for diffing.
std::string format_stats(const CorpusStats& stats);
json encode(const CorpusStats& stats);

// ---------------------------------------------------------------------------
// Synthetic corpora

enum class DesireProfile {
  TrendPositive,   // opens resistant, warms up over the dialogue
  AlwaysWilling,
  AlwaysUnwilling,
};

DesireProfile desire_profile_from_string(std::string_view name);

struct SyntheticOptions {
  std::size_t min_exchanges = 2;
  std::size_t max_exchanges = 6;
  DesireProfile profile = DesireProfile::TrendPositive;
  std::string id_prefix = "syn";
};

/// Deterministic for a fixed seed on every platform (uses raw engine
/// output, never std distributions).
Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_dialogues,
                                 const SyntheticOptions& options = {});

/// Portable deterministic RNG helpers shared by the generators and samplers.
class SplitRng {
public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double unit();

private:
  std::uint64_t state_;
};

}  // namespace ttbys
