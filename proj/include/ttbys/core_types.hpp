#pragma once
// Domain vocabulary: roles, utterances, mental-state labels and the
// nine-technique strategy taxonomy.

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttbys {

enum class Role { Persuader, Persuadee };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Utterance {
  Role role;
  std::string text;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// Ordered persuader/persuadee exchange. Invariants are checked by
/// validate_history rather than on construction so that partially built
/// transcripts can be assembled freely.
struct DialogueHistory {
  std::vector<Utterance> utterances;

  bool empty() const noexcept { return utterances.empty(); }
  std::size_t size() const noexcept { return utterances.size(); }
  const Utterance& back() const { return utterances.back(); }

  friend bool operator==(const DialogueHistory&, const DialogueHistory&) = default;
};

/// Checks non-empty, non-blank utterances and strict role alternation.
/// Returns the input unchanged on success.
const DialogueHistory& validate_history(const DialogueHistory& history);

/// As validate_history, plus the final utterance must come from the
/// persuadee (it is the utterance being reasoned about).
const DialogueHistory& validate_inference_history(const DialogueHistory& history);

/// "persuader: ...\npersuadee: ..." rendering used inside prompts.
std::string render_history(const DialogueHistory& history);

/// Stable 64-bit key of a history, independent of platform and run.
std::uint64_t history_key(const DialogueHistory& history);

/// Persuadee attitude toward the persuasion target: -1, 0 or 1.
class DesireLevel {
public:
  static DesireLevel from_int(int value);
  static constexpr DesireLevel unwilling() { return DesireLevel(-1); }
  static constexpr DesireLevel hesitant() { return DesireLevel(0); }
  static constexpr DesireLevel willing() { return DesireLevel(1); }

  constexpr int value() const noexcept { return value_; }

  friend constexpr auto operator<=>(DesireLevel, DesireLevel) = default;

private:
  constexpr explicit DesireLevel(int v) : value_(v) {}
  int value_;
};

/// Canonical order (-1, 0, 1).
std::span<const DesireLevel> all_desires();

/// A/B/C of the desire prompt.
DesireLevel desire_from_letter(char letter);
char letter_of(DesireLevel desire);

enum class Polarity { Positive, Negative };

std::string_view to_string(Polarity polarity);
Polarity polarity_from_string(std::string_view text);

struct BeliefStatement {
  Polarity polarity;
  std::string text;

  friend bool operator==(const BeliefStatement&, const BeliefStatement&) = default;
};

/// Set of belief statements held at one turn; duplicates are dropped on
/// construction, first occurrence wins.
class BeliefState {
public:
  BeliefState() = default;
  explicit BeliefState(std::vector<BeliefStatement> statements);

  const std::vector<BeliefStatement>& statements() const noexcept { return statements_; }
  bool empty() const noexcept { return statements_.empty(); }
  std::size_t size() const noexcept { return statements_.size(); }

  /// "positive: <t>; negative: <t>" in stored order. This is the string
  /// embedded for belief retrieval.
  std::string text() const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

private:
  std::vector<BeliefStatement> statements_;
};

enum class StrategyCategory { SocioEmotional, Cognitive, Interactive };

std::string_view to_string(StrategyCategory category);

/// The nine techniques, declared in canonical (taxonomy table) order.
enum class Strategy : std::uint8_t {
  AffirmationAndReassurance,
  ReflectionOfFeelings,
  PersonalStory,
  ExpressionOfViews,
  EnhancementOfViews,
  LogicalAppeal,
  GivingExamples,
  SupplyingInformation,
  TaskInquiry,
};

inline constexpr std::size_t kStrategyCount = 9;

std::span<const Strategy> all_strategies();
std::string_view name_of(Strategy strategy);
char letter_of(Strategy strategy);
StrategyCategory category_of(Strategy strategy);
/// Short working definition used in prompts.
std::string_view definition_of(Strategy strategy);

Strategy strategy_from_letter(char letter);
/// Accepts the full name (case-insensitive) or a single letter.
Strategy strategy_from_string(std::string_view text);

struct DialogueSummary {
  std::string text;

  friend bool operator==(const DialogueSummary&, const DialogueSummary&) = default;
};

struct ToMState {
  DialogueSummary summary;
  DesireLevel desire = DesireLevel::hesitant();
  BeliefState belief;

  friend bool operator==(const ToMState&, const ToMState&) = default;
};

/// FNV-1a over the bytes of `text`, seeded with `basis`.
std::uint64_t fnv1a64(std::string_view text,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace ttbys
