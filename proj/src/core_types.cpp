#include "ttbys/core_types.hpp"

#include <algorithm>
#include <cctype>

#include "ttbys/error.hpp"

namespace ttbys {

std::string_view to_string(Role role) {
  return role == Role::Persuader ? "persuader" : "persuadee";
}

Role role_from_string(std::string_view text) {
  const std::string lowered = to_lower(text);
  if (lowered == "persuader") return Role::Persuader;
  if (lowered == "persuadee") return Role::Persuadee;
  fail(ErrorCode::UnknownLabel, "unknown role '" + std::string(text) + "'");
}

const DialogueHistory& validate_history(const DialogueHistory& history) {
  if (history.empty()) fail(ErrorCode::EmptyHistory, "dialogue history is empty");
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& u = history.utterances[i];
    if (trim(u.text).empty()) {
      fail(ErrorCode::EmptyUtterance, "utterance " + std::to_string(i) + " is blank");
    }
    if (i > 0 && history.utterances[i - 1].role == u.role) {
      fail(ErrorCode::NonAlternatingRoles,
           "utterances " + std::to_string(i - 1) + " and " + std::to_string(i) +
               " share role " + std::string(to_string(u.role)));
    }
  }
  return history;
}

const DialogueHistory& validate_inference_history(const DialogueHistory& history) {
  validate_history(history);
  if (history.back().role != Role::Persuadee) {
    fail(ErrorCode::InvalidArgument, "inference history must end with a persuadee utterance");
  }
  return history;
}

std::string render_history(const DialogueHistory& history) {
  std::string out;
  for (const auto& u : history.utterances) {
    if (!out.empty()) out += '\n';
    out += to_string(u.role);
    out += ": ";
    out += u.text;
  }
  return out;
}

std::uint64_t history_key(const DialogueHistory& history) {
  return fnv1a64(render_history(history));
}

DesireLevel DesireLevel::from_int(int value) {
  if (value < -1 || value > 1) {
    fail(ErrorCode::UnknownLabel, "desire must be -1, 0 or 1, got " + std::to_string(value));
  }
  return DesireLevel(value);
}

std::span<const DesireLevel> all_desires() {
  static constexpr std::array<DesireLevel, 3> kDesires = {
      DesireLevel::unwilling(), DesireLevel::hesitant(), DesireLevel::willing()};
  return kDesires;
}

DesireLevel desire_from_letter(char letter) {
  switch (letter) {
    case 'A': return DesireLevel::unwilling();
    case 'B': return DesireLevel::hesitant();
    case 'C': return DesireLevel::willing();
    default:
      fail(ErrorCode::UnknownLabel, std::string("desire letter '") + letter + "' not in {A,B,C}");
  }
}

char letter_of(DesireLevel desire) { return static_cast<char>('B' + desire.value()); }

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::Positive ? "positive" : "negative";
}

Polarity polarity_from_string(std::string_view text) {
  const std::string lowered = to_lower(text);
  if (lowered == "positive") return Polarity::Positive;
  if (lowered == "negative") return Polarity::Negative;
  fail(ErrorCode::UnknownLabel, "unknown polarity '" + std::string(text) + "'");
}

BeliefState::BeliefState(std::vector<BeliefStatement> statements) {
  statements_.reserve(statements.size());
  for (auto& s : statements) {
    if (trim(s.text).empty()) fail(ErrorCode::InvalidArgument, "belief statement text is empty");
    if (std::find(statements_.begin(), statements_.end(), s) == statements_.end()) {
      statements_.push_back(std::move(s));
    }
  }
}

std::string BeliefState::text() const {
  std::string out;
  for (const auto& s : statements_) {
    if (!out.empty()) out += "; ";
    out += to_string(s.polarity);
    out += ": ";
    out += s.text;
  }
  return out;
}

std::string_view to_string(StrategyCategory category) {
  switch (category) {
    case StrategyCategory::SocioEmotional: return "socio-emotional";
    case StrategyCategory::Cognitive: return "cognitive";
    case StrategyCategory::Interactive: return "interactive";
  }
  return "";
}

namespace {

struct StrategyInfo {
  Strategy id;
  std::string_view name;
  char letter;
  StrategyCategory category;
  std::string_view definition;
};

constexpr std::array<StrategyInfo, kStrategyCount> kStrategies = {{
    {Strategy::AffirmationAndReassurance, "Affirmation and Reassurance", 'A',
     StrategyCategory::SocioEmotional,
     "validate the persuadee's feelings, acknowledge difficulties, or encourage their sense of "
     "capability"},
    {Strategy::ReflectionOfFeelings, "Reflection of Feelings", 'R', StrategyCategory::SocioEmotional,
     "mirror or paraphrase the persuadee's emotional state to show understanding"},
    {Strategy::PersonalStory, "Personal Story", 'P', StrategyCategory::SocioEmotional,
     "share a personal experience or anecdote to build emotional resonance"},
    {Strategy::ExpressionOfViews, "Expression of Views", 'V', StrategyCategory::Cognitive,
     "state a personal standpoint or evaluation, possibly without supporting reasons"},
    {Strategy::EnhancementOfViews, "Enhancement of Views", 'E', StrategyCategory::Cognitive,
     "reinforce or intensify a stance already expressed through emphasis or elaboration"},
    {Strategy::LogicalAppeal, "Logical Appeal", 'L', StrategyCategory::Cognitive,
     "argue through reasoning, cause and effect, or an explicit argument structure"},
    {Strategy::GivingExamples, "Giving Examples", 'G', StrategyCategory::Cognitive,
     "offer a concrete instance or case that supports the point"},
    {Strategy::SupplyingInformation, "Supplying Information", 'I', StrategyCategory::Cognitive,
     "provide facts, general knowledge, or practical advice"},
    {Strategy::TaskInquiry, "Task Inquiry", 'T', StrategyCategory::Interactive,
     "ask an open or exploratory question about the persuadee's concerns or motivations"},
}};

constexpr std::array<Strategy, kStrategyCount> kStrategyOrder = {
    Strategy::AffirmationAndReassurance, Strategy::ReflectionOfFeelings,
    Strategy::PersonalStory,             Strategy::ExpressionOfViews,
    Strategy::EnhancementOfViews,        Strategy::LogicalAppeal,
    Strategy::GivingExamples,            Strategy::SupplyingInformation,
    Strategy::TaskInquiry,
};

const StrategyInfo& info(Strategy s) { return kStrategies[static_cast<std::size_t>(s)]; }

}  // namespace

std::span<const Strategy> all_strategies() { return kStrategyOrder; }
std::string_view name_of(Strategy strategy) { return info(strategy).name; }
char letter_of(Strategy strategy) { return info(strategy).letter; }
StrategyCategory category_of(Strategy strategy) { return info(strategy).category; }
std::string_view definition_of(Strategy strategy) { return info(strategy).definition; }

Strategy strategy_from_letter(char letter) {
  for (const auto& s : kStrategies) {
    if (s.letter == letter) return s.id;
  }
  fail(ErrorCode::UnknownLabel, std::string("strategy letter '") + letter + "' is not one of VLETPARIG");
}

Strategy strategy_from_string(std::string_view text) {
  const std::string trimmed = trim(text);
  if (trimmed.size() == 1) return strategy_from_letter(trimmed[0]);
  const std::string lowered = to_lower(trimmed);
  for (const auto& s : kStrategies) {
    if (to_lower(s.name) == lowered) return s.id;
  }
  fail(ErrorCode::UnknownLabel, "unknown strategy '" + std::string(text) + "'");
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace ttbys
