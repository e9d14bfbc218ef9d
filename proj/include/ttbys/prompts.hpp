#pragma once
// Prompt template catalog. Template texts live in prompts/*.txt and are
// compiled into the library; placeholders are written {{name}}.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttbys {

enum class PromptKind {
  Summary,
  Desire,
  Belief,
  Strategy,
  AgentResponse,
  BeliefJudge,
  PreannotateDesire,
  PreannotateBelief,
};

inline constexpr std::string_view kPromptCatalogVersion = "1";

std::span<const PromptKind> all_prompt_kinds();
std::string_view name_of(PromptKind kind);
PromptKind prompt_kind_from_string(std::string_view name);

struct PromptTemplate {
  PromptKind kind;
  std::string_view text;

  /// Placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
  /// Substitutes every placeholder in one pass. Throws InvalidArgument when
  /// a placeholder has no value or a value names an unknown placeholder.
  std::string render(const std::map<std::string, std::string>& values) const;
};

const PromptTemplate& prompt_template(PromptKind kind);

/// Raw asset text by file stem; defined in the generated catalog source.
std::string_view prompt_asset(std::string_view stem);

}  // namespace ttbys
