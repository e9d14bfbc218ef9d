#include "ttbys/prompts.hpp"

#include <algorithm>
#include <array>

#include "ttbys/core_types.hpp"
#include "ttbys/error.hpp"

namespace ttbys {

namespace {

constexpr std::array<PromptKind, 8> kKinds = {
    PromptKind::Summary,       PromptKind::Desire,      PromptKind::Belief,
    PromptKind::Strategy,      PromptKind::AgentResponse, PromptKind::BeliefJudge,
    PromptKind::PreannotateDesire, PromptKind::PreannotateBelief,
};

}  // namespace

std::span<const PromptKind> all_prompt_kinds() { return kKinds; }

std::string_view name_of(PromptKind kind) {
  switch (kind) {
    case PromptKind::Summary: return "summary";
    case PromptKind::Desire: return "desire";
    case PromptKind::Belief: return "belief";
    case PromptKind::Strategy: return "strategy";
    case PromptKind::AgentResponse: return "agent_response";
    case PromptKind::BeliefJudge: return "belief_judge";
    case PromptKind::PreannotateDesire: return "preannotate_desire";
    case PromptKind::PreannotateBelief: return "preannotate_belief";
  }
  return "";
}

PromptKind prompt_kind_from_string(std::string_view name) {
  for (PromptKind k : kKinds) {
    if (name_of(k) == name) return k;
  }
  fail(ErrorCode::UnknownLabel, "unknown prompt template '" + std::string(name) + "'");
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto end = text.find("}}", pos + 2);
    if (end == std::string_view::npos) break;
    std::string name(text.substr(pos + 2, end - pos - 2));
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
    pos = end + 2;
  }
  return names;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  const auto names = placeholders();
  for (const auto& [key, _] : values) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      fail(ErrorCode::InvalidArgument,
           "template '" + std::string(name_of(kind)) + "' has no placeholder '" + key + "'");
    }
  }
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    const std::string name(text.substr(open + 2, close - open - 2));
    const auto it = values.find(name);
    if (it == values.end()) {
      fail(ErrorCode::InvalidArgument,
           "template '" + std::string(name_of(kind)) + "' is missing a value for '" + name + "'");
    }
    out.append(text.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 2;
  }
  out.append(text.substr(pos));
  // Assets end with a newline; rendered prompts do not.
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  if (trim(out).empty()) fail(ErrorCode::InvalidArgument, "rendered prompt is empty");
  return out;
}

const PromptTemplate& prompt_template(PromptKind kind) {
  static const std::array<PromptTemplate, 8> kTemplates = [] {
    std::array<PromptTemplate, 8> t{};
    for (std::size_t i = 0; i < kKinds.size(); ++i) {
      t[i] = PromptTemplate{kKinds[i], prompt_asset(name_of(kKinds[i]))};
    }
    return t;
  }();
  return kTemplates[static_cast<std::size_t>(kind)];
}

}  // namespace ttbys
