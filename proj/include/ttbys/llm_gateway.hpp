#pragma once
// Uniform contract over generative backends: prompt rendering, first-token
// label log-probabilities, text generation and belief judging.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/prompts.hpp"
#include "ttbys/serialization.hpp"

namespace ttbys {

/// Log-probabilities of candidate single-character labels read off the
/// first generated token. Values are <= 0 and finite.
struct LabelLogprobs {
  std::map<char, double> entries;

  bool empty() const noexcept { return entries.empty(); }
  friend bool operator==(const LabelLogprobs&, const LabelLogprobs&) = default;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;

  friend bool operator==(const TokenLogprob&, const TokenLogprob&) = default;
};

struct LlmRequest {
  PromptKind kind = PromptKind::Summary;
  std::string prompt;
  /// history_key() of the dialogue the prompt is about; 0 when none.
  std::uint64_t history_key = 0;
  /// Structured context that scripted backends may match on
  /// (e.g. "strategy_letter" for agent responses).
  std::map<std::string, std::string> meta;
  bool want_logprobs = false;
  int max_tokens = 256;
};

struct LlmResponse {
  std::string text;
  /// Top alternatives for the first generated token, when requested.
  std::vector<TokenLogprob> first_token_top;
};

class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  virtual LlmResponse complete(const LlmRequest& request) const = 0;
  virtual std::string describe() const = 0;
};

struct BackendConfig {
  enum class Kind { Mock, Http };

  Kind kind = Kind::Mock;
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key;
  double temperature = 0.9;
  int top_logprobs = 10;
  std::chrono::milliseconds timeout{60'000};
  int max_in_flight = 4;
  std::filesystem::path mock_script;  // optional, mock only

  void validate() const;
  json to_json() const;  // without the api key
};

/// One scripted reply of the mock backend.
struct MockReply {
  std::string text;
  std::optional<std::vector<TokenLogprob>> logprobs;
  bool fail = false;  // raise BackendFailure instead of replying
};

/// Deterministic scripted backend. Lookup order for a request:
///   1. exact rendered prompt (by stable hash),
///   2. dialogue history key (plus optional meta constraints),
///   3. substring rules in insertion order,
///   4. the per-template fallback.
/// A pure function of (template, prompt, history key, meta, script).
class MockBackend final : public LlmBackend {
public:
  MockBackend();

  void script_prompt(PromptKind kind, const std::string& rendered_prompt, MockReply reply);
  void script_history(PromptKind kind, const DialogueHistory& history, MockReply reply,
                      std::map<std::string, std::string> meta = {});
  void script_contains(PromptKind kind, std::string needle, MockReply reply);
  void set_fallback(PromptKind kind, MockReply reply);

  /// Script file: {"entries": [{"template", one of "prompt"|"history"|"contains",
  /// "text"?, "logprobs"?, "meta"?, "fail"?}], "fallbacks": {...}}.
  void load_script(const json& script);
  static MockBackend from_file(const std::filesystem::path& path);

  LlmResponse complete(const LlmRequest& request) const override;
  std::string describe() const override { return "mock"; }

  static constexpr std::string_view kFallbackSummary = "x addresses y; y responds.";
  static constexpr std::string_view kFallbackBelief = "the persuadee is weighing the proposal.";
  static constexpr std::string_view kFallbackReplySentence = "Here is why this could work for you.";

private:
  struct HistoryRule {
    std::map<std::string, std::string> meta;
    MockReply reply;
  };
  struct ContainsRule {
    PromptKind kind;
    std::string needle;
    MockReply reply;
  };
  static std::uint64_t slot(PromptKind kind, std::uint64_t hash);

  std::unordered_map<std::uint64_t, MockReply> by_prompt_;
  std::unordered_map<std::uint64_t, std::vector<HistoryRule>> by_history_;
  std::vector<ContainsRule> contains_;
  std::map<PromptKind, MockReply> fallbacks_;
};

/// Chat-completions client; label calls request per-token top log-probs.
class HttpBackend final : public LlmBackend {
public:
  explicit HttpBackend(BackendConfig config);
  LlmResponse complete(const LlmRequest& request) const override;
  std::string describe() const override;

private:
  BackendConfig config_;
  mutable std::counting_semaphore<64> in_flight_;
};

std::shared_ptr<const LlmBackend> make_backend(const BackendConfig& config);

/// Sentence-split on '.' and ';', then polarity by keyword: a statement is
/// negative when it contains "not" or a word starting with uncertain,
/// unsure, concern, worried or doubt. Throws UnparseableBelief on an empty
/// result.
BeliefState parse_belief_line(const std::string& text);
Polarity classify_belief_polarity(const std::string& statement);

/// Texts joined as a sentence list, e.g. "a is good. unsure about b."
std::string belief_prose(const BeliefState& belief);

struct Preannotation {
  DesireLevel desire;
  BeliefState belief;
};

class LlmGateway {
public:
  explicit LlmGateway(std::shared_ptr<const LlmBackend> backend);

  const LlmBackend& backend() const { return *backend_; }

  DialogueSummary generate_summary(const DialogueHistory& history) const;
  LabelLogprobs desire_logprobs(const DialogueHistory& history) const;
  BeliefState generate_belief(const DialogueHistory& history, DesireLevel desire,
                              std::span<const Experience* const> exemplars) const;
  LabelLogprobs strategy_logprobs(const DialogueHistory& history, DesireLevel desire,
                                  const BeliefState& belief) const;
  std::string generate_agent_response(const std::string& task, const std::string& background,
                                      const DialogueHistory& history, const ToMState& state,
                                      Strategy strategy) const;
  /// Opening line of a session: the agent template with an empty dialogue.
  std::string generate_opener(const std::string& task, const std::string& background) const;
  double judge_belief(const BeliefState& ground_truth, const BeliefState& predicted) const;
  Preannotation preannotate(const DialogueHistory& history, const BeliefState& prior_negatives) const;

  /// Rendered prompts, exposed for scripting and inspection.
  static std::string render_summary_prompt(const DialogueHistory& history);
  static std::string render_desire_prompt(const DialogueHistory& history);
  static std::string render_belief_prompt(const DialogueHistory& history, DesireLevel desire,
                                          std::span<const Experience* const> exemplars);
  static std::string render_strategy_prompt(const DialogueHistory& history, DesireLevel desire,
                                            const BeliefState& belief);

private:
  LlmResponse call(LlmRequest request) const;
  LabelLogprobs extract_labels(const LlmResponse& response, std::string_view labels) const;

  std::shared_ptr<const LlmBackend> backend_;
};

/// Summarizer backed by the gateway's summary template.
Summarizer llm_summarizer(const LlmGateway& gateway);

/// Scores a predicted belief against the annotated one: 0, 0.5 or 1.
class BeliefJudge {
public:
  virtual ~BeliefJudge() = default;
  virtual double score(const BeliefState& ground_truth, const BeliefState& predicted) const = 0;
};

/// 1 when normalized texts match per polarity, 0.5 when the polarity
/// multisets match, otherwise 0.
class RuleJudge final : public BeliefJudge {
public:
  double score(const BeliefState& ground_truth, const BeliefState& predicted) const override;
};

class LlmJudge final : public BeliefJudge {
public:
  explicit LlmJudge(const LlmGateway& gateway) : gateway_(gateway) {}
  double score(const BeliefState& ground_truth, const BeliefState& predicted) const override {
    return gateway_.judge_belief(ground_truth, predicted);
  }

private:
  const LlmGateway& gateway_;
};

}  // namespace ttbys
