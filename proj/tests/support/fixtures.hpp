#pragma once
// Shared builders for unit and acceptance tests.

#include <filesystem>
#include <initializer_list>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/dataset.hpp"
#include "ttbys/embedding.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/llm_gateway.hpp"

namespace ttbys::testing {

/// Alternating roles, persuader first.
inline DialogueHistory history_of(std::initializer_list<const char*> texts) {
  DialogueHistory h;
  Role r = Role::Persuader;
  for (const char* t : texts) {
    h.utterances.push_back({r, t});
    r = r == Role::Persuader ? Role::Persuadee : Role::Persuader;
  }
  return h;
}

inline BeliefState belief_of(std::initializer_list<std::pair<Polarity, const char*>> items) {
  std::vector<BeliefStatement> s;
  for (const auto& [p, t] : items) s.push_back({p, t});
  return BeliefState(std::move(s));
}

inline BeliefState pos(const char* t) { return belief_of({{Polarity::Positive, t}}); }
inline BeliefState neg(const char* t) { return belief_of({{Polarity::Negative, t}}); }

inline Experience experience(std::string id, std::string summary, int desire, Strategy strategy,
                             BeliefState belief = pos("it is fine")) {
  Experience e;
  e.id = std::move(id);
  e.history = history_of({"hello", "hi"});
  e.summary = DialogueSummary{std::move(summary)};
  e.desire = DesireLevel::from_int(desire);
  e.belief = std::move(belief);
  e.strategy = strategy;
  return e;
}

inline KnowledgeBase kb_of(std::vector<Experience> exps, const Embedder& embedder) {
  embed_experiences(exps, embedder);
  return KnowledgeBase(std::move(exps), embedder.fingerprint());
}

/// KB whose vectors are given directly (summary, belief), dimension = size.
inline KnowledgeBase kb_with_vectors(std::vector<Experience> exps, const std::vector<std::vector<double>>& summary,
                                     const std::vector<std::vector<double>>& belief, std::string fingerprint = "fixed") {
  for (std::size_t i = 0; i < exps.size(); ++i) {
    exps[i].summary_embedding.values = summary[i];
    exps[i].belief_embedding.values = belief[i];
  }
  return KnowledgeBase(std::move(exps), std::move(fingerprint));
}

inline std::vector<TokenLogprob> uniform_desire_lp() { return {{"A", -1.0986}, {"B", -1.0986}, {"C", -1.0986}}; }

inline std::shared_ptr<MockBackend> mock() { return std::make_shared<MockBackend>(); }

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("ttbys-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// A labeled dialogue: utterances alternate persuader/persuadee; persuadee
/// turns carry (desire, belief), persuader turns a strategy.
struct Turn {
  const char* persuader;
  Strategy strategy;
  const char* persuadee;
  int desire;
  BeliefState belief;
};

inline AnnotatedDialogue dialogue_of(std::string id, const std::vector<Turn>& turns, const char* closing,
                                     Strategy closing_strategy) {
  AnnotatedDialogue d;
  d.id = std::move(id);
  d.background = "x wants y to try something";
  for (const auto& t : turns) {
    d.utterances.utterances.push_back({Role::Persuader, t.persuader});
    d.labels.push_back(UtteranceLabels{std::nullopt, std::nullopt, t.strategy});
    d.utterances.utterances.push_back({Role::Persuadee, t.persuadee});
    d.labels.push_back(UtteranceLabels{DesireLevel::from_int(t.desire), t.belief, std::nullopt});
  }
  d.utterances.utterances.push_back({Role::Persuader, closing});
  d.labels.push_back(UtteranceLabels{std::nullopt, std::nullopt, closing_strategy});
  return d;
}

}  // namespace ttbys::testing
