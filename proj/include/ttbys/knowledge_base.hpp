#pragma once
// Store of persuasion experiences (history, summary, desire, belief,
// strategy) and the three retrieval modes used by the reasoning stages.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/dataset.hpp"
#include "ttbys/embedding.hpp"
#include "ttbys/serialization.hpp"

namespace ttbys {

struct Experience {
  std::string id;
  DialogueHistory history;
  DialogueSummary summary;
  DesireLevel desire = DesireLevel::hesitant();
  BeliefState belief;
  Strategy strategy = Strategy::ExpressionOfViews;
  EmbeddingVector summary_embedding;
  EmbeddingVector belief_embedding;

  friend bool operator==(const Experience&, const Experience&) = default;
};

/// Experience ids are "<dialogue id>/<utterance index>"; this recovers the
/// dialogue id.
std::string dialogue_id_of(const std::string& experience_id);
std::string make_experience_id(const std::string& dialogue_id, std::size_t utterance_index);

struct RetrievalHit {
  std::string experience_id;
  double score = 0.0;
  std::size_t index = 0;  // position in KnowledgeBase::experiences()

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

using Summarizer = std::function<DialogueSummary(const DialogueHistory&)>;

/// Offline summarizer: the last persuader and persuadee utterances, tagged
/// "x:" and "y:". Useful when no generative backend is available.
Summarizer extractive_summarizer();

/// One experience per persuadee utterance that is followed by a persuader
/// reply. Embeddings are left empty; build_knowledge_base fills them.
std::vector<Experience> decompose_dialogue(const AnnotatedDialogue& dialogue, const Summarizer& summarizer);

/// Immutable after construction; retrieval is safe from many threads.
class KnowledgeBase {
public:
  KnowledgeBase() = default;
  KnowledgeBase(std::vector<Experience> experiences, std::string embedder_fingerprint);

  const std::vector<Experience>& experiences() const noexcept { return experiences_; }
  std::size_t size() const noexcept { return experiences_.size(); }
  bool empty() const noexcept { return experiences_.empty(); }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  std::size_t dimension() const noexcept { return dimension_; }
  const Experience& at(std::size_t index) const { return experiences_.at(index); }
  const Experience* find(const std::string& id) const;

  /// Dialogue ids the experiences were taken from, sorted.
  std::vector<std::string> dialogue_ids() const;

  /// Top-n by cosine against the stored summary embeddings.
  std::vector<RetrievalHit> retrieve_by_summary(const EmbeddingVector& query, std::size_t n) const;
  /// As retrieve_by_summary over experiences with the given desire only.
  std::vector<RetrievalHit> retrieve_desire_filtered(const EmbeddingVector& query, DesireLevel desire,
                                                     std::size_t n) const;
  /// Equal-weight sum of summary and belief cosines.
  std::vector<RetrievalHit> retrieve_joint(const EmbeddingVector& summary_query,
                                           const EmbeddingVector& belief_query, std::size_t n) const;

  /// Text entry points; embed with `embedder` after checking it matches.
  std::vector<RetrievalHit> retrieve_by_summary(const Embedder& embedder, const DialogueSummary& query,
                                                std::size_t n) const;
  std::vector<RetrievalHit> retrieve_desire_filtered(const Embedder& embedder, const DialogueSummary& query,
                                                     DesireLevel desire, std::size_t n) const;
  std::vector<RetrievalHit> retrieve_joint(const Embedder& embedder, const DialogueSummary& summary_query,
                                           const BeliefState& belief_query, std::size_t n) const;

  /// Throws EmbedderMismatch unless `embedder` produced the stored vectors.
  void check_embedder(const Embedder& embedder) const;

  /// Switch the scoring kernels between the OpenMP and serial versions.
  void set_parallel(bool parallel) noexcept { parallel_ = parallel; }
  bool parallel() const noexcept { return parallel_; }

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.fingerprint_ == b.fingerprint_ && a.experiences_ == b.experiences_;
  }

private:
  std::vector<RetrievalHit> select_top(std::vector<std::size_t> rows, std::vector<double> scores,
                                       std::size_t n) const;

  std::vector<Experience> experiences_;
  std::string fingerprint_;
  std::size_t dimension_ = 0;
  std::vector<double> summary_matrix_;
  std::vector<double> belief_matrix_;
  std::vector<std::size_t> all_rows_;
  std::array<std::vector<std::size_t>, 3> rows_by_desire_;
  bool parallel_ = true;
};

struct KbBuildOptions {
  /// Keep a uniform sample of this many experiences (nested across sizes
  /// for a fixed seed).
  std::optional<std::size_t> sample_size;
  std::uint64_t seed = 0;
};

KnowledgeBase build_knowledge_base(const Corpus& corpus, const Summarizer& summarizer,
                                   const Embedder& embedder, const KbBuildOptions& options = {});

/// Embeds summaries and beliefs in place.
void embed_experiences(std::vector<Experience>& experiences, const Embedder& embedder);

/// Deterministic uniform subsample of `size` experiences. Samples for the
/// same seed are nested: a smaller size is a subset of a larger one.
KnowledgeBase subsample(const KnowledgeBase& kb, std::size_t size, std::uint64_t seed);

inline constexpr int kKbFormatVersion = 1;

json encode(const Experience& e);
Experience decode_experience(const json& j);

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
void write_kb(const KnowledgeBase& kb, std::ostream& out);

/// When the stored fingerprint differs from `embedder`'s, re-embeds if
/// `allow_reembed`, else throws EmbedderMismatch.
KnowledgeBase load_kb(const std::filesystem::path& path, const Embedder& embedder, bool allow_reembed = false);
KnowledgeBase read_kb(std::istream& in, const Embedder& embedder, bool allow_reembed = false);

}  // namespace ttbys
