#include "ttbys/knowledge_base.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "ttbys/error.hpp"
#include "ttbys/retrieval_kernels.hpp"

namespace ttbys {

std::string make_experience_id(const std::string& dialogue_id, std::size_t utterance_index) {
  std::ostringstream out;
  out << dialogue_id << '/' << std::setw(3) << std::setfill('0') << utterance_index;
  return out.str();
}

std::string dialogue_id_of(const std::string& experience_id) {
  const auto slash = experience_id.rfind('/');
  return slash == std::string::npos ? experience_id : experience_id.substr(0, slash);
}

Summarizer extractive_summarizer() {
  return [](const DialogueHistory& h) {
    std::string x, y;
    for (const auto& u : h.utterances) (u.role == Role::Persuader ? x : y) = u.text;
    std::string text;
    if (!x.empty()) text += "x: " + x;
    if (!y.empty()) text += std::string(text.empty() ? "" : " ") + "y: " + y;
    return DialogueSummary{text};
  };
}

std::vector<Experience> decompose_dialogue(const AnnotatedDialogue& d, const Summarizer& summarizer) {
  validate_dialogue(d);
  std::vector<Experience> out;
  const auto& us = d.utterances.utterances;
  for (std::size_t t = 0; t + 1 < us.size(); ++t) {
    if (us[t].role != Role::Persuadee) continue;
    const auto& labels = d.labels[t];
    const auto& reply = d.labels[t + 1];
    if (!labels.desire || !labels.belief) {
      fail(ErrorCode::MissingLabel,
           "dialogue " + d.id + ": persuadee utterance " + std::to_string(t) + " lacks desire/belief");
    }
    if (!reply.strategy) {
      fail(ErrorCode::MissingLabel,
           "dialogue " + d.id + ": persuader reply " + std::to_string(t + 1) + " lacks a strategy");
    }
    Experience e;
    e.id = make_experience_id(d.id, t);
    e.history.utterances.assign(us.begin(), us.begin() + static_cast<std::ptrdiff_t>(t) + 1);
    try {
      e.summary = summarizer(e.history);
    } catch (const std::exception& ex) {
      fail(ErrorCode::SummarizerFailure, "summarizing " + e.id + ": " + ex.what());
    }
    if (trim(e.summary.text).empty()) fail(ErrorCode::SummarizerFailure, "empty summary for " + e.id);
    e.desire = *labels.desire;
    e.belief = *labels.belief;
    e.strategy = *reply.strategy;
    out.push_back(std::move(e));
  }
  return out;
}

KnowledgeBase::KnowledgeBase(std::vector<Experience> experiences, std::string embedder_fingerprint)
    : experiences_(std::move(experiences)), fingerprint_(std::move(embedder_fingerprint)) {
  std::set<std::string> ids;
  for (const auto& e : experiences_) {
    if (e.id.empty()) fail(ErrorCode::InvalidArgument, "experience with empty id");
    if (!ids.insert(e.id).second) fail(ErrorCode::InvalidArgument, "duplicate experience id " + e.id);
  }
  if (experiences_.empty()) return;
  dimension_ = experiences_.front().summary_embedding.dimension();
  if (dimension_ == 0) fail(ErrorCode::InvalidArgument, "experiences have not been embedded");
  summary_matrix_.reserve(experiences_.size() * dimension_);
  belief_matrix_.reserve(experiences_.size() * dimension_);
  for (std::size_t i = 0; i < experiences_.size(); ++i) {
    const auto& e = experiences_[i];
    if (e.summary_embedding.dimension() != dimension_ || e.belief_embedding.dimension() != dimension_) {
      fail(ErrorCode::DimensionMismatch, "experience " + e.id + " has a different embedding dimension");
    }
    summary_matrix_.insert(summary_matrix_.end(), e.summary_embedding.values.begin(),
                           e.summary_embedding.values.end());
    belief_matrix_.insert(belief_matrix_.end(), e.belief_embedding.values.begin(),
                          e.belief_embedding.values.end());
    all_rows_.push_back(i);
    rows_by_desire_[static_cast<std::size_t>(e.desire.value() + 1)].push_back(i);
  }
}

const Experience* KnowledgeBase::find(const std::string& id) const {
  for (const auto& e : experiences_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::vector<std::string> KnowledgeBase::dialogue_ids() const {
  std::set<std::string> ids;
  for (const auto& e : experiences_) ids.insert(dialogue_id_of(e.id));
  return {ids.begin(), ids.end()};
}

void KnowledgeBase::check_embedder(const Embedder& embedder) const {
  if (embedder.fingerprint() != fingerprint_) {
    fail(ErrorCode::EmbedderMismatch,
         "knowledge base was embedded with '" + fingerprint_ + "', active embedder is '" +
             embedder.fingerprint() + "'");
  }
}

namespace {

void check_query(const KnowledgeBase& kb, std::size_t n) {
  if (kb.empty()) fail(ErrorCode::EmptyKnowledgeBase, "knowledge base has no experiences");
  if (n == 0) fail(ErrorCode::InvalidArgument, "retrieval size n must be >= 1");
}

}  // namespace

std::vector<RetrievalHit> KnowledgeBase::select_top(std::vector<std::size_t> rows, std::vector<double> scores,
                                                    std::size_t n) const {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return experiences_[rows[a]].id < experiences_[rows[b]].id;
                    });
  std::vector<RetrievalHit> hits;
  hits.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t row = rows[order[i]];
    hits.push_back({experiences_[row].id, scores[order[i]], row});
  }
  return hits;
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_by_summary(const EmbeddingVector& query, std::size_t n) const {
  check_query(*this, n);
  std::vector<double> scores(all_rows_.size());
  const kernels::MatrixView m{summary_matrix_, dimension_};
  if (parallel_) {
    kernels::cosine_scores_parallel(m, query.values, all_rows_, scores);
  } else {
    kernels::cosine_scores_serial(m, query.values, all_rows_, scores);
  }
  return select_top(all_rows_, std::move(scores), n);
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_desire_filtered(const EmbeddingVector& query, DesireLevel desire,
                                                                  std::size_t n) const {
  check_query(*this, n);
  const auto& rows = rows_by_desire_[static_cast<std::size_t>(desire.value() + 1)];
  if (rows.empty()) return {};
  std::vector<double> scores(rows.size());
  const kernels::MatrixView m{summary_matrix_, dimension_};
  if (parallel_) {
    kernels::cosine_scores_parallel(m, query.values, rows, scores);
  } else {
    kernels::cosine_scores_serial(m, query.values, rows, scores);
  }
  return select_top(rows, std::move(scores), n);
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_joint(const EmbeddingVector& summary_query,
                                                        const EmbeddingVector& belief_query, std::size_t n) const {
  check_query(*this, n);
  std::vector<double> scores(all_rows_.size());
  const kernels::MatrixView a{summary_matrix_, dimension_};
  const kernels::MatrixView b{belief_matrix_, dimension_};
  if (parallel_) {
    kernels::joint_scores_parallel(a, summary_query.values, b, belief_query.values, 0.5, all_rows_, scores);
  } else {
    kernels::joint_scores_serial(a, summary_query.values, b, belief_query.values, 0.5, all_rows_, scores);
  }
  return select_top(all_rows_, std::move(scores), n);
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_by_summary(const Embedder& embedder, const DialogueSummary& query,
                                                             std::size_t n) const {
  check_query(*this, n);
  check_embedder(embedder);
  return retrieve_by_summary(embedder.embed(query.text), n);
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_desire_filtered(const Embedder& embedder,
                                                                  const DialogueSummary& query, DesireLevel desire,
                                                                  std::size_t n) const {
  check_query(*this, n);
  check_embedder(embedder);
  return retrieve_desire_filtered(embedder.embed(query.text), desire, n);
}

std::vector<RetrievalHit> KnowledgeBase::retrieve_joint(const Embedder& embedder, const DialogueSummary& summary_query,
                                                        const BeliefState& belief_query, std::size_t n) const {
  check_query(*this, n);
  check_embedder(embedder);
  return retrieve_joint(embedder.embed(summary_query.text), embedder.embed(belief_query.text()), n);
}

void embed_experiences(std::vector<Experience>& experiences, const Embedder& embedder) {
  std::vector<std::string> texts;
  texts.reserve(experiences.size() * 2);
  for (const auto& e : experiences) {
    texts.push_back(e.summary.text);
    texts.push_back(e.belief.text());
  }
  auto vectors = embedder.embed_batch(texts);
  for (std::size_t i = 0; i < experiences.size(); ++i) {
    experiences[i].summary_embedding = std::move(vectors[2 * i]);
    experiences[i].belief_embedding = std::move(vectors[2 * i + 1]);
  }
}

namespace {

/// Fisher-Yates order of [0, n) driven by a portable RNG.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

}  // namespace

KnowledgeBase subsample(const KnowledgeBase& kb, std::size_t size, std::uint64_t seed) {
  if (size > kb.size()) {
    fail(ErrorCode::SizeTooLarge,
         "requested " + std::to_string(size) + " experiences from a KB of " + std::to_string(kb.size()));
  }
  auto idx = shuffled_indices(kb.size(), seed);
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  std::vector<Experience> picked;
  picked.reserve(size);
  for (std::size_t i : idx) picked.push_back(kb.at(i));
  KnowledgeBase out(std::move(picked), kb.fingerprint());
  out.set_parallel(kb.parallel());
  return out;
}

KnowledgeBase build_knowledge_base(const Corpus& corpus, const Summarizer& summarizer, const Embedder& embedder,
                                   const KbBuildOptions& options) {
  std::vector<std::vector<Experience>> per_dialogue(corpus.size());
  std::exception_ptr first_error;
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      per_dialogue[static_cast<std::size_t>(i)] = decompose_dialogue(corpus[static_cast<std::size_t>(i)], summarizer);
    } catch (...) {
#pragma omp critical(kb_build_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<Experience> all;
  for (auto& v : per_dialogue) {
    for (auto& e : v) all.push_back(std::move(e));
  }
  if (options.sample_size) {
    if (*options.sample_size > all.size()) {
      fail(ErrorCode::SizeTooLarge, "sample of " + std::to_string(*options.sample_size) + " from " +
                                        std::to_string(all.size()) + " experiences");
    }
    auto idx = shuffled_indices(all.size(), options.seed);
    idx.resize(*options.sample_size);
    std::sort(idx.begin(), idx.end());
    std::vector<Experience> picked;
    for (std::size_t i : idx) picked.push_back(std::move(all[i]));
    all = std::move(picked);
  }
  embed_experiences(all, embedder);
  return KnowledgeBase(std::move(all), embedder.fingerprint());
}

json encode(const Experience& e) {
  return {{"id", e.id},
          {"history", encode(e.history)},
          {"summary", e.summary.text},
          {"desire", encode_desire(e.desire)},
          {"belief", encode(e.belief)},
          {"strategy", encode_strategy(e.strategy)},
          {"summary_embedding", e.summary_embedding.values},
          {"belief_embedding", e.belief_embedding.values}};
}

Experience decode_experience(const json& j) {
  Experience e;
  e.id = require(j, "id").get<std::string>();
  e.history = decode_history(require(j, "history"));
  e.summary.text = require(j, "summary").get<std::string>();
  e.desire = decode_desire(require(j, "desire"));
  e.belief = decode_belief(require(j, "belief"));
  e.strategy = decode_strategy(require(j, "strategy"));
  e.summary_embedding.values = require(j, "summary_embedding").get<std::vector<double>>();
  e.belief_embedding.values = require(j, "belief_embedding").get<std::vector<double>>();
  return e;
}

void write_kb(const KnowledgeBase& kb, std::ostream& out) {
  const json header = {{"version", kKbFormatVersion},
                       {"embedder_fingerprint", kb.fingerprint()},
                       {"dimension", kb.dimension()},
                       {"experiences", kb.size()}};
  out << header.dump() << '\n';
  for (const auto& e : kb.experiences()) out << encode(e).dump() << '\n';
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write knowledge base " + path.string());
  write_kb(kb, out);
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

KnowledgeBase read_kb(std::istream& in, const Embedder& embedder, bool allow_reembed) {
  std::string line;
  std::size_t line_no = 0;
  std::string fingerprint;
  std::size_t dimension = 0;
  bool have_header = false;
  std::vector<Experience> experiences;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (require(j, "version") != kKbFormatVersion) fail(ErrorCode::Parse, "unsupported KB version");
        fingerprint = require(j, "embedder_fingerprint").get<std::string>();
        dimension = require(j, "dimension").get<std::size_t>();
        have_header = true;
        continue;
      }
      auto e = decode_experience(j);
      if (e.summary_embedding.dimension() != dimension || e.belief_embedding.dimension() != dimension) {
        fail(ErrorCode::Parse, "embedding dimension differs from header (" + std::to_string(dimension) + ")");
      }
      experiences.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, e.what(), line_no);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, e.what(), line_no);
    }
  }
  if (!have_header) fail(ErrorCode::Parse, "knowledge base file has no header line");
  if (fingerprint != embedder.fingerprint()) {
    if (!allow_reembed) {
      fail(ErrorCode::EmbedderMismatch,
           "file embedded with '" + fingerprint + "', active embedder is '" + embedder.fingerprint() + "'");
    }
    embed_experiences(experiences, embedder);
    fingerprint = embedder.fingerprint();
  }
  return KnowledgeBase(std::move(experiences), std::move(fingerprint));
}

KnowledgeBase load_kb(const std::filesystem::path& path, const Embedder& embedder, bool allow_reembed) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open knowledge base " + path.string());
  return read_kb(in, embedder, allow_reembed);
}

}  // namespace ttbys
