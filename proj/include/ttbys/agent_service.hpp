#pragma once
// Interactive persuasion agent: sessions, live turn inference, replies,
// ratings, transcript export and optional append-only file persistence.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/fusion.hpp"
#include "ttbys/knowledge_base.hpp"
#include "ttbys/llm_gateway.hpp"
#include "ttbys/pipeline.hpp"

namespace ttbys {

enum class RatingDimension { Identification, Empathy, Persuasion, Fluency, Consistency };
enum class Verdict { Win, Lose, Tie };

std::string_view to_string(RatingDimension d);
std::string_view to_string(Verdict v);
/// Throws UnknownDimension.
RatingDimension rating_dimension_from_string(std::string_view name);
Verdict verdict_from_string(std::string_view name);
std::span<const RatingDimension> all_rating_dimensions();

struct RatingRecord {
  RatingDimension dimension = RatingDimension::Identification;
  Verdict verdict = Verdict::Tie;
  std::string comparison_target;
  std::optional<std::size_t> turn_index;
  std::string note;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct Session {
  std::string id;
  std::string task;
  std::string background;
  DialogueHistory transcript;
  std::vector<TurnInference> inferences;
  std::vector<RatingRecord> ratings;
  std::int64_t created_at = 0;  // unix milliseconds
  std::int64_t updated_at = 0;

  friend bool operator==(const Session&, const Session&) = default;
};

json encode(const RatingRecord& r);
RatingRecord decode_rating(const json& j);

/// Export document: {id, task, background, transcript, created_at,
/// updated_at, ratings, inferences?}.
json export_session(const Session& s, bool include_traces);
Session import_session(const json& doc);

struct WinRate {
  std::size_t wins = 0, losses = 0, ties = 0;
  /// Percent of all records; ties count in the denominator only.
  double win_pct() const;
  double lose_pct() const;
};

std::map<RatingDimension, WinRate> win_rates(std::span<const RatingRecord> ratings);

struct ServiceConfig {
  BlendConfig cfg;
  /// Empty disables persistence.
  std::filesystem::path data_dir;
  std::function<std::int64_t()> now_ms;  // defaults to the system clock
  std::uint64_t id_seed = 0;             // 0 = random
  /// Builds the pipeline clock for each turn.
  std::function<Clock()> clock_factory = [] { return steady_clock(); };
  Summarizer summarizer;  // empty = the gateway's summary template
};

struct TurnResult {
  std::string agent_reply;
  TurnInference inference;
};

/// Thread-safe. Turns within one session are serialized: a second
/// concurrent post gets SessionBusy. Different sessions run in parallel.
class AgentService {
public:
  AgentService(const KnowledgeBase& kb, const Embedder& embedder, const LlmGateway& llm, ServiceConfig config);

  Session create_session(const std::string& task, const std::string& background);
  /// Transactional: on any failure the session is left unchanged.
  TurnResult post_utterance(const std::string& session_id, const std::string& text);
  void record_rating(const std::string& session_id, const RatingRecord& rating);
  Session get(const std::string& session_id) const;
  json export_transcript(const std::string& session_id, bool include_traces) const;
  /// Adds an exported session (new id if taken). Returns its id.
  std::string import(const json& doc);
  std::vector<std::string> session_ids() const;

  const ServiceConfig& config() const { return config_; }

private:
  struct Entry {
    std::mutex turn;          // held for the whole turn
    mutable std::mutex data;  // guards `session`
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::string new_id();
  std::int64_t now() const;
  void append(const std::string& id, const json& event) const;
  void replay();
  void add(Session s);

  const KnowledgeBase& kb_;
  const Embedder& embedder_;
  const LlmGateway& llm_;
  ServiceConfig config_;

  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex id_mutex_;
  SplitRng id_rng_;
  mutable std::mutex file_mutex_;
};

}  // namespace ttbys
