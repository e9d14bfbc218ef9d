#pragma once
// Text-to-vector mapping. HashingEmbedder is the deterministic local
// embedder used offline; RemoteEmbedder talks to an embeddings HTTP service.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ttbys {

/// L2-normalized vector, or all zeros for text without tokens.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  bool is_zero() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Seed mixed into every token hash of the hashing embedder.
inline constexpr std::uint64_t kHashingSeed = 0x5474427953ULL;  // "TtBYS"
inline constexpr std::size_t kDefaultHashingDimension = 256;
inline constexpr std::string_view kDefaultRemoteModel = "all-MiniLM-L6-v2";

struct EmbedderConfig {
  enum class Kind { Hashing, Remote };

  Kind kind = Kind::Hashing;
  std::size_t dimension = kDefaultHashingDimension;  // hashing only
  std::string endpoint;                              // remote only, e.g. http://host:8080/v1/embeddings
  std::string model = std::string(kDefaultRemoteModel);
  std::string api_key;
  std::chrono::milliseconds timeout{30'000};
  int max_in_flight = 4;

  /// Throws InvalidArgument for an unusable configuration.
  void validate() const;
  /// Identifies the vector space the config produces; stored in KB headers.
  std::string fingerprint() const;
};

/// Lowercase, split on non-alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

/// Rescales to unit L2 norm; zero vectors are returned unchanged.
void l2_normalize(std::span<double> values);

/// dot(u,v)/(|u||v|); 0 if either operand is the zero vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

class Embedder {
public:
  virtual ~Embedder() = default;

  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
  virtual std::size_t dimension() const = 0;
  virtual std::string fingerprint() const = 0;
};

/// Signed feature hashing of lowercase alphanumeric tokens: each token is
/// hashed with FNV-1a (basis xor kHashingSeed); the bucket is hash % dim and
/// the sign comes from the top bit (set means -1). Counts are accumulated
/// and the result is L2-normalized.
class HashingEmbedder final : public Embedder {
public:
  explicit HashingEmbedder(std::size_t dimension = kDefaultHashingDimension);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string fingerprint() const override;

private:
  std::size_t dimension_;
};

/// Client for the common embeddings wire format:
/// POST {"model": ..., "input": [..]} -> {"data": [{"index": i, "embedding": [..]}]}.
class RemoteEmbedder final : public Embedder {
public:
  explicit RemoteEmbedder(EmbedderConfig config);

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  /// Unknown until the first response; 0 before then.
  std::size_t dimension() const override;
  std::string fingerprint() const override;

private:
  EmbedderConfig config_;
  mutable std::counting_semaphore<64> in_flight_;
  mutable std::atomic<std::size_t> dimension_{0};
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace ttbys
