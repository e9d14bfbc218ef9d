#include "ttbys/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "http_util.hpp"
#include "ttbys/core_types.hpp"
#include "ttbys/error.hpp"

namespace ttbys {

using json = nlohmann::json;

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

void EmbedderConfig::validate() const {
  if (kind == Kind::Hashing) {
    if (dimension < 8) {
      fail(ErrorCode::InvalidArgument,
           "hashing dimension must be >= 8, got " + std::to_string(dimension));
    }
  } else {
    if (endpoint.empty()) fail(ErrorCode::InvalidArgument, "remote embedder needs an endpoint");
    if (model.empty()) fail(ErrorCode::InvalidArgument, "remote embedder needs a model id");
    if (max_in_flight < 1 || max_in_flight > 64) {
      fail(ErrorCode::InvalidArgument, "max_in_flight must be in [1, 64]");
    }
  }
}

std::string EmbedderConfig::fingerprint() const {
  if (kind == Kind::Hashing) {
    return "hashing/fnv1a64/seed=" + std::to_string(kHashingSeed) + "/dim=" + std::to_string(dimension);
  }
  return "remote/" + model;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void l2_normalize(std::span<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) return;
  const double norm = std::sqrt(sq);
  for (double& v : values) v /= norm;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    fail(ErrorCode::DimensionMismatch,
         "cosine of " + std::to_string(u.size()) + "-d and " + std::to_string(v.size()) + "-d vectors");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine(std::span<const double>(u.values), std::span<const double>(v.values));
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  EmbedderConfig cfg;
  cfg.dimension = dimension;
  cfg.validate();
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  EmbeddingVector out;
  out.values.assign(dimension_, 0.0);
  constexpr std::uint64_t kBasis = 0xcbf29ce484222325ULL ^ kHashingSeed;
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(token, kBasis);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    out.values[h % dimension_] += sign;
  }
  l2_normalize(out.values);
  return out;
}

std::string HashingEmbedder::fingerprint() const {
  EmbedderConfig cfg;
  cfg.dimension = dimension_;
  return cfg.fingerprint();
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  config_.validate();
}

std::size_t RemoteEmbedder::dimension() const { return dimension_.load(); }

std::string RemoteEmbedder::fingerprint() const { return config_.fingerprint(); }

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  const std::string owned(text);
  auto batch = embed_batch(std::span<const std::string>(&owned, 1));
  return std::move(batch.front());
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  const auto url = detail::split_url(config_.endpoint);

  json body = {{"model", config_.model}, {"input", json::array()}};
  for (const auto& t : texts) body["input"].push_back(t);

  httplib::Result res;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<64>& sem;
      ~Release() { sem.release(); }
    } release{in_flight_};
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    res = client.Post(url.path, headers, body.dump(), "application/json");
  }

  if (!res) {
    fail(ErrorCode::RemoteUnavailable,
         "embedding request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::RemoteUnavailable,
         "embedding service returned HTTP " + std::to_string(res->status));
  }

  std::vector<EmbeddingVector> out(texts.size());
  try {
    const json reply = json::parse(res->body);
    const auto& data = reply.at("data");
    if (data.size() != texts.size()) {
      fail(ErrorCode::RemoteUnavailable, "embedding service returned " +
                                             std::to_string(data.size()) + " vectors for " +
                                             std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t index = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
      if (index >= out.size()) fail(ErrorCode::RemoteUnavailable, "embedding index out of range");
      auto values = data[i].at("embedding").get<std::vector<double>>();
      for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::RemoteUnavailable, "non-finite embedding value");
      }
      l2_normalize(values);
      out[index].values = std::move(values);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::RemoteUnavailable, std::string("malformed embedding response: ") + e.what());
  }
  if (!out.empty()) {
    std::size_t expected = 0;
    dimension_.compare_exchange_strong(expected, out.front().dimension());
    for (const auto& v : out) {
      if (v.dimension() != dimension_.load()) {
        fail(ErrorCode::DimensionMismatch, "embedding service changed dimension mid-run");
      }
    }
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  if (config.kind == EmbedderConfig::Kind::Hashing) {
    return std::make_unique<HashingEmbedder>(config.dimension);
  }
  return std::make_unique<RemoteEmbedder>(config);
}

namespace detail {

SplitUrl split_url(std::string_view url) {
  SplitUrl out;
  std::string_view rest = url;
  std::string scheme = "http://";
  if (const auto pos = rest.find("://"); pos != std::string_view::npos) {
    scheme = std::string(rest.substr(0, pos + 3));
    rest.remove_prefix(pos + 3);
  }
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) {
    out.origin = scheme + std::string(rest);
    out.path = "/";
  } else {
    out.origin = scheme + std::string(rest.substr(0, slash));
    out.path = std::string(rest.substr(slash));
  }
  return out;
}

}  // namespace detail

}  // namespace ttbys
