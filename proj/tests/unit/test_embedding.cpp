#include <doctest.h>

#include <cmath>
#include <random>

#include "ttbys/embedding.hpp"
#include "ttbys/error.hpp"
#include "ttbys/retrieval_kernels.hpp"

using namespace ttbys;

TEST_CASE("tokenizer lowercases alphanumeric runs") {
  CHECK(tokenize("Hello, World-42!") == std::vector<std::string>{"hello", "world", "42"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("hashing embedder matches the standalone reference") {
  // Frozen from tests/oracles/hashing_oracle.py "community cleanup event" 256.
  const HashingEmbedder e(256);
  const auto v = e.embed("community cleanup event");
  REQUIRE(v.dimension() == 256);
  const double x = -0.5773502691896258;
  for (std::size_t i = 0; i < 256; ++i) {
    if (i == 19 || i == 38 || i == 162) {
      CHECK(v.values[i] == doctest::Approx(x).epsilon(1e-15));
    } else {
      CHECK(v.values[i] == 0.0);
    }
  }
}

TEST_CASE("hashing embedder edge cases") {
  const HashingEmbedder e(64);
  CHECK(e.embed("").is_zero());
  CHECK(e.embed("!!!").is_zero());
  CHECK(e.embed("hello hello") == e.embed("hello"));
  CHECK(e.embed("Hello") == e.embed("hello"));
  CHECK(e.fingerprint() != HashingEmbedder(128).fingerprint());
}

TEST_CASE("hashing embedder is deterministic over random strings") {
  const HashingEmbedder a(256), b(256);
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcdefghij klmnop,.;XYZ0123";
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const std::size_t len = rng() % 40;
    for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    const auto u = a.embed(s), v = b.embed(s);
    REQUIRE(u == v);
    if (!u.is_zero()) {
      double n = 0;
      for (double x : u.values) n += x * x;
      CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("cosine") {
  const std::vector<double> u{0.6, 0.8}, v{0.8, 0.6}, e1{1, 0}, e2{0, 1};
  CHECK(cosine(u, v) == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(cosine(e1, e2) == 0.0);
  CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-9));
  const std::vector<double> zero{0, 0};
  CHECK(cosine(u, zero) == 0.0);
}

TEST_CASE("cosine symmetry and normalization idempotence") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> u(17), v(17);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    CHECK(cosine(u, v) == cosine(v, u));
    std::vector<double> once = u;
    l2_normalize(once);
    std::vector<double> twice = once;
    l2_normalize(twice);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-15));
  }
}

TEST_CASE("embedder config validation") {
  EmbedderConfig c;
  c.dimension = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  EmbedderConfig r;
  r.kind = EmbedderConfig::Kind::Remote;
  CHECK_THROWS_AS(r.validate(), Error);
  r.endpoint = "http://127.0.0.1:9/v1/embeddings";
  CHECK_NOTHROW(r.validate());
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 7u, 255u, 256u, 1000u}) {
    const std::size_t dim = 24;
    std::vector<double> a(n * dim), b(n * dim), qa(dim), qb(dim);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    for (auto& x : qa) x = g(rng);
    for (auto& x : qb) x = g(rng);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; i += 1 + (i % 3)) rows.push_back(i);
    std::vector<double> s1(rows.size()), s2(rows.size());
    kernels::cosine_scores_serial({a, dim}, qa, rows, s1);
    kernels::cosine_scores_parallel({a, dim}, qa, rows, s2);
    CHECK(s1 == s2);
    kernels::joint_scores_serial({a, dim}, qa, {b, dim}, qb, 0.5, rows, s1);
    kernels::joint_scores_parallel({a, dim}, qa, {b, dim}, qb, 0.5, rows, s2);
    CHECK(s1 == s2);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double ref = 0.5 * cosine(std::span<const double>(a).subspan(rows[k] * dim, dim), qa) +
                         0.5 * cosine(std::span<const double>(b).subspan(rows[k] * dim, dim), qb);
      CHECK(s1[k] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}
