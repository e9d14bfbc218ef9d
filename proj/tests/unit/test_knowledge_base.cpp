#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "ttbys/error.hpp"
#include "ttbys/knowledge_base.hpp"

using namespace ttbys;
using namespace ttbys::testing;

namespace {

using S = Strategy;

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  l2_normalize(v);
  return v;
}

KnowledgeBase random_kb(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::vector<Experience> exps;
  std::vector<std::vector<double>> s, b;
  for (std::size_t i = 0; i < n; ++i) {
    exps.push_back(experience("d" + std::to_string(i % 7) + "/" + std::to_string(100 + i), "s",
                              static_cast<int>(rng() % 3) - 1, all_strategies()[rng() % 9]));
    s.push_back(random_unit(rng, dim));
    b.push_back(random_unit(rng, dim));
  }
  return kb_with_vectors(std::move(exps), s, b);
}

void check_same(const std::vector<RetrievalHit>& got, const std::vector<RefHit>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].experience_id == want[i].id);
    CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
  }
}

AnnotatedDialogue four_turns(std::string id) {
  return dialogue_of(std::move(id),
                     {{"join us", S::SupplyingInformation, "not sure", -1, neg("not sure about it")},
                      {"it is short", S::LogicalAppeal, "maybe", 0, belief_of({{Polarity::Positive, "short"}, {Polarity::Negative, "not free"}})},
                      {"many go", S::GivingExamples, "sounds nice", 1, pos("sounds nice")},
                      {"great", S::AffirmationAndReassurance, "ok then", 1, pos("ok")}},
                     "see you", S::ExpressionOfViews);
}

}  // namespace

TEST_CASE("decomposition yields one experience per answered persuadee turn") {
  const auto d = four_turns("dlg");
  const auto exps = decompose_dialogue(d, extractive_summarizer());
  REQUIRE(exps.size() == 4);
  CHECK(exps[0].id == "dlg/001");
  CHECK(exps[0].history.size() == 2);
  CHECK(exps[0].desire.value() == -1);
  CHECK(exps[0].strategy == S::LogicalAppeal);
  CHECK(exps[3].strategy == S::ExpressionOfViews);
  CHECK(exps[0].summary.text == "x: join us y: not sure");
  CHECK(dialogue_id_of(exps[2].id) == "dlg");

  auto unanswered = d;
  unanswered.utterances.utterances.pop_back();
  unanswered.labels.pop_back();
  CHECK(decompose_dialogue(unanswered, extractive_summarizer()).size() == 3);
}

TEST_CASE("retrieve_by_summary basics") {
  const HashingEmbedder e(128);
  const auto kb = kb_of({experience("a/001", "gym costs money", 0, S::LogicalAppeal),
                         experience("b/001", "cleanup on the weekend", 1, S::GivingExamples),
                         experience("c/001", "privacy course online", -1, S::TaskInquiry)},
                        e);
  CHECK(kb.retrieve_by_summary(e, DialogueSummary{"anything"}, 5).size() == 3);
  const auto hits = kb.retrieve_by_summary(e, DialogueSummary{"cleanup on the weekend"}, 2);
  CHECK(hits[0].experience_id == "b/001");
  CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kb.retrieve_by_summary(e, DialogueSummary{"x"}, 0), Error);
  CHECK_THROWS_AS(kb.retrieve_by_summary(HashingEmbedder(64), DialogueSummary{"x"}, 1), Error);
}

TEST_CASE("retrieve_desire_filtered") {
  const HashingEmbedder e(64);
  const auto kb = kb_of({experience("a/1", "one", -1, S::LogicalAppeal), experience("b/1", "two", -1, S::LogicalAppeal),
                         experience("c/1", "three", 0, S::LogicalAppeal), experience("d/1", "four", 1, S::LogicalAppeal)},
                        e);
  const auto hits = kb.retrieve_desire_filtered(e, DialogueSummary{"one"}, DesireLevel::hesitant(), 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].experience_id == "c/1");
  const auto none = kb_of({experience("a/1", "one", -1, S::LogicalAppeal)}, e);
  CHECK(none.retrieve_desire_filtered(e, DialogueSummary{"one"}, DesireLevel::willing(), 3).empty());
}

TEST_CASE("joint retrieval weights the two cosines equally") {
  // experience p: summary cosine 1.0, belief cosine 0.0 -> 0.5
  // experience q: summary cosine 0.6, belief cosine 0.6 -> 0.6
  const auto kb = kb_with_vectors({experience("p/1", "p", 0, S::LogicalAppeal), experience("q/1", "q", 0, S::LogicalAppeal)},
                                  {{1, 0}, {0.6, 0.8}}, {{0, 1}, {0.6, 0.8}});
  const auto hits = kb.retrieve_joint(EmbeddingVector{{1, 0}}, EmbeddingVector{{1, 0}}, 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].experience_id == "q/1");
  CHECK(hits[0].score == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hits[1].score == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("joint retrieval: identical summary and belief scores 1") {
  const HashingEmbedder e(128);
  const auto kb = kb_of({experience("a/1", "gym is pricey", 0, S::LogicalAppeal, neg("not cheap")),
                         experience("b/1", "cleanup day", 1, S::GivingExamples, pos("fun event"))},
                        e);
  const auto hits = kb.retrieve_joint(e, DialogueSummary{"cleanup day"}, pos("fun event"), 2);
  CHECK(hits[0].experience_id == "b/1");
  CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("retrieval matches the brute-force oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const auto kb = random_kb(rng, 4 + rng() % 30, 8);
    const auto qs = random_unit(rng, 8), qb = random_unit(rng, 8);
    for (std::size_t n : {1u, 4u, 10u, 64u}) {
      check_same(kb.retrieve_by_summary(EmbeddingVector{qs}, n), brute_force(kb, RefMode::Summary, qs, qb, 0, n));
      check_same(kb.retrieve_joint(EmbeddingVector{qs}, EmbeddingVector{qb}, n),
                 brute_force(kb, RefMode::Joint, qs, qb, 0, n));
      for (int d : {-1, 0, 1}) {
        check_same(kb.retrieve_desire_filtered(EmbeddingVector{qs}, DesireLevel::from_int(d), n),
                   brute_force(kb, RefMode::Filtered, qs, qb, d, n));
      }
    }
  }
}

TEST_CASE("retrieval properties") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    auto kb = random_kb(rng, 20, 6);
    const auto qs = random_unit(rng, 6), qb = random_unit(rng, 6);
    for (bool parallel : {true, false}) {
      kb.set_parallel(parallel);
      std::vector<RetrievalHit> prev;
      for (std::size_t n = 1; n <= 21; ++n) {
        const auto hits = kb.retrieve_joint(EmbeddingVector{qs}, EmbeddingVector{qb}, n);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < hits.size(); ++i) {
          ids.insert(hits[i].experience_id);
          if (i > 0) CHECK(hits[i - 1].score >= hits[i].score);
        }
        CHECK(ids.size() == hits.size());
        CHECK(std::equal(prev.begin(), prev.end(), hits.begin()));
        prev = hits;
        for (const auto& h : kb.retrieve_desire_filtered(EmbeddingVector{qs}, DesireLevel::willing(), n)) {
          CHECK(kb.at(h.index).desire == DesireLevel::willing());
        }
      }
    }
  }
}

TEST_CASE("ties break by ascending id") {
  const auto kb = kb_with_vectors({experience("z/1", "z", 0, S::LogicalAppeal), experience("a/1", "a", 0, S::LogicalAppeal),
                                   experience("m/1", "m", 0, S::LogicalAppeal)},
                                  {{1, 0}, {1, 0}, {1, 0}}, {{0, 1}, {0, 1}, {0, 1}});
  const auto hits = kb.retrieve_by_summary(EmbeddingVector{{1, 0}}, 3);
  CHECK(hits[0].experience_id == "a/1");
  CHECK(hits[1].experience_id == "m/1");
  CHECK(hits[2].experience_id == "z/1");
}

TEST_CASE("joint degenerates to summary ordering with zero belief vectors") {
  std::mt19937_64 rng(31);
  std::vector<Experience> exps;
  std::vector<std::vector<double>> s, b;
  for (int i = 0; i < 15; ++i) {
    exps.push_back(experience("e/" + std::to_string(100 + i), "s", 0, S::LogicalAppeal));
    s.push_back(random_unit(rng, 5));
    b.push_back(std::vector<double>(5, 0.0));
  }
  const auto kb = kb_with_vectors(exps, s, b);
  const auto q = random_unit(rng, 5);
  const auto a = kb.retrieve_by_summary(EmbeddingVector{q}, 15);
  const auto j = kb.retrieve_joint(EmbeddingVector{q}, EmbeddingVector{random_unit(rng, 5)}, 15);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].experience_id == j[i].experience_id);
}

TEST_CASE("save and load") {
  TempDir dir("kb");
  const HashingEmbedder e(64);
  const auto kb = kb_of({experience("a/1", "one", -1, S::LogicalAppeal), experience("b/1", "two", 0, S::TaskInquiry),
                         experience("c/1", "three", 1, S::PersonalStory, neg("not sure"))},
                        e);
  save_kb(kb, dir.path / "kb.jsonl");
  CHECK(load_kb(dir.path / "kb.jsonl", e) == kb);

  try {
    load_kb(dir.path / "kb.jsonl", HashingEmbedder(32));
    FAIL("expected EmbedderMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmbedderMismatch);
  }
  const auto re = load_kb(dir.path / "kb.jsonl", HashingEmbedder(32), true);
  CHECK(re.dimension() == 32);

  std::ostringstream text;
  write_kb(kb, text);
  std::string s = text.str();
  const auto nl = s.find('\n');
  s.replace(nl + 1, 1, "#");
  std::istringstream in(s);
  try {
    read_kb(in, e);
    FAIL("expected Parse");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Parse);
    CHECK(err.line() == std::optional<std::size_t>(2));
  }
}

TEST_CASE("build and subsample") {
  const HashingEmbedder e(64);
  const Corpus c = {four_turns("d1"), four_turns("d2")};
  const auto kb = build_knowledge_base(c, extractive_summarizer(), e);
  CHECK(kb.size() == 8);
  CHECK(kb.dialogue_ids() == std::vector<std::string>{"d1", "d2"});

  const auto small = subsample(kb, 3, 5), big = subsample(kb, 6, 5);
  CHECK(subsample(kb, 3, 5) == small);
  for (const auto& x : small.experiences()) CHECK(big.find(x.id) != nullptr);
  CHECK_THROWS_AS(subsample(kb, 9, 5), Error);

  std::ostringstream a, b;
  write_kb(build_knowledge_base(c, extractive_summarizer(), e), a);
  write_kb(kb, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("build reports missing labels") {
  auto d = four_turns("d1");
  d.labels[1].desire.reset();
  CHECK_THROWS_AS(decompose_dialogue(d, extractive_summarizer()), Error);
}
