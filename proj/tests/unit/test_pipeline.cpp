#include <doctest.h>

#include <cmath>
#include <mutex>

#include "support/fixtures.hpp"
#include "ttbys/error.hpp"
#include "ttbys/pipeline.hpp"

using namespace ttbys;
using namespace ttbys::testing;

namespace {

using S = Strategy;

const DialogueHistory kH = history_of({"Have you considered an online privacy course?",
                                       "Maybe, but I care more about digital infrastructure."});

/// Records every request, then delegates.
class Recorder final : public LlmBackend {
public:
  explicit Recorder(std::shared_ptr<MockBackend> inner) : inner_(std::move(inner)) {}
  LlmResponse complete(const LlmRequest& r) const override {
    std::lock_guard lock(mu_);
    requests.push_back(r);
    return inner_->complete(r);
  }
  std::string describe() const override { return "recorder"; }
  mutable std::vector<LlmRequest> requests;

private:
  std::shared_ptr<MockBackend> inner_;
  mutable std::mutex mu_;
};

Summarizer fixed(const char* text) {
  return [text](const DialogueHistory&) { return DialogueSummary{text}; };
}

PipelineContext ctx_for(const KnowledgeBase& kb, const Embedder& e, const LlmGateway& g, BlendConfig cfg = {}) {
  PipelineContext c{kb, e, g, cfg, stepping_clock(0.25), true, fixed("x suggests privacy; y prefers infrastructure")};
  return c;
}

KnowledgeBase case1_kb(const Embedder& e) {
  return kb_of({experience("k1/001", "privacy course suggestion", -1, S::LogicalAppeal, neg("not interested")),
                experience("k2/001", "privacy course suggestion again", -1, S::LogicalAppeal, neg("not useful")),
                experience("k3/001", "a privacy course offer", -1, S::TaskInquiry, neg("uncertain about it")),
                experience("k4/001", "suggesting a course on privacy", -1, S::LogicalAppeal, neg("not now")),
                experience("k5/001", "course idea", 0, S::SupplyingInformation, pos("infrastructure is interesting"))},
               e);
}

}  // namespace

TEST_CASE("first think: four of five retrieved experiences unwilling") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Desire, {"", uniform_desire_lp(), false});
  const LlmGateway g(m);
  const auto ctx = ctx_for(kb, e, g);
  const auto [d, trace] = first_think(kH, DialogueSummary{"privacy course suggestion"}, ctx);
  CHECK(d.value() == -1);
  CHECK(trace.retrieved.size() == 5);
  CHECK(trace.desire_exp->probs == std::vector<double>{0.8, 0.2, 0.0});
  // tests/oracles/fusion_oracle.py: (17/30, 4/15, 1/6)
  CHECK(trace.desire_fused->probs[0] == doctest::Approx(17.0 / 30).epsilon(1e-9));
  CHECK(trace.desire_fused->probs[1] == doctest::Approx(4.0 / 15).epsilon(1e-9));
  CHECK(trace.desire_fused->probs[2] == doctest::Approx(1.0 / 6).epsilon(1e-9));
  CHECK_FALSE(trace.fallback_used);
}

TEST_CASE("first think endpoints") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Desire, {"", std::vector<TokenLogprob>{{"C", -0.01}, {"A", -5}}, false});
  const LlmGateway g(m);
  BlendConfig only_model;
  only_model.alpha = 1;
  CHECK(first_think(kH, {"privacy"}, ctx_for(kb, e, g, only_model)).first.value() == 1);

  const auto neutral = kb_of({experience("a/1", "one", 0, S::LogicalAppeal), experience("b/1", "two", 0, S::LogicalAppeal)}, e);
  BlendConfig only_exp;
  only_exp.alpha = 0;
  CHECK(first_think(kH, {"one"}, ctx_for(neutral, e, g, only_exp)).first.value() == 0);
}

TEST_CASE("first think falls back to experience when no label token comes back") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Desire, {"", std::vector<TokenLogprob>{{"Well", -0.1}}, false});
  const LlmGateway g(m);
  const auto [d, trace] = first_think(kH, {"privacy course suggestion"}, ctx_for(kb, e, g));
  CHECK(trace.fallback_used);
  CHECK(d.value() == -1);
  CHECK(trace.desire_fused == trace.desire_exp);
}

TEST_CASE("second think") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->script_history(PromptKind::Belief, kH,
                    {"digital infrastructure is interesting. uncertain about the benefit of studying online privacy.",
                     std::nullopt, false});
  auto rec = std::make_shared<Recorder>(m);
  const LlmGateway g(rec);
  BlendConfig cfg;
  cfg.n_second = 3;
  const auto [b, trace] = second_think(kH, DesireLevel::unwilling(), {"privacy course suggestion"}, ctx_for(kb, e, g, cfg));
  REQUIRE(b.size() == 2);
  CHECK(b.statements()[0] == BeliefStatement{Polarity::Positive, "digital infrastructure is interesting"});
  CHECK(b.statements()[1].polarity == Polarity::Negative);
  CHECK(trace.retrieved.size() == 3);
  for (const auto& h : trace.retrieved) CHECK(kb.at(h.index).desire.value() == -1);
  const auto& prompt = rec->requests.back().prompt;
  CHECK(prompt.find("Top-3 Experience:") != std::string::npos);
  CHECK(prompt.find("Top-4 Experience:") == std::string::npos);

  // no experience with the desire: empty block, still a belief
  const auto [b2, t2] = second_think(kH, DesireLevel::willing(), {"privacy"}, ctx_for(kb, e, g));
  CHECK(t2.retrieved.empty());
  CHECK_FALSE(b2.empty());
  CHECK(rec->requests.back().prompt.find("Relevant Experience") == std::string::npos);
}

TEST_CASE("third think blends with beta") {
  const HashingEmbedder e(64);
  std::vector<Experience> exps;
  const std::vector<S> labels = {S::ExpressionOfViews, S::ExpressionOfViews, S::ExpressionOfViews, S::ExpressionOfViews,
                                 S::SupplyingInformation, S::SupplyingInformation, S::SupplyingInformation,
                                 S::LogicalAppeal, S::LogicalAppeal, S::LogicalAppeal};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    exps.push_back(experience("s" + std::to_string(i) + "/001", "summary " + std::to_string(i), 0, labels[i]));
  }
  const auto kb = kb_of(exps, e);
  auto m = mock();
  m->set_fallback(PromptKind::Strategy,
                  {"", std::vector<TokenLogprob>{{"V", std::log(0.5)}, {"I", std::log(0.3)}, {"L", std::log(0.2)}}, false});
  const LlmGateway g(m);
  const auto [s, trace] = third_think(kH, {"summary"}, DesireLevel::hesitant(), pos("fine"), ctx_for(kb, e, g));
  CHECK(s == S::ExpressionOfViews);
  CHECK(trace.strategy_fused->prob(S::ExpressionOfViews) == doctest::Approx(0.43).epsilon(1e-5));
  CHECK(trace.strategy_fused->prob(S::SupplyingInformation) == doctest::Approx(0.30).epsilon(1e-5));
  CHECK(trace.strategy_fused->prob(S::LogicalAppeal) == doctest::Approx(0.27).epsilon(1e-5));

  BlendConfig only_model;
  only_model.beta = 1;
  auto peaked = mock();
  peaked->set_fallback(PromptKind::Strategy, {"", std::vector<TokenLogprob>{{"G", -0.01}}, false});
  const LlmGateway pg(peaked);
  CHECK(third_think(kH, {"summary"}, DesireLevel::hesitant(), {}, ctx_for(kb, e, pg, only_model)).first ==
        S::GivingExamples);
}

TEST_CASE("third think at beta 0 follows the retrieved majority") {
  const HashingEmbedder e(64);
  std::vector<Experience> exps;
  for (int i = 0; i < 10; ++i) {
    exps.push_back(experience("m" + std::to_string(i) + "/001", "note " + std::to_string(i), 0,
                              i < 7 ? S::SupplyingInformation : all_strategies()[static_cast<std::size_t>(i - 7)]));
  }
  const auto kb = kb_of(exps, e);
  auto m = mock();
  m->set_fallback(PromptKind::Strategy, {"", std::vector<TokenLogprob>{{"T", -0.001}}, false});
  const LlmGateway g(m);
  BlendConfig cfg;
  cfg.beta = 0;
  CHECK(third_think(kH, {"note"}, DesireLevel::hesitant(), {}, ctx_for(kb, e, g, cfg)).first == S::SupplyingInformation);
}

TEST_CASE("infer_turn end to end") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Desire, {"", uniform_desire_lp(), false});
  m->script_history(PromptKind::Belief, kH, {"digital infrastructure is interesting. not sure about privacy.", std::nullopt, false});
  const LlmGateway g(m);
  const auto run = [&] { return infer_turn(kH, ctx_for(kb, e, g)); };
  const auto t = run();
  CHECK(t.desire.value() == -1);
  CHECK(t.summary.text == "x suggests privacy; y prefers infrastructure");
  CHECK(t.traces[0].stage == Stage::First);
  CHECK(t.traces[1].stage == Stage::Second);
  CHECK(t.traces[2].stage == Stage::Third);
  for (const auto& tr : t.traces) CHECK(tr.total_seconds >= tr.llm_seconds + tr.retrieval_seconds);
  CHECK(run() == t);
  CHECK(encode(run()).dump() == encode(t).dump());
  CHECK(decode_turn_inference(encode(t)) == decode_turn_inference(encode(decode_turn_inference(encode(t)))));
}

TEST_CASE("infer_turn errors carry the stage") {
  const HashingEmbedder e(64);
  const KnowledgeBase empty;
  const LlmGateway g(mock());
  DialogueHistory hi;
  hi.utterances.push_back({Role::Persuadee, "hi"});
  try {
    infer_turn(hi, ctx_for(empty, e, g));
    FAIL("expected EmptyKnowledgeBase");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmptyKnowledgeBase);
    CHECK(err.stage() == "first");
  }

  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Belief, {"", std::nullopt, true});
  const LlmGateway failing(m);
  try {
    infer_turn(kH, ctx_for(kb, e, failing));
    FAIL("expected BackendFailure");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::BackendFailure);
    CHECK(err.stage() == "second");
  }
}

TEST_CASE("with alpha = beta = 0 desire and strategy ignore the model") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  BlendConfig cfg;
  cfg.alpha = 0;
  cfg.beta = 0;
  auto m1 = mock();
  m1->set_fallback(PromptKind::Desire, {"", std::vector<TokenLogprob>{{"C", -0.001}}, false});
  m1->set_fallback(PromptKind::Strategy, {"", std::vector<TokenLogprob>{{"P", -0.001}}, false});
  auto m2 = mock();
  m2->set_fallback(PromptKind::Desire, {"", std::vector<TokenLogprob>{{"B", -0.001}}, false});
  m2->set_fallback(PromptKind::Strategy, {"", std::vector<TokenLogprob>{{"T", -0.001}}, false});
  const LlmGateway g1(m1), g2(m2);
  const auto a = infer_turn(kH, ctx_for(kb, e, g1, cfg));
  const auto b = infer_turn(kH, ctx_for(kb, e, g2, cfg));
  CHECK(a.desire == b.desire);
  CHECK(a.strategy == b.strategy);
  CHECK(a.traces[0].retrieved == b.traces[0].retrieved);
  CHECK(a.traces[2].retrieved == b.traces[2].retrieved);
}

TEST_CASE("gold-state mode feeds gold desire to the second think") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto m = mock();
  m->set_fallback(PromptKind::Desire, {"", uniform_desire_lp(), false});
  const LlmGateway g(m);
  const auto t = infer_turn_gold_state(kH, DesireLevel::hesitant(), pos("fine"), ctx_for(kb, e, g));
  CHECK(t.desire.value() == -1);
  for (const auto& h : t.traces[1].retrieved) CHECK(kb.at(h.index).desire.value() == 0);
}

TEST_CASE("raw-history queries skip the summary") {
  const HashingEmbedder e(128);
  const auto kb = case1_kb(e);
  auto rec = std::make_shared<Recorder>(mock());
  const LlmGateway g(rec);
  auto ctx = ctx_for(kb, e, g);
  ctx.use_summary_query = false;
  ctx.summarizer = nullptr;
  const auto t = infer_turn(kH, ctx);
  CHECK(t.summary.text == render_history(kH));
  for (const auto& r : rec->requests) CHECK(r.kind != PromptKind::Summary);
}

TEST_CASE("clocks") {
  auto c = stepping_clock(0.5);
  CHECK(c() == 0.0);
  CHECK(c() == 0.5);
  CHECK(c() == 1.0);
  auto s = steady_clock();
  const double a = s();
  CHECK(s() >= a);
  CHECK(stage_from_string("third") == Stage::Third);
  CHECK_THROWS_AS(stage_from_string("fourth"), Error);
}
