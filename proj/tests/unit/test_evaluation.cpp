#include <doctest.h>

#include <algorithm>

#include "support/eval_fixture.hpp"
#include "ttbys/error.hpp"
#include "ttbys/evaluation.hpp"

using namespace ttbys;
using namespace ttbys::testing;

namespace {

EvalReport eval(const EvalFixture& f, const EvalOptions& o) {
  const LlmGateway g(f.mock);
  const RuleJudge judge;
  return run_static_eval(f.test, f.kb, f.embedder, g, judge, o);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a ttbys::Error");
  return ErrorCode::Empty;
}

}  // namespace

TEST_CASE("accuracy") {
  const std::vector<int> a = {1, 0, -1}, b = {1, 1, -1}, c = {0, 1, 0};
  CHECK(accuracy<int>(a, b) == doctest::Approx(66.67).epsilon(1e-4));
  CHECK(accuracy<int>(a, a) == 100.0);
  CHECK(accuracy<int>(a, c) == 0.0);
  CHECK(code_of([&] { accuracy<int>(a, std::vector<int>{1}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { accuracy<int>(std::vector<int>{}, std::vector<int>{}); }) == ErrorCode::Empty);
}

TEST_CASE("accuracy lies on the 100/n grid") {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t hits = 0; hits <= n; ++hits) {
      std::vector<int> gold(n, 1), pred(n, 0);
      std::fill(pred.begin(), pred.begin() + static_cast<long>(hits), 1);
      CHECK(accuracy<int>(pred, gold) == 100.0 * static_cast<double>(hits) / static_cast<double>(n));
    }
  }
}

TEST_CASE("belief score") {
  class Fixed final : public BeliefJudge {
  public:
    explicit Fixed(std::vector<double> s) : s_(std::move(s)) {}
    double score(const BeliefState& gt, const BeliefState&) const override {
      const auto i = std::stoul(gt.statements()[0].text);
      if (i >= s_.size()) fail(ErrorCode::MalformedJudgeOutput, "no score");
      return s_[i];
    }

  private:
    std::vector<double> s_;
  };
  const std::vector<BeliefState> g3 = {pos("0"), pos("1"), pos("2")};
  CHECK(belief_score(g3, g3, Fixed({1, 0.5, 0})) == doctest::Approx(50.0));
  const std::vector<BeliefState> g2 = {pos("0"), pos("1")};
  CHECK(belief_score(g2, g2, Fixed({0.5, 0.5})) == doctest::Approx(50.0));
  const LlmGateway g(mock());
  CHECK(belief_score(g3, g3, LlmJudge(g)) == 100.0);
  try {
    belief_score(g3, g3, Fixed({1, 1}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedJudgeOutput);
    CHECK(std::string(e.what()).find("instance 2") != std::string::npos);
  }
}

TEST_CASE("mean and population std") {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto m = mean_std(v);
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("labeled turns follow the decomposition rule") {
  const auto f = make_eval_fixture(true, true);
  const auto cases = labeled_turns(f->test);
  CHECK(cases.size() == 6);
  CHECK(cases[0].history.size() == 2);
  CHECK(cases[0].gold_strategy == eval_classes()[0].reply);
}

TEST_CASE("perfect mock and KB give 100 with zero spread") {
  const auto f = make_eval_fixture(true, true);
  const auto r = eval(*f, f->options);
  CHECK(r.n_turns == 6);
  CHECK(r.desire_accuracy == MeanStd{100, 0});
  CHECK(r.belief_accuracy == MeanStd{100, 0});
  CHECK(r.strategy_accuracy == MeanStd{100, 0});
  CHECK(r.config["blend"]["alpha"] == 0.5);
  CHECK(r.runs.size() == 3);
  CHECK(encode(r.runs[0][0]).dump() == encode(r.runs[2][0]).dump());
}

TEST_CASE("serial and parallel evaluation agree") {
  const auto f = make_eval_fixture(true, false);
  auto serial = f->options;
  serial.parallel = false;
  const auto a = eval(*f, f->options), b = eval(*f, serial);
  CHECK(encode(a, true).dump() == encode(b, true).dump());
}

TEST_CASE("split overlap names the shared dialogue") {
  auto f = make_eval_fixture(true, true);
  f->test.push_back(f->train[4]);
  try {
    eval(*f, f->options);
    FAIL("expected SplitOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SplitOverlap);
    CHECK(std::string(e.what()).find(f->train[4].id) != std::string::npos);
  }
}

TEST_CASE("grids") {
  const auto g = parse_grid("0:1:0.1");
  REQUIRE(g.size() == 11);
  CHECK(g[3] == 0.3);
  CHECK(g.back() == 1.0);
  CHECK(default_grid() == g);
  CHECK(parse_grid("0.5:0.5:0.1") == std::vector<double>{0.5});
  CHECK(code_of([] { parse_grid("0:2:0.1"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_grid("0:1"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_grid("a:1:0.1"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sweep endpoints follow whichever side is right") {
  const std::vector<double> grid = {0.0, 1.0};
  const RuleJudge judge;
  {
    const auto f = make_eval_fixture(true, false);
    const LlmGateway g(f->mock);
    const auto s = sweep_blend("alpha", grid, f->test, f->kb, f->embedder, g, judge, f->options);
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[0].report.desire_accuracy.mean == 100.0);
    CHECK(s.points[1].report.desire_accuracy.mean == 0.0);
    CHECK(s.backbone == "mock");
  }
  {
    const auto f = make_eval_fixture(false, true);
    const LlmGateway g(f->mock);
    const auto s = sweep_blend("alpha", grid, f->test, f->kb, f->embedder, g, judge, f->options);
    CHECK(s.points[0].report.desire_accuracy.mean == 0.0);
    CHECK(s.points[1].report.desire_accuracy.mean == 100.0);
  }
  {
    const auto f = make_eval_fixture(true, true);
    const LlmGateway g(f->mock);
    const std::vector<double> three = {0.0, 0.5, 1.0};
    for (const auto& p : sweep_blend("beta", three, f->test, f->kb, f->embedder, g, judge, f->options).points) {
      CHECK(p.report.desire_accuracy.mean == 100.0);
      CHECK(p.report.strategy_accuracy.mean == 100.0);
    }
  }
  const auto f = make_eval_fixture(true, true);
  const LlmGateway g(f->mock);
  const std::vector<double> bad = {0.5, 0.2};
  CHECK(code_of([&] { sweep_blend("alpha", bad, f->test, f->kb, f->embedder, g, judge, f->options); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { sweep_blend("gamma", grid, f->test, f->kb, f->embedder, g, judge, f->options); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("KB size ablation") {
  const auto f = make_eval_fixture(true, false, 8);
  const LlmGateway g(f->mock);
  const RuleJudge judge;
  auto o = f->options;
  o.cfg.alpha = 0;
  o.n_runs = 1;
  const std::vector<std::size_t> full = {f->kb.size()};
  const auto one = ablate_kb_size(full, 3, f->test, f->kb, f->embedder, g, judge, o);
  CHECK(encode(one[0].report).dump() == encode(run_static_eval(f->test, f->kb, f->embedder, g, judge, o)).dump());

  const std::vector<std::size_t> sizes = {3, 6, 12, 24};
  const auto a = ablate_kb_size(sizes, 3, f->test, f->kb, f->embedder, g, judge, o);
  const auto b = ablate_kb_size(sizes, 3, f->test, f->kb, f->embedder, g, judge, o);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CHECK(encode(a[i].report).dump() == encode(b[i].report).dump());
    if (i > 0) CHECK(a[i].report.desire_accuracy.mean >= a[i - 1].report.desire_accuracy.mean);
  }
  CHECK(a.back().report.desire_accuracy.mean == 100.0);
  const std::vector<std::size_t> too_big = {f->kb.size() + 1};
  CHECK(code_of([&] { ablate_kb_size(too_big, 3, f->test, f->kb, f->embedder, g, judge, o); }) == ErrorCode::SizeTooLarge);
}

TEST_CASE("summary ablation: raw-history summaries make both arms equal") {
  auto f = make_eval_fixture(true, false);
  const Summarizer raw = [](const DialogueHistory& h) { return DialogueSummary{render_history(h)}; };
  f->kb = build_knowledge_base(f->train, raw, f->embedder);
  f->options.summarizer = raw;
  f->options.cfg.alpha = 0;
  const LlmGateway g(f->mock);
  const RuleJudge judge;
  const auto r = ablate_summary(f->test, f->kb, f->embedder, g, judge, f->options);
  CHECK(r.with_summary.desire_accuracy == r.without_summary.desire_accuracy);
  CHECK(r.with_summary.strategy_accuracy == r.without_summary.strategy_accuracy);
  CHECK(r.with_summary.belief_accuracy == r.without_summary.belief_accuracy);
}

TEST_CASE("summary ablation: summaries that drop noise win") {
  // Persuader openers are long and carry vocabulary of another class; the
  // summarizer keeps only the persuadee line.
  auto f = std::make_unique<EvalFixture>();
  const char* noise[3] = {"gym gym gym membership discount offer offer offer today today",
                          "cleanup cleanup cleanup neighbors saturday saturday morning morning",
                          "meditation meditation breathing breathing calm calm mind mind"};
  const auto& cls = eval_classes();
  for (std::size_t c = 0; c < 3; ++c) {
    for (int k = 0; k < 6; ++k) {
      f->train.push_back(single_turn("train-" + std::to_string(c) + "-" + std::to_string(k), cls[c], cls[c].desire, noise[c]));
    }
    // test openers use the noise of the next class
    f->test.push_back(single_turn("test-" + std::to_string(c), cls[c], cls[c].desire, noise[(c + 1) % 3]));
    f->mock->script_contains(PromptKind::Belief, cls[c].line, {std::string(cls[c].belief) + ".", std::nullopt, false});
  }
  const Summarizer persuadee_only = [](const DialogueHistory& h) { return DialogueSummary{"y: " + h.back().text}; };
  f->kb = build_knowledge_base(f->train, persuadee_only, f->embedder);
  f->options.summarizer = persuadee_only;
  f->options.cfg.alpha = 0;
  f->options.cfg.beta = 0;
  f->options.n_runs = 1;
  const LlmGateway g(f->mock);
  const RuleJudge judge;
  const auto r = ablate_summary(f->test, f->kb, f->embedder, g, judge, f->options);
  CHECK(r.with_summary.desire_accuracy.mean > r.without_summary.desire_accuracy.mean);
  CHECK(r.with_summary.strategy_accuracy.mean > r.without_summary.strategy_accuracy.mean);
}

TEST_CASE("runtime report") {
  TurnInference a, b;
  a.traces[0].retrieval_seconds = 1.0;
  b.traces[0].retrieval_seconds = 1.0;
  a.traces[0].total_seconds = 1.5;
  b.traces[0].total_seconds = 2.5;
  const std::vector<TurnInference> turns = {a, b};
  const auto r = runtime_report(turns);
  CHECK(r.rows[0].retrieval_s == 2.0);
  CHECK(r.rows[0].avg_per_turn_s == 2.0);
  const auto text = format_runtime(r);
  CHECK(text.find("1st Think") != std::string::npos);
  CHECK(text.find("3rd Think") != std::string::npos);
  CHECK(code_of([] { runtime_report(std::vector<TurnInference>{}); }) == ErrorCode::Empty);
}

TEST_CASE("report config snapshot reproduces the report") {
  const auto f = make_eval_fixture(true, false);
  const auto r = eval(*f, f->options);
  auto o = f->options;
  o.cfg = decode_blend_config(r.config["blend"]);
  o.n_runs = r.config["n_runs"].get<std::size_t>();
  o.mode = eval_mode_from_string(r.config["mode"].get<std::string>());
  CHECK(encode(eval(*f, o), true).dump() == encode(r, true).dump());
}

TEST_CASE("gold-state mode") {
  const auto f = make_eval_fixture(true, false);
  auto o = f->options;
  o.mode = EvalMode::GoldState;
  const auto r = eval(*f, o);
  CHECK(r.config["mode"] == "gold-state");
  CHECK(r.strategy_accuracy.mean == 100.0);
}
