#include <doctest.h>

#include <map>

#include "support/fixtures.hpp"
#include "ttbys/core_types.hpp"
#include "ttbys/error.hpp"
#include "ttbys/serialization.hpp"

using namespace ttbys;
using ttbys::testing::history_of;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ttbys::Error");
  return ErrorCode::Empty;
}

}  // namespace

TEST_CASE("strategy letters") {
  CHECK(strategy_from_letter('A') == Strategy::AffirmationAndReassurance);
  CHECK(strategy_from_letter('T') == Strategy::TaskInquiry);
  CHECK(code_of([] { strategy_from_letter('Z'); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("strategy letter round trip and canonical order") {
  const std::string expected = "ARPVELGIT";
  std::string got;
  for (Strategy s : all_strategies()) {
    got += letter_of(s);
    CHECK(strategy_from_letter(letter_of(s)) == s);
    CHECK(strategy_from_string(name_of(s)) == s);
  }
  CHECK(got == expected);
}

TEST_CASE("strategy categories split 3/5/1") {
  std::map<StrategyCategory, int> sizes;
  for (Strategy s : all_strategies()) ++sizes[category_of(s)];
  CHECK(sizes[StrategyCategory::SocioEmotional] == 3);
  CHECK(sizes[StrategyCategory::Cognitive] == 5);
  CHECK(sizes[StrategyCategory::Interactive] == 1);
  CHECK(category_of(Strategy::TaskInquiry) == StrategyCategory::Interactive);
}

TEST_CASE("desire letters form a bijection") {
  CHECK(desire_from_letter('A').value() == -1);
  CHECK(desire_from_letter('B').value() == 0);
  CHECK(desire_from_letter('C').value() == 1);
  CHECK(code_of([] { desire_from_letter('D'); }) == ErrorCode::UnknownLabel);
  for (DesireLevel d : all_desires()) CHECK(desire_from_letter(letter_of(d)) == d);
  CHECK(code_of([] { DesireLevel::from_int(2); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("history validation") {
  CHECK_NOTHROW(validate_history(history_of({"Hi", "Hello"})));
  CHECK(code_of([] { validate_history(DialogueHistory{}); }) == ErrorCode::EmptyHistory);
  DialogueHistory twice;
  twice.utterances = {{Role::Persuadee, "a"}, {Role::Persuadee, "b"}};
  CHECK(code_of([&] { validate_history(twice); }) == ErrorCode::NonAlternatingRoles);
  CHECK(code_of([] { validate_history(history_of({"Hi", "   "})); }) == ErrorCode::EmptyUtterance);
  CHECK(code_of([] { validate_inference_history(history_of({"Hi", "Hello", "So?"})); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("history key is stable and content sensitive") {
  const auto a = history_of({"Hi", "Hello"});
  CHECK(history_key(a) == history_key(history_of({"Hi", "Hello"})));
  CHECK(history_key(a) != history_key(history_of({"Hi", "Hello!"})));
}

TEST_CASE("belief state drops duplicates and renders text") {
  BeliefState b({{Polarity::Positive, "fun"}, {Polarity::Negative, "cost"}, {Polarity::Positive, "fun"}});
  CHECK(b.size() == 2);
  CHECK(b.text() == "positive: fun; negative: cost");
}

TEST_CASE("json codecs round trip") {
  const auto h = history_of({"Hi", "Hello"});
  CHECK(decode_history(encode(h)) == h);
  const BeliefState b({{Polarity::Negative, "too far"}});
  CHECK(decode_belief(encode(b)) == b);
  CHECK(decode_desire(encode_desire(DesireLevel::willing())) == DesireLevel::willing());
  CHECK(decode_strategy(encode_strategy(Strategy::LogicalAppeal)) == Strategy::LogicalAppeal);
  CHECK(decode_strategy(json("L")) == Strategy::LogicalAppeal);
  CHECK(code_of([] { decode_utterance(json{{"text", "x"}}); }) == ErrorCode::Parse);
}

TEST_CASE("error stage attribution") {
  const Error e(ErrorCode::NoMass, "boom");
  const Error staged = e.with_stage("third");
  CHECK(staged.code() == ErrorCode::NoMass);
  CHECK(staged.stage() == "third");
  CHECK(std::string(staged.what()).find("[third]") != std::string::npos);
}
