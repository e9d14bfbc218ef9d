#include "ttbys/serialization.hpp"

#include "ttbys/error.hpp"

namespace ttbys {

const json& require(const json& object, const char* key) {
  if (!object.is_object()) fail(ErrorCode::Parse, std::string("expected an object holding '") + key + "'");
  const auto it = object.find(key);
  if (it == object.end()) fail(ErrorCode::Parse, std::string("missing field '") + key + "'");
  return *it;
}

namespace {

std::string require_string(const json& object, const char* key) {
  const json& v = require(object, key);
  if (!v.is_string()) fail(ErrorCode::Parse, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

json encode(const Utterance& u) {
  return {{"role", std::string(to_string(u.role))}, {"text", u.text}};
}

json encode(const DialogueHistory& h) {
  json arr = json::array();
  for (const auto& u : h.utterances) arr.push_back(encode(u));
  return arr;
}

json encode(const BeliefStatement& s) {
  return {{"polarity", std::string(to_string(s.polarity))}, {"text", s.text}};
}

json encode(const BeliefState& b) {
  json arr = json::array();
  for (const auto& s : b.statements()) arr.push_back(encode(s));
  return arr;
}

json encode_desire(DesireLevel d) { return d.value(); }

json encode_strategy(Strategy s) { return std::string(name_of(s)); }

Utterance decode_utterance(const json& j) {
  return Utterance{role_from_string(require_string(j, "role")), require_string(j, "text")};
}

DialogueHistory decode_history(const json& j) {
  if (!j.is_array()) fail(ErrorCode::Parse, "history must be an array");
  DialogueHistory h;
  h.utterances.reserve(j.size());
  for (const auto& u : j) h.utterances.push_back(decode_utterance(u));
  return h;
}

BeliefStatement decode_belief_statement(const json& j) {
  return BeliefStatement{polarity_from_string(require_string(j, "polarity")), require_string(j, "text")};
}

BeliefState decode_belief(const json& j) {
  if (!j.is_array()) fail(ErrorCode::Parse, "belief must be an array");
  std::vector<BeliefStatement> statements;
  statements.reserve(j.size());
  for (const auto& s : j) statements.push_back(decode_belief_statement(s));
  return BeliefState(std::move(statements));
}

DesireLevel decode_desire(const json& j) {
  if (!j.is_number_integer()) fail(ErrorCode::Parse, "desire must be an integer");
  return DesireLevel::from_int(j.get<int>());
}

Strategy decode_strategy(const json& j) {
  if (!j.is_string()) fail(ErrorCode::Parse, "strategy must be a string");
  return strategy_from_string(j.get<std::string>());
}

}  // namespace ttbys
