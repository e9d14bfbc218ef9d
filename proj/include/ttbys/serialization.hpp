#pragma once
// JSON encoding of the core vocabulary. Records on disk and over HTTP share
// these encodings.

#include <json.hpp>

#include "ttbys/core_types.hpp"

namespace ttbys {

using json = nlohmann::json;

json encode(const Utterance& u);
json encode(const DialogueHistory& h);
json encode(const BeliefStatement& s);
json encode(const BeliefState& b);
json encode_desire(DesireLevel d);
json encode_strategy(Strategy s);

Utterance decode_utterance(const json& j);
DialogueHistory decode_history(const json& j);
BeliefStatement decode_belief_statement(const json& j);
BeliefState decode_belief(const json& j);
DesireLevel decode_desire(const json& j);
/// Accepts the full technique name or its letter.
Strategy decode_strategy(const json& j);

/// Typed field access that reports the missing/ill-typed key by name.
const json& require(const json& object, const char* key);

}  // namespace ttbys
