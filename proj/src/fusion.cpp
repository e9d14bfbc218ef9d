#include "ttbys/fusion.hpp"

#include <cmath>

namespace ttbys {

void BlendConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(alpha)) fail(ErrorCode::InvalidArgument, "alpha must be in [0, 1]");
  if (!unit(beta)) fail(ErrorCode::InvalidArgument, "beta must be in [0, 1]");
  if (n_first == 0 || n_second == 0 || n_third == 0) {
    fail(ErrorCode::InvalidArgument, "retrieval sizes must be positive");
  }
  if (!(floor > 0.0)) fail(ErrorCode::InvalidArgument, "floor must be positive");
}

json encode(const BlendConfig& cfg) {
  return {{"alpha", cfg.alpha}, {"beta", cfg.beta},   {"n_first", cfg.n_first},
          {"n_second", cfg.n_second}, {"n_third", cfg.n_third}, {"floor", cfg.floor}};
}

BlendConfig decode_blend_config(const json& j) {
  BlendConfig cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.n_first = j.value("n_first", cfg.n_first);
  cfg.n_second = j.value("n_second", cfg.n_second);
  cfg.n_third = j.value("n_third", cfg.n_third);
  cfg.floor = j.value("floor", cfg.floor);
  cfg.validate();
  return cfg;
}

double round6(double value) { return std::round(value * 1e6) / 1e6; }

namespace {

template <class Label, class Enc>
json encode_dist(const CategoricalDistribution<Label>& d, Enc enc) {
  json labels = json::array();
  json probs = json::array();
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    labels.push_back(enc(d.labels[i]));
    probs.push_back(round6(d.probs[i]));
  }
  return {{"labels", labels}, {"probs", probs}};
}

template <class Label, class Dec>
CategoricalDistribution<Label> decode_dist(const json& j, Dec dec) {
  CategoricalDistribution<Label> d;
  const auto& labels = require(j, "labels");
  const auto& probs = require(j, "probs");
  if (labels.size() != probs.size()) fail(ErrorCode::Parse, "labels and probs differ in length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.labels.push_back(dec(labels[i]));
    d.probs.push_back(probs[i].get<double>());
  }
  return d;
}

}  // namespace

json encode(const DesireDistribution& d) { return encode_dist(d, encode_desire); }
json encode(const StrategyDistribution& d) { return encode_dist(d, encode_strategy); }

DesireDistribution decode_desire_distribution(const json& j) {
  return decode_dist<DesireLevel>(j, decode_desire);
}
StrategyDistribution decode_strategy_distribution(const json& j) {
  return decode_dist<Strategy>(j, decode_strategy);
}

}  // namespace ttbys
