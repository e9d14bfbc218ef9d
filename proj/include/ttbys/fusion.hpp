#pragma once
// Categorical distributions over desire or strategy labels: the
// experience-driven distribution, the model distribution read from
// first-token log-probabilities, linear blending and argmax.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ttbys/core_types.hpp"
#include "ttbys/error.hpp"
#include "ttbys/llm_gateway.hpp"
#include "ttbys/serialization.hpp"

namespace ttbys {

inline constexpr double kDefaultFloor = 1e-6;

/// Labels are kept in canonical order; probs are parallel to labels.
template <class Label>
struct CategoricalDistribution {
  std::vector<Label> labels;
  std::vector<double> probs;

  double prob(Label label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return probs[i];
    }
    fail(ErrorCode::LabelMismatch, "label not in distribution");
  }
  double sum() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  friend bool operator==(const CategoricalDistribution&, const CategoricalDistribution&) = default;
};

using DesireDistribution = CategoricalDistribution<DesireLevel>;
using StrategyDistribution = CategoricalDistribution<Strategy>;

/// Single-character label the model emits for each label type.
inline char label_char(DesireLevel d) { return letter_of(d); }
inline char label_char(Strategy s) { return letter_of(s); }

/// prob(l) = count(l) / |labels|. Throws EmptyRetrieval when `observed` is
/// empty and LabelMismatch when it holds a label outside `space`.
template <class Label>
CategoricalDistribution<Label> experience_distribution(std::span<const Label> observed,
                                                       std::span<const Label> space) {
  if (observed.empty()) fail(ErrorCode::EmptyRetrieval, "no retrieved experiences to count");
  CategoricalDistribution<Label> out{{space.begin(), space.end()}, std::vector<double>(space.size(), 0.0)};
  std::vector<std::size_t> counts(space.size(), 0);
  for (const Label& l : observed) {
    std::size_t i = 0;
    while (i < space.size() && !(space[i] == l)) ++i;
    if (i == space.size()) fail(ErrorCode::LabelMismatch, "retrieved label outside the label space");
    ++counts[i];
  }
  const double n = static_cast<double>(observed.size());
  for (std::size_t i = 0; i < space.size(); ++i) out.probs[i] = static_cast<double>(counts[i]) / n;
  return out;
}

/// exp() of the present labels, `floor` for absent ones, renormalized.
template <class Label>
CategoricalDistribution<Label> model_distribution(const LabelLogprobs& lp, std::span<const Label> space,
                                                  double floor = kDefaultFloor) {
  if (!(floor > 0.0)) fail(ErrorCode::InvalidArgument, "floor must be positive");
  if (space.empty()) fail(ErrorCode::NoMass, "empty label space");
  CategoricalDistribution<Label> out{{space.begin(), space.end()}, std::vector<double>(space.size(), floor)};
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto it = lp.entries.find(label_char(space[i]));
    if (it != lp.entries.end()) out.probs[i] = std::exp(it->second);
  }
  const double total = out.sum();
  if (!(total > 0.0)) fail(ErrorCode::NoMass, "model distribution has no mass");
  for (double& p : out.probs) p /= total;
  return out;
}

/// coeff * p_model + (1 - coeff) * p_exp.
template <class Label>
CategoricalDistribution<Label> blend(const CategoricalDistribution<Label>& p_model,
                                     const CategoricalDistribution<Label>& p_exp, double coeff) {
  if (!(coeff >= 0.0 && coeff <= 1.0)) fail(ErrorCode::InvalidArgument, "blend coefficient outside [0, 1]");
  if (p_model.labels != p_exp.labels || p_model.probs.size() != p_exp.probs.size()) {
    fail(ErrorCode::LabelMismatch, "distributions are over different label orders");
  }
  CategoricalDistribution<Label> out{p_model.labels, std::vector<double>(p_model.probs.size())};
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    // Exact endpoints: 0 * x + 1 * y must give y bit for bit.
    if (coeff == 1.0) {
      out.probs[i] = p_model.probs[i];
    } else if (coeff == 0.0) {
      out.probs[i] = p_exp.probs[i];
    } else {
      out.probs[i] = coeff * p_model.probs[i] + (1.0 - coeff) * p_exp.probs[i];
    }
  }
  return out;
}

/// First label (canonical order) with the maximum probability.
template <class Label>
Label argmax_label(const CategoricalDistribution<Label>& p) {
  if (p.labels.empty()) fail(ErrorCode::NoMass, "empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.probs.size(); ++i) {
    if (p.probs[i] > p.probs[best]) best = i;
  }
  return p.labels[best];
}

struct BlendConfig {
  double alpha = 0.5;
  double beta = 0.3;
  std::size_t n_first = 5;
  std::size_t n_second = 5;
  std::size_t n_third = 10;
  double floor = kDefaultFloor;

  void validate() const;
  friend bool operator==(const BlendConfig&, const BlendConfig&) = default;
};

json encode(const BlendConfig& cfg);
BlendConfig decode_blend_config(const json& j);

/// {"labels": [...], "probs": [...]} with probabilities rounded to 6 places.
json encode(const DesireDistribution& d);
json encode(const StrategyDistribution& d);
DesireDistribution decode_desire_distribution(const json& j);
StrategyDistribution decode_strategy_distribution(const json& j);

/// Rounds to 6 decimal places, as printed in traces.
double round6(double value);

}  // namespace ttbys
