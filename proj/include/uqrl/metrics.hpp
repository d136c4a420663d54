// Copyright 2026 The uqrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UQRL_METRICS_HPP_
#define UQRL_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace uqrl {

inline constexpr double kDistributionTolerance = 1e-9;

// One decoding step's probability vector. `probs` holds either the full
// vocabulary or its top-k prefix, sorted descending; whatever mass is not
// listed is carried in `residual_mass`.
struct TokenDistribution {
  std::vector<double> probs;
  std::size_t vocab_size = 0;
  double residual_mass = 0.0;
  std::size_t chosen_rank = 0;

  // Throws InvalidInput when any invariant is violated.
  void validate() const;

  // Builds a full-vocabulary distribution from probabilities indexed by
  // token id. The result is sorted descending with ties broken by token id;
  // `order`, when given, receives the token id at each rank.
  static TokenDistribution from_token_probs(std::span<const double> by_token,
                                            std::size_t chosen_token,
                                            std::vector<int>* order = nullptr);

  // Validated top-k constructor.
  static TokenDistribution top_k(std::vector<double> probs_desc,
                                 std::size_t vocab_size, double residual_mass,
                                 std::size_t chosen_rank);

  double top1() const { return probs.front(); }
  double top2() const;
};

// Normalized mixing weights for the three metrics plus the margin scale.
class UncertaintyWeights {
 public:
  UncertaintyWeights() = default;
  // Weights are renormalized to sum to one. Negative weights, an all-zero
  // weight vector or a non-positive scale throw InvalidConfig.
  UncertaintyWeights(double w_ent, double w_lc, double w_mar,
                     double margin_scale = 1.0);

  double entropy() const { return w_ent_; }
  double least_confidence() const { return w_lc_; }
  double margin() const { return w_mar_; }
  double margin_scale() const { return s_; }

 private:
  double w_ent_ = 1.0 / 3.0;
  double w_lc_ = 1.0 / 3.0;
  double w_mar_ = 1.0 / 3.0;
  double s_ = 1.0;
};

struct MetricComponents {
  double entropy = 0.0;
  double least_confidence = 0.0;
  double margin = 0.0;
};

// Shannon entropy over log|V|, in [0, 1]. Residual mass of a top-k
// distribution is spread uniformly over the uncovered tokens.
double entropy_uncertainty(const TokenDistribution& d);

// 1 - p(1).
double least_confidence_uncertainty(const TokenDistribution& d);

// sigmoid((1 - (p(1) - p(2))) / s); lies in [0.5, sigmoid(1/s)].
double margin_uncertainty(const TokenDistribution& d, double margin_scale = 1.0);

MetricComponents metric_components(const TokenDistribution& d,
                                   double margin_scale = 1.0);

double combine(const MetricComponents& c, const UncertaintyWeights& w);

double aggregate_token_uncertainty(const TokenDistribution& d,
                                   const UncertaintyWeights& w);

}  // namespace uqrl

#endif  // UQRL_METRICS_HPP_
