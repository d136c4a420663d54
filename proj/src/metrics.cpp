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

#include "uqrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void TokenDistribution::validate() const {
  if (probs.empty()) throw InvalidInput("token distribution has no probabilities");
  if (vocab_size < probs.size())
    throw InvalidInput("vocab_size " + std::to_string(vocab_size) +
                       " smaller than listed probabilities " +
                       std::to_string(probs.size()));
  if (!(residual_mass >= 0.0 && residual_mass <= 1.0))
    throw InvalidInput("residual_mass outside [0,1]");
  if (chosen_rank >= probs.size())
    throw InvalidInput("chosen_rank " + std::to_string(chosen_rank) +
                       " out of range");
  double total = residual_mass;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("probability outside [0,1]");
    if (i > 0 && p > probs[i - 1])
      throw InvalidInput("probabilities not sorted descending at rank " +
                         std::to_string(i));
    total += p;
  }
  if (std::abs(total - 1.0) > kDistributionTolerance)
    throw InvalidInput("probabilities sum to " + std::to_string(total) +
                       " (with residual), expected 1");
  if (vocab_size == probs.size() && residual_mass > kDistributionTolerance)
    throw InvalidInput("full distribution carries residual mass");
}

TokenDistribution TokenDistribution::from_token_probs(
    std::span<const double> by_token, std::size_t chosen_token,
    std::vector<int>* order) {
  if (chosen_token >= by_token.size())
    throw InvalidInput("chosen token outside vocabulary");
  std::vector<int> idx(by_token.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return by_token[a] > by_token[b]; });
  TokenDistribution d;
  d.vocab_size = by_token.size();
  d.probs.reserve(by_token.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    d.probs.push_back(by_token[idx[r]]);
    if (static_cast<std::size_t>(idx[r]) == chosen_token) d.chosen_rank = r;
  }
  if (order) *order = std::move(idx);
  return d;
}

TokenDistribution TokenDistribution::top_k(std::vector<double> probs_desc,
                                           std::size_t vocab_size,
                                           double residual_mass,
                                           std::size_t chosen_rank) {
  TokenDistribution d{std::move(probs_desc), vocab_size, residual_mass,
                      chosen_rank};
  d.validate();
  return d;
}

double TokenDistribution::top2() const {
  if (probs.size() >= 2) return probs[1];
  // Only p(1) was logged: the residual is the best available stand-in.
  return residual_mass > 0.0 ? residual_mass : 0.0;
}

UncertaintyWeights::UncertaintyWeights(double w_ent, double w_lc, double w_mar,
                                       double margin_scale) {
  if (!(w_ent >= 0.0 && w_lc >= 0.0 && w_mar >= 0.0))
    throw InvalidConfig("uncertainty weights must be non-negative");
  const double sum = w_ent + w_lc + w_mar;
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw InvalidConfig("uncertainty weights must have a positive finite sum");
  if (!(margin_scale > 0.0) || !std::isfinite(margin_scale))
    throw InvalidConfig("margin scale must be positive");
  w_ent_ = w_ent / sum;
  w_lc_ = w_lc / sum;
  w_mar_ = w_mar / sum;
  s_ = margin_scale;
}

double entropy_uncertainty(const TokenDistribution& d) {
  if (d.vocab_size < 2)
    throw InvalidInput("entropy needs a vocabulary of at least two tokens");
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  const std::size_t uncovered = d.vocab_size - d.probs.size();
  if (uncovered > 0 && d.residual_mass > 0.0) {
    const double each = d.residual_mass / static_cast<double>(uncovered);
    h -= d.residual_mass * std::log(each);
  }
  return clamp01(h / std::log(static_cast<double>(d.vocab_size)));
}

double least_confidence_uncertainty(const TokenDistribution& d) {
  return clamp01(1.0 - d.top1());
}

double margin_uncertainty(const TokenDistribution& d, double margin_scale) {
  const double gap = d.top1() - d.top2();
  return sigmoid((1.0 - gap) / margin_scale);
}

MetricComponents metric_components(const TokenDistribution& d,
                                   double margin_scale) {
  return {entropy_uncertainty(d), least_confidence_uncertainty(d),
          margin_uncertainty(d, margin_scale)};
}

double combine(const MetricComponents& c, const UncertaintyWeights& w) {
  return w.entropy() * c.entropy + w.least_confidence() * c.least_confidence +
         w.margin() * c.margin;
}

double aggregate_token_uncertainty(const TokenDistribution& d,
                                   const UncertaintyWeights& w) {
  // Skip metrics with zero weight so degenerate single-metric rows do not
  // depend on the others' preconditions.
  double u = 0.0;
  if (w.entropy() > 0.0) u += w.entropy() * entropy_uncertainty(d);
  if (w.least_confidence() > 0.0)
    u += w.least_confidence() * least_confidence_uncertainty(d);
  if (w.margin() > 0.0) u += w.margin() * margin_uncertainty(d, w.margin_scale());
  return clamp01(u);
}

}  // namespace uqrl
