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

// Test-only reference computations. Everything here is written directly
// from the defining formulas in extended precision and shares no code with
// the library beyond the data types.

#ifndef UQRL_TESTS_ORACLES_HPP_
#define UQRL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "uqrl/metrics.hpp"
#include "uqrl/policy.hpp"
#include "uqrl/rng.hpp"

namespace uqrl::oracle {

using real = long double;

inline real entropy(const TokenDistribution& d) {
  real h = 0;
  for (double p : d.probs)
    if (p > 0) h -= static_cast<real>(p) * std::log(static_cast<real>(p));
  const std::size_t uncovered = d.vocab_size - d.probs.size();
  if (d.residual_mass > 0 && uncovered > 0) {
    const real q = static_cast<real>(d.residual_mass) / uncovered;
    h -= static_cast<real>(d.residual_mass) * std::log(q);
  }
  const real u = h / std::log(static_cast<real>(d.vocab_size));
  return std::clamp<real>(u, 0, 1);
}

inline real least_confidence(const TokenDistribution& d) {
  return 1 - static_cast<real>(d.probs[0]);
}

inline real sigmoid(real x) { return 1 / (1 + std::exp(-x)); }

inline real margin(const TokenDistribution& d, real s) {
  const real p1 = d.probs[0];
  const real p2 = d.probs.size() > 1 ? d.probs[1] : d.residual_mass;
  return sigmoid((1 - (p1 - p2)) / s);
}

inline real aggregate(const TokenDistribution& d, real we, real wl, real wm,
                      real s) {
  const real n = we + wl + wm;
  return (we * entropy(d) + wl * least_confidence(d) + wm * margin(d, s)) / n;
}

// sum_t lambda^(T-t) u_t / sum_t lambda^(T-t) with explicit powers.
inline real discounted_mean(std::span<const double> u, real lambda) {
  const std::size_t T = u.size();
  real num = 0, den = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    const real w = std::pow(lambda, static_cast<real>(T - t));
    num += w * u[t - 1];
    den += w;
  }
  return num / den;
}

// log pi(token | state, pos) from the raw logit table.
inline real log_prob(const PolicyParams& p, int state, int pos, int token) {
  const std::size_t V = p.vocab_size;
  const double* row = p.logits.data() + (static_cast<std::size_t>(state) * 2 + pos) * V;
  real mx = row[0];
  for (std::size_t k = 1; k < V; ++k) mx = std::max<real>(mx, row[k]);
  real z = 0;
  for (std::size_t k = 0; k < V; ++k) z += std::exp(static_cast<real>(row[k]) - mx);
  return static_cast<real>(row[token]) - mx - std::log(z);
}

inline real objective(const PolicyParams& p, std::span<const GradientSample> b) {
  real j = 0;
  for (const auto& s : b)
    for (int pos = 0; pos < 2; ++pos)
      j += static_cast<real>(s.advantage) * log_prob(p, s.state, pos, s.tokens[pos]);
  return j;
}

// Random valid distribution. Roughly a third are full-vocabulary, the rest
// top-k with the tail folded into residual_mass; a few are one-hot or
// contain exact ties.
inline TokenDistribution random_distribution(Rng& rng, std::size_t max_vocab = 64) {
  const std::size_t V = 2 + rng.below(max_vocab - 1);
  std::vector<double> w(V);
  const int kind = static_cast<int>(rng.below(10));
  for (auto& x : w) {
    const double u = 1.0 - rng.uniform();
    x = kind == 0 ? 1.0 : -std::log(u) * std::pow(rng.uniform(), 2.0);
  }
  if (kind == 1) {
    std::fill(w.begin(), w.end(), 0.0);
    w[0] = 1.0;
  }
  real total = 0;
  for (double x : w) total += x;
  if (total == 0) {
    w[0] = 1.0;
    total = 1.0;
  }
  std::vector<double> p(V);
  for (std::size_t i = 0; i < V; ++i) p[i] = static_cast<double>(w[i] / total);
  std::sort(p.begin(), p.end(), std::greater<>());
  const bool full = rng.below(3) == 0;
  const std::size_t k = full ? V : 1 + rng.below(V);
  TokenDistribution d;
  d.vocab_size = V;
  d.probs.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k));
  real listed = 0;
  for (double x : d.probs) listed += x;
  d.residual_mass = k == V ? 0.0 : std::max<double>(0.0, static_cast<double>(1 - listed));
  d.chosen_rank = rng.below(k);
  return d;
}

}  // namespace uqrl::oracle

#endif  // UQRL_TESTS_ORACLES_HPP_
