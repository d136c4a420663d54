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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "uqrl/errors.hpp"
#include "uqrl/metrics.hpp"

using namespace uqrl;
using doctest::Approx;

namespace {

TokenDistribution full(std::vector<double> p, std::size_t chosen = 0) {
  const std::size_t n = p.size();
  return TokenDistribution::top_k(std::move(p), n, 0.0, chosen);
}

}  // namespace

TEST_CASE("entropy of reference distributions") {
  CHECK(entropy_uncertainty(full({0.25, 0.25, 0.25, 0.25})) == Approx(1.0).epsilon(1e-12));
  CHECK(entropy_uncertainty(full({1, 0, 0, 0})) == 0.0);
  // -(0.7 ln 0.7 + 3 * 0.1 ln 0.1) / ln 4, evaluated at 50 digits.
  CHECK(std::abs(entropy_uncertainty(full({0.7, 0.1, 0.1, 0.1})) - 0.6783898247) < 1e-9);
  CHECK(std::abs(entropy_uncertainty(full({0.7, 0.1, 0.1, 0.1})) - 0.678385) < 1e-5);
}

TEST_CASE("entropy spreads residual mass over uncovered tokens") {
  const auto topk = TokenDistribution::top_k({0.4, 0.2}, 6, 0.4, 0);
  const auto expanded = full({0.4, 0.2, 0.1, 0.1, 0.1, 0.1});
  CHECK(entropy_uncertainty(topk) == Approx(entropy_uncertainty(expanded)).epsilon(1e-12));
}

TEST_CASE("entropy needs at least two vocabulary entries") {
  CHECK_THROWS_AS(entropy_uncertainty(full({1.0})), InvalidInput);
}

TEST_CASE("least confidence uses the top probability") {
  CHECK(least_confidence_uncertainty(full({1.0})) == 0.0);
  CHECK(least_confidence_uncertainty(full({0.9, 0.1})) == Approx(0.1).epsilon(1e-12));
  CHECK(least_confidence_uncertainty(full({0.4, 0.35, 0.25}, 2)) == Approx(0.6).epsilon(1e-12));
}

TEST_CASE("margin of reference gaps") {
  for (double s : {0.1, 1.0, 5.0}) CHECK(margin_uncertainty(full({1, 0, 0}), s) == 0.5);
  // sigma(1) and sigma(0.7) at 50 digits.
  CHECK(std::abs(margin_uncertainty(full({0.5, 0.5}), 1.0) - 0.7310585786300049) < 1e-12);
  CHECK(std::abs(margin_uncertainty(full({0.6, 0.3, 0.1}), 1.0) - 0.6681877721681662) < 1e-12);
}

TEST_CASE("margin second probability falls back to residual mass") {
  const auto d = TokenDistribution::top_k({0.7}, 10, 0.3, 0);
  CHECK(d.top2() == 0.3);
  CHECK(margin_uncertainty(d) == Approx(1.0 / (1.0 + std::exp(-0.6))).epsilon(1e-12));
  CHECK(full({1.0}).top2() == 0.0);
}

TEST_CASE("aggregate is the weighted combination") {
  CHECK(combine({0.6, 0.3, 0.6}, UncertaintyWeights(1, 1, 1)) == Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(combine({0.678385, 0.3, 0.668188}, UncertaintyWeights(0.5, 0.25, 0.25)) -
                 0.581240) < 1e-5);

  const auto d = full({0.7, 0.1, 0.1, 0.1});
  CHECK(aggregate_token_uncertainty(d, UncertaintyWeights(1, 0, 0)) == entropy_uncertainty(d));
  CHECK(aggregate_token_uncertainty(d, UncertaintyWeights(0, 2, 0)) ==
        least_confidence_uncertainty(d));
  CHECK(aggregate_token_uncertainty(d, UncertaintyWeights(0, 0, 1, 2.0)) ==
        margin_uncertainty(d, 2.0));
}

TEST_CASE("weights are normalized and validated") {
  const UncertaintyWeights w(2, 1, 1, 0.5);
  CHECK(w.entropy() == 0.5);
  CHECK(w.least_confidence() == 0.25);
  CHECK(w.margin() == 0.25);
  CHECK(w.margin_scale() == 0.5);
  const UncertaintyWeights def;
  CHECK(def.entropy() + def.least_confidence() + def.margin() == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(UncertaintyWeights(-1, 1, 1), InvalidConfig);
  CHECK_THROWS_AS(UncertaintyWeights(0, 0, 0), InvalidConfig);
  CHECK_THROWS_AS(UncertaintyWeights(1, 1, 1, 0.0), InvalidConfig);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(TokenDistribution::top_k({}, 3, 1.0, 0), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.3, 0.7}, 2, 0.0, 0), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.5, 0.4}, 2, 0.0, 0), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.5, 0.5}, 2, 0.0, 2), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.5, 0.3}, 2, 0.2, 0), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.5, 0.5}, 1, 0.0, 0), InvalidInput);
  CHECK_THROWS_AS(TokenDistribution::top_k({0.5}, 4, 1.5, 0), InvalidInput);
  CHECK_NOTHROW(TokenDistribution::top_k({0.5, 0.5 - 5e-10}, 2, 0.0, 0));
}

TEST_CASE("from_token_probs sorts with ties broken by token id") {
  const std::vector<double> by_token = {0.1, 0.3, 0.3, 0.3};
  std::vector<int> order;
  const auto d = TokenDistribution::from_token_probs(by_token, 3, &order);
  CHECK(order == std::vector<int>{1, 2, 3, 0});
  CHECK(d.chosen_rank == 2);
  CHECK(d.vocab_size == 4);
  CHECK(d.residual_mass == 0.0);
}

TEST_CASE("properties over random distributions") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto d = oracle::random_distribution(rng);
    const double s = 0.5 + rng.uniform();
    const double e = entropy_uncertainty(d), l = least_confidence_uncertainty(d),
                 m = margin_uncertainty(d, s);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
    CHECK(m >= 0.5);
    // A lone listed probability is compared against the residual mass, which
    // may exceed it.
    const double max_gap = d.probs.size() == 1 ? 2.0 : 1.0;
    CHECK(m <= 1.0 / (1.0 + std::exp(-max_gap / s)) + 1e-15);
    CHECK(std::abs(e - static_cast<double>(oracle::entropy(d))) < 1e-12);

    const UncertaintyWeights w(rng.uniform(), rng.uniform(), rng.uniform() + 0.01, s);
    const double hand = w.entropy() * e + w.least_confidence() * l + w.margin() * m;
    CHECK(std::abs(aggregate_token_uncertainty(d, w) - hand) < 1e-12);
  }
}

TEST_CASE("entropy is permutation invariant and maximal only at uniform") {
  Rng rng(29);
  for (int i = 0; i < 300; ++i) {
    const std::size_t V = 2 + rng.below(20);
    std::vector<double> p(V);
    double total = 0.0;
    for (auto& x : p) total += (x = rng.uniform() + 0.01);
    for (auto& x : p) x /= total;
    const double h = entropy_uncertainty(TokenDistribution::from_token_probs(p, 0));
    std::vector<double> shuffled = p;
    for (std::size_t k = V; k > 1; --k) std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
    CHECK(entropy_uncertainty(TokenDistribution::from_token_probs(shuffled, 0)) ==
          Approx(h).epsilon(1e-12));
    const bool uniform = std::all_of(p.begin(), p.end(),
                                     [&](double x) { return std::abs(x - p[0]) < 1e-12; });
    if (!uniform) CHECK(h < 1.0 - 1e-9);
  }
  const std::vector<double> u(7, 1.0 / 7.0);
  CHECK(entropy_uncertainty(TokenDistribution::from_token_probs(u, 0)) ==
        Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sharpening the top token never raises least confidence or margin") {
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const std::size_t V = 2 + rng.below(10);
    std::vector<double> p(V);
    double total = 0.0;
    for (auto& x : p) total += (x = rng.uniform() + 0.01);
    for (auto& x : p) x /= total;
    std::sort(p.begin(), p.end(), std::greater<>());
    // Move a fraction of the remaining mass onto the top token.
    const double f = rng.uniform();
    std::vector<double> q = p;
    const double rest = 1.0 - p[0];
    q[0] = p[0] + f * rest;
    for (std::size_t k = 1; k < V; ++k) q[k] = p[k] * (1.0 - f);
    const auto a = full(p), b = full(q);
    CHECK(least_confidence_uncertainty(b) <= least_confidence_uncertainty(a) + 1e-15);
    CHECK(margin_uncertainty(b) <= margin_uncertainty(a) + 1e-15);
  }
}

TEST_CASE("full mode and top-k with k equal to the vocabulary agree") {
  Rng rng(37);
  for (int i = 0; i < 200; ++i) {
    const std::size_t V = 2 + rng.below(30);
    std::vector<double> p(V);
    double total = 0.0;
    for (auto& x : p) total += (x = rng.uniform());
    for (auto& x : p) x /= total;
    const auto a = TokenDistribution::from_token_probs(p, 0);
    const auto b = TokenDistribution::top_k(a.probs, V, 0.0, a.chosen_rank);
    const UncertaintyWeights w;
    CHECK(std::abs(aggregate_token_uncertainty(a, w) - aggregate_token_uncertainty(b, w)) < 1e-12);
  }
}
