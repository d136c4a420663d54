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

// Serial vs OpenMP throughput of the batch kernels and group collection.

#include <benchmark/benchmark.h>

#include <vector>

#include "uqrl/kernels.hpp"
#include "uqrl/rng.hpp"
#include "uqrl/trainer.hpp"

namespace {

using namespace uqrl;

std::vector<TokenDistribution> make_dists(std::size_t n, std::size_t vocab) {
  Rng rng(11);
  std::vector<TokenDistribution> out;
  out.reserve(n);
  std::vector<double> p(vocab);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (auto& x : p) total += (x = rng.uniform() + 1e-3);
    for (auto& x : p) x /= total;
    out.push_back(TokenDistribution::from_token_probs(p, rng.below(vocab)));
  }
  return out;
}

template <bool Parallel>
void BM_ScoreTokens(benchmark::State& state) {
  const auto dists = make_dists(static_cast<std::size_t>(state.range(0)), 64);
  std::vector<double> out(dists.size());
  const UncertaintyWeights w;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::score_tokens(dists, w, out);
    else kernels::score_tokens_serial(dists, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Entropies(benchmark::State& state) {
  const auto dists = make_dists(static_cast<std::size_t>(state.range(0)), 64);
  std::vector<double> out(dists.size());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::entropies(dists, out);
    else kernels::entropies_serial(dists, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_TrajectoryUncertainties(benchmark::State& state) {
  Rng rng(5);
  std::vector<std::vector<double>> seqs(static_cast<std::size_t>(state.range(0)));
  for (auto& s : seqs) {
    s.resize(1 + rng.below(40));
    for (auto& x : s) x = rng.uniform();
  }
  std::vector<double> out(seqs.size());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::trajectory_uncertainties(seqs, 0.9, out);
    else kernels::trajectory_uncertainties_serial(seqs, 0.9, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_CollectGroup(benchmark::State& state) {
  TrainConfig cfg;
  cfg.env = EnvKind::kShop;
  cfg.group_size = static_cast<int>(state.range(0));
  cfg.execution = Parallel ? kernels::Execution::kParallel : kernels::Execution::kSerial;
  const auto policy = initial_policy(cfg);
  std::uint64_t k = 0;
  for (auto _ : state) {
    auto b = collect_group(policy, k, k + 1000, cfg);
    benchmark::DoNotOptimize(b.trajectories.data());
    ++k;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoreTokens<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_ScoreTokens<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Entropies<false>)->Arg(1 << 16);
BENCHMARK(BM_Entropies<true>)->Arg(1 << 16);
BENCHMARK(BM_TrajectoryUncertainties<false>)->Arg(1 << 14);
BENCHMARK(BM_TrajectoryUncertainties<true>)->Arg(1 << 14);
BENCHMARK(BM_CollectGroup<false>)->Arg(8)->Arg(64);
BENCHMARK(BM_CollectGroup<true>)->Arg(8)->Arg(64);

BENCHMARK_MAIN();
