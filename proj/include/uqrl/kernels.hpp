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

// Batch kernels over many distributions or trajectories. Each parallel kernel
// has a serial twin that is kept as the reference implementation: tests
// require bit-identical results between the two, so the parallel versions
// only ever write disjoint output slots and never reduce across threads.

#ifndef UQRL_KERNELS_HPP_
#define UQRL_KERNELS_HPP_

#include <span>
#include <vector>

#include "uqrl/metrics.hpp"

namespace uqrl::kernels {

enum class Execution { kSerial, kParallel };

void score_tokens(std::span<const TokenDistribution> dists,
                  const UncertaintyWeights& w, std::span<double> out);
void score_tokens_serial(std::span<const TokenDistribution> dists,
                         const UncertaintyWeights& w, std::span<double> out);

void entropies(std::span<const TokenDistribution> dists, std::span<double> out);
void entropies_serial(std::span<const TokenDistribution> dists,
                      std::span<double> out);

// out[i] = trajectory_uncertainty(sequences[i], lambda).
void trajectory_uncertainties(std::span<const std::vector<double>> sequences,
                              double lambda, std::span<double> out);
void trajectory_uncertainties_serial(
    std::span<const std::vector<double>> sequences, double lambda,
    std::span<double> out);

// Mean normalized entropy, summed in index order after a parallel map.
double mean_entropy(std::span<const TokenDistribution> dists,
                    Execution exec = Execution::kParallel);

}  // namespace uqrl::kernels

#endif  // UQRL_KERNELS_HPP_
