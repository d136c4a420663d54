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

#ifndef UQRL_AGGREGATION_HPP_
#define UQRL_AGGREGATION_HPP_

#include <optional>
#include <span>
#include <vector>

#include "uqrl/metrics.hpp"

namespace uqrl {

struct UncertaintyConfig {
  UncertaintyWeights weights;
  double lambda = 0.9;  // trajectory discount, in (0, 1]

  void validate() const;
};

// One environment step. Distributions are captured from the behavior policy
// at sampling time and never recomputed.
struct StepRecord {
  int state = -1;
  std::vector<int> tokens;
  std::vector<TokenDistribution> distributions;
  double env_reward = 0.0;

  std::vector<double> token_uncertainties;
  std::optional<double> step_uncertainty;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  bool success = false;
  double score = 0.0;
  std::optional<double> trajectory_uncertainty;
  double final_reward = 0.0;

  bool finalized() const;
  std::vector<double> step_uncertainties() const;
};

// Mean of a step's token uncertainties. Empty input throws InvalidInput.
double step_uncertainty(std::span<const double> tokens);

// sum_t lambda^(T-t) u_t / sum_t lambda^(T-t); the last step has weight 1.
double trajectory_uncertainty(std::span<const double> steps, double lambda);

// Fills token and step uncertainties from the captured distributions.
void finalize_step(StepRecord& step, const UncertaintyWeights& w);

// Finalizes every step (if not already) and the trajectory aggregate.
void finalize_trajectory(Trajectory& traj, const UncertaintyConfig& cfg);

}  // namespace uqrl

#endif  // UQRL_AGGREGATION_HPP_
