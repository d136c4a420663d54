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

#ifndef UQRL_SHAPING_HPP_
#define UQRL_SHAPING_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqrl/aggregation.hpp"

namespace uqrl {

enum class RewardMode { kBaseline, kSelaur, kNegative, kExponential };
enum class ShapingLevel { kStepWise, kTrajectoryLevel };

std::string to_string(RewardMode m);
std::string to_string(ShapingLevel l);
RewardMode parse_reward_mode(std::string_view s);
ShapingLevel parse_shaping_level(std::string_view s);

struct ShapingConfig {
  double w_fail = 0.95;
  RewardMode mode = RewardMode::kSelaur;
  ShapingLevel level = ShapingLevel::kStepWise;

  void validate() const;
};

// Core of step-wise shaping. `base` is the per-step reward used on the
// success branch; `step_unc` the step uncertainties.
//   failure: Selaur w*u, Negative -w*u, Baseline/Exponential 0
//   success: base, except Exponential which gives base*exp(-u)
std::vector<double> shape_step_values(std::span<const double> base,
                                      std::span<const double> step_unc,
                                      bool success, const ShapingConfig& cfg);

// Step-wise shaping of a finalized trajectory using its environment rewards.
std::vector<double> shape_step_rewards(const Trajectory& traj,
                                       const ShapingConfig& cfg);

// Trajectory-level shaping: U(tau) on failure (Selaur), -U (Negative), 0
// (Baseline, Exponential); score on success, score*exp(-U) for Exponential.
double shape_trajectory_reward(const Trajectory& traj, const ShapingConfig& cfg);

}  // namespace uqrl

#endif  // UQRL_SHAPING_HPP_
