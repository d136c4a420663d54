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

#include "uqrl/shaping.hpp"

#include <algorithm>
#include <cmath>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

void require_finalized(const Trajectory& traj) {
  if (!traj.finalized())
    throw StateError("trajectory must be finalized before shaping");
}

double normalized(double u) { return std::clamp(u, 0.0, 1.0); }

}  // namespace

std::string to_string(RewardMode m) {
  switch (m) {
    case RewardMode::kBaseline: return "baseline";
    case RewardMode::kSelaur: return "selaur";
    case RewardMode::kNegative: return "negative";
    case RewardMode::kExponential: return "exponential";
  }
  return "unknown";
}

std::string to_string(ShapingLevel l) {
  return l == ShapingLevel::kStepWise ? "step" : "traj";
}

RewardMode parse_reward_mode(std::string_view s) {
  if (s == "baseline") return RewardMode::kBaseline;
  if (s == "selaur") return RewardMode::kSelaur;
  if (s == "negative") return RewardMode::kNegative;
  if (s == "exponential") return RewardMode::kExponential;
  throw InvalidConfig("unknown reward mode '" + std::string(s) + "'");
}

ShapingLevel parse_shaping_level(std::string_view s) {
  if (s == "step") return ShapingLevel::kStepWise;
  if (s == "traj") return ShapingLevel::kTrajectoryLevel;
  throw InvalidConfig("unknown shaping level '" + std::string(s) + "'");
}

void ShapingConfig::validate() const {
  if (!(w_fail > 0.0 && w_fail < 1.0))
    throw InvalidConfig("w_fail must lie strictly between 0 and 1");
}

std::vector<double> shape_step_values(std::span<const double> base,
                                      std::span<const double> step_unc,
                                      bool success, const ShapingConfig& cfg) {
  if (base.size() != step_unc.size())
    throw InvalidInput("reward and uncertainty sequences differ in length");
  std::vector<double> out(base.size(), 0.0);
  for (std::size_t t = 0; t < base.size(); ++t) {
    const double u = normalized(step_unc[t]);
    if (success) {
      out[t] = cfg.mode == RewardMode::kExponential ? base[t] * std::exp(-u)
                                                    : base[t];
      continue;
    }
    switch (cfg.mode) {
      case RewardMode::kSelaur: out[t] = cfg.w_fail * u; break;
      case RewardMode::kNegative: out[t] = -(cfg.w_fail * u); break;
      case RewardMode::kBaseline:
      case RewardMode::kExponential: out[t] = 0.0; break;
    }
  }
  return out;
}

std::vector<double> shape_step_rewards(const Trajectory& traj,
                                       const ShapingConfig& cfg) {
  require_finalized(traj);
  if (cfg.level != ShapingLevel::kStepWise)
    throw InvalidConfig("shape_step_rewards needs the step-wise level");
  std::vector<double> base;
  base.reserve(traj.steps.size());
  for (const auto& s : traj.steps) base.push_back(s.env_reward);
  return shape_step_values(base, traj.step_uncertainties(), traj.success, cfg);
}

double shape_trajectory_reward(const Trajectory& traj, const ShapingConfig& cfg) {
  require_finalized(traj);
  if (cfg.level != ShapingLevel::kTrajectoryLevel)
    throw InvalidConfig("shape_trajectory_reward needs the trajectory level");
  const double u = normalized(*traj.trajectory_uncertainty);
  if (traj.success) {
    return cfg.mode == RewardMode::kExponential ? traj.score * std::exp(-u)
                                                : traj.score;
  }
  switch (cfg.mode) {
    case RewardMode::kSelaur: return u;
    case RewardMode::kNegative: return -u;
    case RewardMode::kBaseline:
    case RewardMode::kExponential: return 0.0;
  }
  return 0.0;
}

}  // namespace uqrl
