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

#include "uqrl/aggregation.hpp"

#include <cmath>

#include "uqrl/errors.hpp"

namespace uqrl {

void UncertaintyConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw InvalidConfig("lambda must lie in (0, 1]");
}

bool Trajectory::finalized() const {
  if (steps.empty() || !trajectory_uncertainty) return false;
  for (const auto& s : steps)
    if (!s.step_uncertainty) return false;
  return true;
}

std::vector<double> Trajectory::step_uncertainties() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) {
    if (!s.step_uncertainty) throw StateError("step uncertainty not computed");
    out.push_back(*s.step_uncertainty);
  }
  return out;
}

double step_uncertainty(std::span<const double> tokens) {
  if (tokens.empty()) throw InvalidInput("step has no token uncertainties");
  double sum = 0.0;
  for (double u : tokens) {
    if (!(u >= 0.0 && u <= 1.0))
      throw InvalidInput("token uncertainty outside [0,1]");
    sum += u;
  }
  return sum / static_cast<double>(tokens.size());
}

double trajectory_uncertainty(std::span<const double> steps, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw InvalidConfig("lambda must lie in (0, 1]");
  if (steps.empty()) throw InvalidInput("trajectory has no steps");
  // Weights are built backward by repeated multiplication from 1, then
  // accumulated forward so lambda = 1 reduces to the plain mean bit for bit.
  std::vector<double> weights(steps.size());
  double weight = 1.0;
  for (std::size_t k = steps.size(); k-- > 0;) {
    weights[k] = weight;
    weight *= lambda;
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    num += weights[k] * steps[k];
    den += weights[k];
  }
  return num / den;
}

void finalize_step(StepRecord& step, const UncertaintyWeights& w) {
  step.token_uncertainties.clear();
  step.token_uncertainties.reserve(step.distributions.size());
  for (const auto& d : step.distributions)
    step.token_uncertainties.push_back(aggregate_token_uncertainty(d, w));
  step.step_uncertainty = step_uncertainty(step.token_uncertainties);
}

void finalize_trajectory(Trajectory& traj, const UncertaintyConfig& cfg) {
  if (traj.steps.empty()) throw InvalidInput("trajectory has no steps");
  for (auto& s : traj.steps)
    if (!s.step_uncertainty) finalize_step(s, cfg.weights);
  traj.trajectory_uncertainty =
      trajectory_uncertainty(traj.step_uncertainties(), cfg.lambda);
}

}  // namespace uqrl
