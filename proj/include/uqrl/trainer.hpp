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

#ifndef UQRL_TRAINER_HPP_
#define UQRL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "uqrl/aggregation.hpp"
#include "uqrl/env.hpp"
#include "uqrl/kernels.hpp"
#include "uqrl/policy.hpp"
#include "uqrl/shaping.hpp"

namespace uqrl {

inline constexpr double kAdvantageEpsilon = 1e-8;

struct TrainConfig {
  EnvKind env = EnvKind::kKeyDoor;
  int max_steps = 0;  // 0: environment default
  int group_size = 8;
  int train_iters = 150;
  UncertaintyConfig uncertainty;
  ShapingConfig shaping;
  std::uint64_t seed = 0;
  int eval_every = 10;
  int eval_episodes = 24;
  double learning_rate = 0.1;
  double init_scale = 0.0;  // std of the initial logits
  // Initial logit bonus for verb tokens at position 0 and object tokens at
  // position 1, a stand-in for a pretrained model's knowledge of syntax.
  double grammar_prior = 0.0;
  kernels::Execution execution = kernels::Execution::kParallel;

  void validate() const;
};

struct GroupBatch {
  std::uint64_t task_seed = 0;
  std::vector<Trajectory> trajectories;
  // Step-wise level: shaped reward per step. Trajectory level: one entry.
  std::vector<std::vector<double>> shaped_rewards;
  // Per-step value fed to group normalization (broadcast at trajectory level).
  std::vector<std::vector<double>> credits;
  std::vector<std::vector<double>> advantages;
};

// Runs one episode, capturing the behavior distributions at every step, and
// finalizes token/step/trajectory uncertainties.
Trajectory rollout(const PolicyParams& policy, EnvKind env,
                   std::uint64_t task_seed, int max_steps, Rng& rng,
                   const UncertaintyConfig& ucfg,
                   std::vector<TraceRecord>* trace = nullptr);

// Greedy (argmax) episode; no sampling.
Trajectory greedy_rollout(const PolicyParams& policy, EnvKind env,
                          std::uint64_t task_seed, int max_steps,
                          const UncertaintyConfig& ucfg,
                          std::vector<TraceRecord>* trace = nullptr);

// group_size rollouts of one task instance against a frozen policy. Rollout
// i draws from derive_seed(stream_seed, i). Parallel and serial execution
// produce identical batches.
GroupBatch collect_group(const PolicyParams& policy, std::uint64_t task_seed,
                         std::uint64_t stream_seed, const TrainConfig& cfg);

// (r - mean) / (population std + eps). Needs at least two rewards.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps = kAdvantageEpsilon);

// Per-step credit for step-wise shaping. The success branch reward at step t
// is the environment return-to-go; a step's credit is the mean shaped
// reward from t to the end of the trajectory.
std::vector<double> step_credits(const Trajectory& traj,
                                 const ShapingConfig& cfg,
                                 std::vector<double>* shaped = nullptr);

// Fills shaped_rewards, credits and advantages.
void score_group(GroupBatch& batch, const ShapingConfig& cfg);

std::vector<GradientSample> gradient_batch(const GroupBatch& batch);

struct EvalResult {
  double success_rate = 0.0;
  double mean_score = 0.0;
  std::vector<TraceRecord> traces;
};

// Greedy evaluation on task seeds 0 .. episodes-1.
EvalResult evaluate_greedy(const PolicyParams& policy, EnvKind env,
                           int max_steps, int episodes,
                           const UncertaintyConfig& ucfg);

struct MetricsRow {
  int iter = 0;
  RewardMode mode = RewardMode::kSelaur;
  double success_rate = 0.0;  // latest greedy evaluation
  double mean_score = 0.0;    // latest greedy evaluation
  double mean_policy_entropy = 0.0;
  double mean_traj_uncertainty = 0.0;
  double mean_shaped_reward = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;

  static constexpr const char* kHeader =
      "iter,mode,success_rate,mean_score,mean_policy_entropy,"
      "mean_traj_uncertainty,mean_shaped_reward";
  std::string to_csv() const;
};

struct TrainResult {
  MetricsLog log;
  PolicyParams policy;
  EvalResult final_eval;
};

// Initial policy for cfg: grammar prior plus seeded Gaussian noise.
PolicyParams initial_policy(const TrainConfig& cfg);

// Optional per-iteration observer (tests use it to inspect batches).
using BatchObserver =
    std::function<void(int iter, const GroupBatch& batch,
                       const PolicyParams& before, const PolicyParams& after)>;

TrainResult train(const TrainConfig& cfg, const BatchObserver& observer = {});

// Shortest round-trip decimal form, shared by every CSV writer.
std::string format_double(double x);

}  // namespace uqrl

#endif  // UQRL_TRAINER_HPP_
