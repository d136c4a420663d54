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

#include "uqrl/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <sstream>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

constexpr std::uint64_t kTaskStream = 0x7a5c;
constexpr std::uint64_t kInitStream = 0x1417;

template <typename Next>
Trajectory run_episode(EnvKind env, std::uint64_t task_seed, int max_steps,
                       const UncertaintyConfig& ucfg,
                       std::vector<TraceRecord>* trace, Next next_action) {
  EnvState state = reset(env, task_seed, max_steps);
  Trajectory traj;
  while (!state.terminal) {
    const int obs = state.observation;
    ActionSample a = next_action(obs);
    const StepOutcome out = step(state, Action{a.tokens[0], a.tokens[1]});
    StepRecord rec;
    rec.state = obs;
    rec.tokens.assign(a.tokens.begin(), a.tokens.end());
    rec.distributions = std::move(a.distributions);
    rec.env_reward = out.reward;
    if (trace) {
      trace->push_back(TraceRecord{task_seed,
                                   static_cast<int>(traj.steps.size()), obs,
                                   a.tokens[0], a.tokens[1], out});
    }
    traj.steps.push_back(std::move(rec));
    if (out.done) {
      traj.success = out.success;
      traj.score = out.score;
    }
  }
  finalize_trajectory(traj, ucfg);
  return traj;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (max_steps < 0) throw InvalidConfig("max_steps must be non-negative");
  if (group_size < 2) throw InvalidConfig("group_size must be at least 2");
  if (train_iters < 1) throw InvalidConfig("train_iters must be positive");
  if (eval_every < 1) throw InvalidConfig("eval_every must be positive");
  if (eval_episodes < 1) throw InvalidConfig("eval_episodes must be positive");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning_rate must be positive");
  if (!(init_scale >= 0.0)) throw InvalidConfig("init_scale must be non-negative");
  if (!std::isfinite(grammar_prior)) throw InvalidConfig("grammar_prior must be finite");
  uncertainty.validate();
  shaping.validate();
}

Trajectory rollout(const PolicyParams& policy, EnvKind env,
                   std::uint64_t task_seed, int max_steps, Rng& rng,
                   const UncertaintyConfig& ucfg,
                   std::vector<TraceRecord>* trace) {
  return run_episode(env, task_seed, max_steps, ucfg, trace,
                     [&](int obs) { return sample_action(policy, obs, rng); });
}

Trajectory greedy_rollout(const PolicyParams& policy, EnvKind env,
                          std::uint64_t task_seed, int max_steps,
                          const UncertaintyConfig& ucfg,
                          std::vector<TraceRecord>* trace) {
  return run_episode(env, task_seed, max_steps, ucfg, trace,
                     [&](int obs) { return greedy_action(policy, obs); });
}

GroupBatch collect_group(const PolicyParams& policy, std::uint64_t task_seed,
                         std::uint64_t stream_seed, const TrainConfig& cfg) {
  GroupBatch batch;
  batch.task_seed = task_seed;
  batch.trajectories.resize(cfg.group_size);
  auto one = [&](int i) {
    Rng rng(derive_seed(stream_seed, static_cast<std::uint64_t>(i)));
    batch.trajectories[i] = rollout(policy, cfg.env, task_seed, cfg.max_steps,
                                    rng, cfg.uncertainty);
  };
  if (cfg.execution == kernels::Execution::kSerial) {
    for (int i = 0; i < cfg.group_size; ++i) one(i);
    return batch;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.group_size; ++i) {
    try {
      one(i);
    } catch (...) {
#pragma omp critical(uqrl_rollout_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return batch;
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps) {
  if (rewards.size() < 2)
    throw InvalidInput("group advantages need at least two rewards");
  const double mean = mean_of(rewards);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());
  const double denom = std::sqrt(var) + eps;
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i)
    adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

std::vector<double> step_credits(const Trajectory& traj,
                                 const ShapingConfig& cfg,
                                 std::vector<double>* shaped_out) {
  if (!traj.finalized())
    throw StateError("trajectory must be finalized before shaping");
  const std::size_t n = traj.steps.size();
  std::vector<double> to_go(n);
  double acc = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    acc += traj.steps[t].env_reward;
    to_go[t] = acc;
  }
  ShapingConfig step_cfg = cfg;
  step_cfg.level = ShapingLevel::kStepWise;
  const auto shaped =
      shape_step_values(to_go, traj.step_uncertainties(), traj.success, step_cfg);
  std::vector<double> credit(n);
  acc = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    acc += shaped[t];
    credit[t] = acc / static_cast<double>(n - t);
  }
  if (shaped_out) *shaped_out = shaped;
  return credit;
}

void score_group(GroupBatch& batch, const ShapingConfig& cfg) {
  const std::size_t g = batch.trajectories.size();
  batch.shaped_rewards.assign(g, {});
  batch.credits.assign(g, {});
  batch.advantages.assign(g, {});

  if (cfg.level == ShapingLevel::kTrajectoryLevel) {
    std::vector<double> rewards(g);
    for (std::size_t i = 0; i < g; ++i) {
      auto& traj = batch.trajectories[i];
      rewards[i] = shape_trajectory_reward(traj, cfg);
      traj.final_reward = rewards[i];
      batch.shaped_rewards[i] = {rewards[i]};
      batch.credits[i].assign(traj.steps.size(), rewards[i]);
    }
    const auto adv = group_advantages(rewards);
    for (std::size_t i = 0; i < g; ++i)
      batch.advantages[i].assign(batch.trajectories[i].steps.size(), adv[i]);
    return;
  }

  std::size_t longest = 0;
  for (std::size_t i = 0; i < g; ++i) {
    auto& traj = batch.trajectories[i];
    batch.credits[i] = step_credits(traj, cfg, &batch.shaped_rewards[i]);
    traj.final_reward = batch.credits[i].front();
    batch.advantages[i].assign(traj.steps.size(), 0.0);
    longest = std::max(longest, traj.steps.size());
  }
  // Normalize across the trajectories that reach each step index; indices
  // reached by a single trajectory carry no group signal.
  std::vector<double> column;
  std::vector<std::size_t> members;
  for (std::size_t t = 0; t < longest; ++t) {
    column.clear();
    members.clear();
    for (std::size_t i = 0; i < g; ++i) {
      if (t < batch.credits[i].size()) {
        column.push_back(batch.credits[i][t]);
        members.push_back(i);
      }
    }
    if (column.size() < 2) continue;
    const auto adv = group_advantages(column);
    for (std::size_t m = 0; m < members.size(); ++m)
      batch.advantages[members[m]][t] = adv[m];
  }
}

std::vector<GradientSample> gradient_batch(const GroupBatch& batch) {
  std::vector<GradientSample> out;
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const auto& traj = batch.trajectories[i];
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto& s = traj.steps[t];
      out.push_back(GradientSample{s.state, {s.tokens[0], s.tokens[1]},
                                   batch.advantages[i][t]});
    }
  }
  return out;
}

EvalResult evaluate_greedy(const PolicyParams& policy, EnvKind env,
                           int max_steps, int episodes,
                           const UncertaintyConfig& ucfg) {
  EvalResult r;
  int successes = 0;
  double score = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const auto traj = greedy_rollout(policy, env, static_cast<std::uint64_t>(e),
                                     max_steps, ucfg, &r.traces);
    successes += traj.success;
    score += traj.score;
  }
  r.success_rate = static_cast<double>(successes) / episodes;
  r.mean_score = score / episodes;
  return r;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string MetricsLog::to_csv() const {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.iter << ',' << to_string(r.mode) << ','
        << format_double(r.success_rate) << ',' << format_double(r.mean_score)
        << ',' << format_double(r.mean_policy_entropy) << ','
        << format_double(r.mean_traj_uncertainty) << ','
        << format_double(r.mean_shaped_reward) << '\n';
  }
  return out.str();
}

PolicyParams initial_policy(const TrainConfig& cfg) {
  PolicyParams p = PolicyParams::random(
      num_states(cfg.env), vocab_size(cfg.env), cfg.learning_rate,
      derive_seed(cfg.seed, kInitStream), cfg.init_scale);
  if (cfg.grammar_prior != 0.0) {
    for (std::size_t s = 0; s < p.num_states; ++s) {
      for (int pos = 0; pos < kTokensPerAction; ++pos) {
        auto r = p.row(static_cast<int>(s), pos);
        for (std::size_t k = 0; k < r.size(); ++k) {
          const bool verb = is_verb(cfg.env, static_cast<int>(k));
          if (verb == (pos == 0)) r[k] += cfg.grammar_prior;
        }
      }
    }
  }
  return p;
}

TrainResult train(const TrainConfig& cfg, const BatchObserver& observer) {
  cfg.validate();
  PolicyParams policy = initial_policy(cfg);

  TrainResult result;
  EvalResult eval = evaluate_greedy(policy, cfg.env, cfg.max_steps,
                                    cfg.eval_episodes, cfg.uncertainty);
  std::vector<TokenDistribution> dists;
  for (int iter = 0; iter < cfg.train_iters; ++iter) {
    const std::uint64_t task_seed = derive_seed(cfg.seed, kTaskStream, iter);
    const std::uint64_t stream_seed = derive_seed(cfg.seed, iter + 1);
    GroupBatch batch = collect_group(policy, task_seed, stream_seed, cfg);
    score_group(batch, cfg.shaping);

    MetricsRow row;
    row.iter = iter;
    row.mode = cfg.shaping.mode;
    dists.clear();
    double traj_unc = 0.0;
    double shaped = 0.0;
    for (const auto& traj : batch.trajectories) {
      for (const auto& s : traj.steps)
        dists.insert(dists.end(), s.distributions.begin(), s.distributions.end());
      traj_unc += *traj.trajectory_uncertainty;
      shaped += traj.final_reward;
    }
    row.mean_policy_entropy = kernels::mean_entropy(dists, cfg.execution);
    row.mean_traj_uncertainty = traj_unc / cfg.group_size;
    row.mean_shaped_reward = shaped / cfg.group_size;

    const auto grads = gradient_batch(batch);
    if (observer) {
      PolicyParams before = policy;
      apply_policy_gradient(policy, grads);
      observer(iter, batch, before, policy);
    } else {
      apply_policy_gradient(policy, grads);
    }

    if ((iter + 1) % cfg.eval_every == 0 || iter + 1 == cfg.train_iters)
      eval = evaluate_greedy(policy, cfg.env, cfg.max_steps, cfg.eval_episodes,
                             cfg.uncertainty);
    row.success_rate = eval.success_rate;
    row.mean_score = eval.mean_score;
    result.log.rows.push_back(row);
  }
  result.final_eval = std::move(eval);
  result.policy = std::move(policy);
  return result;
}

}  // namespace uqrl
