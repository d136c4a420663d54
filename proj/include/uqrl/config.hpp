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

#ifndef UQRL_CONFIG_HPP_
#define UQRL_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "uqrl/trainer.hpp"

namespace uqrl {

// Everything a run needs, in one auditable place. Weights are kept as
// written so an echoed config reproduces a run bit for bit.
struct ExperimentConfig {
  EnvKind env = EnvKind::kKeyDoor;
  int max_steps = 0;

  double w_ent = 1.0 / 3.0;
  double w_lc = 1.0 / 3.0;
  double w_mar = 1.0 / 3.0;
  double margin_scale = 1.0;
  double lambda = 0.9;

  ShapingConfig shaping;

  int group_size = 8;
  int train_iters = 150;
  int eval_every = 10;
  int eval_episodes = 24;
  double learning_rate = 0.1;
  double init_scale = 0.0;
  double grammar_prior = 0.0;

  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  UncertaintyConfig uncertainty() const;
  TrainConfig train_config() const { return train_config(seed); }
  TrainConfig train_config(std::uint64_t run_seed) const;

  // Throws InvalidConfig.
  void validate() const;
};

// Nested JSON with sections env, uncertainty, shaping, train and the
// top-level seed/seeds. Missing keys keep their defaults; unknown keys and
// wrongly typed values throw InvalidConfig.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace uqrl

#endif  // UQRL_CONFIG_HPP_
