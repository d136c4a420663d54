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

#ifndef UQRL_POLICY_HPP_
#define UQRL_POLICY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "uqrl/metrics.hpp"
#include "uqrl/rng.hpp"

namespace uqrl {

// Actions are (verb, object) token pairs drawn from one shared vocabulary.
inline constexpr int kTokensPerAction = 2;

// Tabular logits indexed by (state, decode position, token).
struct PolicyParams {
  std::size_t num_states = 0;
  std::size_t vocab_size = 0;
  double learning_rate = 0.1;
  std::vector<double> logits;

  static PolicyParams uniform(std::size_t num_states, std::size_t vocab_size,
                              double learning_rate = 0.1);
  // Logits drawn i.i.d. from N(0, scale^2).
  static PolicyParams random(std::size_t num_states, std::size_t vocab_size,
                             double learning_rate, std::uint64_t seed,
                             double scale);

  std::span<double> row(int state, int position);
  std::span<const double> row(int state, int position) const;

  void validate() const;
};

struct ActionSample {
  std::array<int, kTokensPerAction> tokens{};
  std::vector<TokenDistribution> distributions;
  double logprob = 0.0;
};

struct GradientSample {
  int state = 0;
  std::array<int, kTokensPerAction> tokens{};
  double advantage = 0.0;
};

std::vector<double> softmax(std::span<const double> logits);

ActionSample sample_action(const PolicyParams& params, int state, Rng& rng);

// Argmax at each position, ties to the lowest token id.
ActionSample greedy_action(const PolicyParams& params, int state);

// Gradient of sum_i A_i * log pi(tokens_i | state_i) with respect to the
// logit table, laid out like PolicyParams::logits.
std::vector<double> policy_gradient(const PolicyParams& params,
                                    std::span<const GradientSample> batch);

void apply_policy_gradient(PolicyParams& params,
                           std::span<const GradientSample> batch);

PolicyParams policy_gradient_update(const PolicyParams& params,
                                    std::span<const GradientSample> batch);

// {"num_states", "vocab_size", "learning_rate",
//  "logits": {state: {position: {token: logit}}}} with decimal-string keys.
nlohmann::ordered_json policy_to_json(const PolicyParams& params);
PolicyParams policy_from_json(const nlohmann::json& j);
void save_policy(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_policy(const std::filesystem::path& path);

}  // namespace uqrl

#endif  // UQRL_POLICY_HPP_
