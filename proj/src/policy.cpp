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

#include "uqrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

std::size_t row_offset(const PolicyParams& p, int state, int position) {
  if (state < 0 || static_cast<std::size_t>(state) >= p.num_states)
    throw InvalidState("unknown state id " + std::to_string(state));
  if (position < 0 || position >= kTokensPerAction)
    throw InvalidInput("decode position out of range");
  return (static_cast<std::size_t>(state) * kTokensPerAction + position) *
         p.vocab_size;
}

int draw(std::span<const double> probs, double u) {
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    cum += probs[k];
    if (u < cum) return static_cast<int>(k);
  }
  return last_positive;
}

}  // namespace

PolicyParams PolicyParams::uniform(std::size_t num_states,
                                   std::size_t vocab_size,
                                   double learning_rate) {
  if (num_states == 0 || vocab_size < 2)
    throw InvalidConfig("policy needs states and a vocabulary of >= 2 tokens");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning rate must be positive");
  PolicyParams p;
  p.num_states = num_states;
  p.vocab_size = vocab_size;
  p.learning_rate = learning_rate;
  p.logits.assign(num_states * kTokensPerAction * vocab_size, 0.0);
  return p;
}

PolicyParams PolicyParams::random(std::size_t num_states,
                                  std::size_t vocab_size, double learning_rate,
                                  std::uint64_t seed, double scale) {
  PolicyParams p = uniform(num_states, vocab_size, learning_rate);
  if (scale > 0.0) {
    Rng rng(seed);
    for (double& l : p.logits) l = scale * rng.normal();
  }
  return p;
}

std::span<double> PolicyParams::row(int state, int position) {
  return {logits.data() + row_offset(*this, state, position), vocab_size};
}

std::span<const double> PolicyParams::row(int state, int position) const {
  return {logits.data() + row_offset(*this, state, position), vocab_size};
}

void PolicyParams::validate() const {
  if (logits.size() != num_states * kTokensPerAction * vocab_size)
    throw InvalidInput("logit table size does not match its shape");
  for (double l : logits)
    if (!std::isfinite(l)) throw InvalidInput("non-finite logit");
}

std::vector<double> softmax(std::span<const double> logits) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - hi);
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

ActionSample sample_action(const PolicyParams& params, int state, Rng& rng) {
  ActionSample a;
  a.distributions.reserve(kTokensPerAction);
  for (int pos = 0; pos < kTokensPerAction; ++pos) {
    const auto probs = softmax(params.row(state, pos));
    const int tok = draw(probs, rng.uniform());
    a.tokens[pos] = tok;
    a.logprob += std::log(probs[tok]);
    a.distributions.push_back(TokenDistribution::from_token_probs(probs, tok));
  }
  return a;
}

ActionSample greedy_action(const PolicyParams& params, int state) {
  ActionSample a;
  a.distributions.reserve(kTokensPerAction);
  for (int pos = 0; pos < kTokensPerAction; ++pos) {
    const auto probs = softmax(params.row(state, pos));
    const int tok = static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    a.tokens[pos] = tok;
    a.logprob += std::log(probs[tok]);
    a.distributions.push_back(TokenDistribution::from_token_probs(probs, tok));
  }
  return a;
}

std::vector<double> policy_gradient(const PolicyParams& params,
                                    std::span<const GradientSample> batch) {
  std::vector<double> grad(params.logits.size(), 0.0);
  for (const auto& g : batch) {
    if (!std::isfinite(g.advantage))
      throw InvalidInput("non-finite advantage in policy-gradient batch");
    if (g.advantage == 0.0) {
      row_offset(params, g.state, 0);  // still reject unknown states
      continue;
    }
    for (int pos = 0; pos < kTokensPerAction; ++pos) {
      const std::size_t off = row_offset(params, g.state, pos);
      const int tok = g.tokens[pos];
      if (tok < 0 || static_cast<std::size_t>(tok) >= params.vocab_size)
        throw InvalidInput("token id outside vocabulary");
      const auto probs = softmax(params.row(g.state, pos));
      // d log softmax_tok / d logit_k = 1[k == tok] - p_k
      for (std::size_t k = 0; k < params.vocab_size; ++k) {
        const double onehot = static_cast<int>(k) == tok ? 1.0 : 0.0;
        grad[off + k] += g.advantage * (onehot - probs[k]);
      }
    }
  }
  return grad;
}

void apply_policy_gradient(PolicyParams& params,
                           std::span<const GradientSample> batch) {
  const auto grad = policy_gradient(params, batch);
  for (std::size_t i = 0; i < grad.size(); ++i)
    params.logits[i] += params.learning_rate * grad[i];
}

PolicyParams policy_gradient_update(const PolicyParams& params,
                                    std::span<const GradientSample> batch) {
  PolicyParams next = params;
  apply_policy_gradient(next, batch);
  return next;
}

nlohmann::ordered_json policy_to_json(const PolicyParams& params) {
  nlohmann::ordered_json j;
  j["num_states"] = params.num_states;
  j["vocab_size"] = params.vocab_size;
  j["learning_rate"] = params.learning_rate;
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < params.num_states; ++s) {
    nlohmann::ordered_json by_pos = nlohmann::ordered_json::object();
    for (int pos = 0; pos < kTokensPerAction; ++pos) {
      nlohmann::ordered_json by_tok = nlohmann::ordered_json::object();
      const auto r = params.row(static_cast<int>(s), pos);
      for (std::size_t k = 0; k < r.size(); ++k) by_tok[std::to_string(k)] = r[k];
      by_pos[std::to_string(pos)] = std::move(by_tok);
    }
    table[std::to_string(s)] = std::move(by_pos);
  }
  j["logits"] = std::move(table);
  return j;
}

PolicyParams policy_from_json(const nlohmann::json& j) {
  try {
    PolicyParams p = PolicyParams::uniform(j.at("num_states").get<std::size_t>(),
                                           j.at("vocab_size").get<std::size_t>(),
                                           j.at("learning_rate").get<double>());
    const auto& table = j.at("logits");
    for (std::size_t s = 0; s < p.num_states; ++s) {
      const auto& by_pos = table.at(std::to_string(s));
      for (int pos = 0; pos < kTokensPerAction; ++pos) {
        const auto& by_tok = by_pos.at(std::to_string(pos));
        auto r = p.row(static_cast<int>(s), pos);
        for (std::size_t k = 0; k < r.size(); ++k)
          r[k] = by_tok.at(std::to_string(k)).get<double>();
      }
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed policy file: ") + e.what());
  }
}

void save_policy(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << policy_to_json(params).dump(1) << '\n';
}

PolicyParams load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed policy file: ") + e.what());
  }
  return policy_from_json(j);
}

}  // namespace uqrl
