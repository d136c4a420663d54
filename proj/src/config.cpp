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

#include "uqrl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

using nlohmann::ordered_json;
using Setter = std::function<void(const ordered_json&)>;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw InvalidConfig("config key '" + key + "': " + why);
}

double as_real(const ordered_json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

int as_int(const ordered_json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) bad(key, "out of range");
  return static_cast<int>(x);
}

std::uint64_t as_seed(const ordered_json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  bad(key, "expected a non-negative integer");
}

std::string as_string(const ordered_json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

void apply_section(const ordered_json& j, const std::string& name,
                   const std::map<std::string, Setter>& setters) {
  if (!j.is_object()) bad(name, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) bad(name + "." + key, "unknown key");
    it->second(value);
  }
}

}  // namespace

UncertaintyConfig ExperimentConfig::uncertainty() const {
  UncertaintyConfig u;
  u.weights = UncertaintyWeights(w_ent, w_lc, w_mar, margin_scale);
  u.lambda = lambda;
  return u;
}

TrainConfig ExperimentConfig::train_config(std::uint64_t run_seed) const {
  TrainConfig t;
  t.env = env;
  t.max_steps = max_steps;
  t.group_size = group_size;
  t.train_iters = train_iters;
  t.uncertainty = uncertainty();
  t.shaping = shaping;
  t.seed = run_seed;
  t.eval_every = eval_every;
  t.eval_episodes = eval_episodes;
  t.learning_rate = learning_rate;
  t.init_scale = init_scale;
  t.grammar_prior = grammar_prior;
  return t;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InvalidConfig("seeds must be non-empty");
  train_config().validate();
}

ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig c;
  const std::map<std::string, Setter> env = {
      {"kind", [&](const ordered_json& v) { c.env = parse_env_kind(as_string(v, "env.kind")); }},
      {"max_steps", [&](const ordered_json& v) { c.max_steps = as_int(v, "env.max_steps"); }},
  };
  const std::map<std::string, Setter> unc = {
      {"w_ent", [&](const ordered_json& v) { c.w_ent = as_real(v, "uncertainty.w_ent"); }},
      {"w_lc", [&](const ordered_json& v) { c.w_lc = as_real(v, "uncertainty.w_lc"); }},
      {"w_mar", [&](const ordered_json& v) { c.w_mar = as_real(v, "uncertainty.w_mar"); }},
      {"margin_scale", [&](const ordered_json& v) { c.margin_scale = as_real(v, "uncertainty.margin_scale"); }},
      {"lambda", [&](const ordered_json& v) { c.lambda = as_real(v, "uncertainty.lambda"); }},
  };
  const std::map<std::string, Setter> shaping = {
      {"mode", [&](const ordered_json& v) { c.shaping.mode = parse_reward_mode(as_string(v, "shaping.mode")); }},
      {"level", [&](const ordered_json& v) { c.shaping.level = parse_shaping_level(as_string(v, "shaping.level")); }},
      {"w_fail", [&](const ordered_json& v) { c.shaping.w_fail = as_real(v, "shaping.w_fail"); }},
  };
  const std::map<std::string, Setter> train = {
      {"group_size", [&](const ordered_json& v) { c.group_size = as_int(v, "train.group_size"); }},
      {"iters", [&](const ordered_json& v) { c.train_iters = as_int(v, "train.iters"); }},
      {"eval_every", [&](const ordered_json& v) { c.eval_every = as_int(v, "train.eval_every"); }},
      {"eval_episodes", [&](const ordered_json& v) { c.eval_episodes = as_int(v, "train.eval_episodes"); }},
      {"learning_rate", [&](const ordered_json& v) { c.learning_rate = as_real(v, "train.learning_rate"); }},
      {"init_scale", [&](const ordered_json& v) { c.init_scale = as_real(v, "train.init_scale"); }},
      {"grammar_prior", [&](const ordered_json& v) { c.grammar_prior = as_real(v, "train.grammar_prior"); }},
  };
  const std::map<std::string, Setter> top = {
      {"env", [&](const ordered_json& v) { apply_section(v, "env", env); }},
      {"uncertainty", [&](const ordered_json& v) { apply_section(v, "uncertainty", unc); }},
      {"shaping", [&](const ordered_json& v) { apply_section(v, "shaping", shaping); }},
      {"train", [&](const ordered_json& v) { apply_section(v, "train", train); }},
      {"seed", [&](const ordered_json& v) { c.seed = as_seed(v, "seed"); }},
      {"seeds", [&](const ordered_json& v) {
         if (!v.is_array()) bad("seeds", "expected an array");
         c.seeds.clear();
         for (const auto& s : v) c.seeds.push_back(as_seed(s, "seeds"));
       }},
  };
  apply_section(j, "<root>", top);
  c.validate();
  return c;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["env"] = {{"kind", to_string(c.env)}, {"max_steps", c.max_steps}};
  j["uncertainty"] = {{"w_ent", c.w_ent},
                      {"w_lc", c.w_lc},
                      {"w_mar", c.w_mar},
                      {"margin_scale", c.margin_scale},
                      {"lambda", c.lambda}};
  j["shaping"] = {{"mode", to_string(c.shaping.mode)},
                  {"level", to_string(c.shaping.level)},
                  {"w_fail", c.shaping.w_fail}};
  j["train"] = {{"group_size", c.group_size},
                {"iters", c.train_iters},
                {"eval_every", c.eval_every},
                {"eval_episodes", c.eval_episodes},
                {"learning_rate", c.learning_rate},
                {"init_scale", c.init_scale},
                {"grammar_prior", c.grammar_prior}};
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace uqrl
