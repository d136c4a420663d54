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

// uqrl command-line entry point.
//
//   uqrl train          [flags] --out DIR   one training run
//   uqrl ablate-metrics [flags] --out DIR   8-row metric subset grid
//   uqrl ablate-rewards [flags] --out DIR   4 reward modes x 2 environments
//   uqrl score INPUT    [flags] [--out FILE] annotate logged trajectories
//
// Exit codes: 0 ok, 1 invalid config, 2 invalid input data, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uqrl/config.hpp"
#include "uqrl/errors.hpp"
#include "uqrl/harness.hpp"

namespace fs = std::filesystem;
using namespace uqrl;

namespace {

enum Exit { kOk = 0, kBadConfig = 1, kBadInput = 2, kRuntime = 3 };

struct Flags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::string env, mode, level;
  double lambda = 0, w_ent = 0, w_lc = 0, w_mar = 0, margin_scale = 0,
         w_fail = 0;
  int group_size = 0, iters = 0;
  std::string out;
  std::string input;
};

struct Options {
  CLI::Option *seed, *seeds, *env, *mode, *level, *lambda, *w_ent, *w_lc,
      *w_mar, *margin_scale, *w_fail, *group_size, *iters;
};

Options add_common(CLI::App* app, Flags& f) {
  Options o{};
  app->add_option("--config", f.config_path, "JSON config file");
  o.seed = app->add_option("--seed", f.seed, "run seed");
  o.seeds = app->add_option("--seeds", f.seeds, "comma-separated seed list")
                ->delimiter(',');
  o.env = app->add_option("--env", f.env, "keydoor | shop");
  o.mode = app->add_option("--mode", f.mode,
                           "baseline | selaur | negative | exponential");
  o.level = app->add_option("--level", f.level, "step | traj");
  o.lambda = app->add_option("--lambda", f.lambda, "trajectory discount");
  o.w_ent = app->add_option("--w-ent", f.w_ent, "entropy weight");
  o.w_lc = app->add_option("--w-lc", f.w_lc, "least-confidence weight");
  o.w_mar = app->add_option("--w-mar", f.w_mar, "margin weight");
  o.margin_scale = app->add_option("--margin-scale", f.margin_scale,
                                   "margin sigmoid scale");
  o.w_fail = app->add_option("--w-fail", f.w_fail, "failure reward weight");
  o.group_size = app->add_option("--group-size", f.group_size, "rollouts per group");
  o.iters = app->add_option("--iters", f.iters, "training iterations");
  return o;
}

ExperimentConfig resolve(const Flags& f, const Options& o) {
  ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{}
                                             : load_config(f.config_path);
  if (*o.seed) c.seed = f.seed;
  if (*o.seeds) c.seeds = f.seeds;
  if (*o.env) c.env = parse_env_kind(f.env);
  if (*o.mode) c.shaping.mode = parse_reward_mode(f.mode);
  if (*o.level) c.shaping.level = parse_shaping_level(f.level);
  if (*o.lambda) c.lambda = f.lambda;
  if (*o.w_ent) c.w_ent = f.w_ent;
  if (*o.w_lc) c.w_lc = f.w_lc;
  if (*o.w_mar) c.w_mar = f.w_mar;
  if (*o.margin_scale) c.margin_scale = f.margin_scale;
  if (*o.w_fail) c.shaping.w_fail = f.w_fail;
  if (*o.group_size) c.group_size = f.group_size;
  if (*o.iters) c.train_iters = f.iters;
  c.validate();
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  save_config(cfg, (dir / "config.json").string());
  const TrainResult r = train(cfg.train_config());
  write_file(dir / "metrics.csv", r.log.to_csv());
  std::string traces;
  for (const auto& t : r.final_eval.traces) traces += trace_to_jsonl(cfg.env, t) + '\n';
  write_file(dir / "traces.jsonl", traces);
  save_policy(r.policy, dir / "policy.json");
  std::printf("%s %s seed %llu: success_rate %s mean_score %s\n",
              to_string(cfg.env).c_str(), to_string(cfg.shaping.mode).c_str(),
              static_cast<unsigned long long>(cfg.seed),
              format_double(r.final_eval.success_rate).c_str(),
              format_double(r.final_eval.mean_score).c_str());
  return kOk;
}

int cmd_ablate_metrics(const ExperimentConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  save_config(cfg, (dir / "config.json").string());
  const GridReport g = run_ablation_grid(cfg, cfg.seeds);
  fs::create_directories(dir / "curves");
  for (const auto& row : g.rows) {
    for (const auto& run : row.runs) {
      write_file(dir / "curves" / (row.label() + "_seed" + std::to_string(run.seed) + ".csv"),
                 run.log.to_csv());
    }
  }
  write_file(dir / "ablation_runs.csv", g.runs_csv());
  const std::string summary = g.summary_csv();
  write_file(dir / "ablation_summary.csv", summary);
  std::cout << summary;
  return kOk;
}

int cmd_ablate_rewards(const ExperimentConfig& cfg, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  save_config(cfg, (dir / "config.json").string());
  const VariantReport v = run_reward_variants(cfg, cfg.seeds);
  fs::create_directories(dir / "curves");
  for (const auto& row : v.rows) {
    for (const auto& run : row.runs) {
      write_file(dir / "curves" /
                     (to_string(row.env) + "_" + to_string(row.mode) + "_seed" +
                      std::to_string(run.seed) + ".csv"),
                 run.log.to_csv());
    }
  }
  write_file(dir / "rewards_runs.csv", v.runs_csv());
  const std::string summary = v.summary_csv();
  write_file(dir / "rewards_summary.csv", summary);
  std::cout << summary;
  return kOk;
}

int cmd_score(const ExperimentConfig& cfg, const std::string& input,
              const std::string& out_path) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw InvalidInput("cannot open input " + input);
  std::ostringstream buf;
  score_external(in, buf, cfg);
  if (out_path.empty() || out_path == "-") {
    std::cout << buf.str();
  } else {
    write_file(out_path, buf.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-aware reward shaping for group policy optimization", "uqrl"};
  app.require_subcommand(1);

  Flags train_f, grid_f, rew_f, score_f;
  auto* train_cmd = app.add_subcommand("train", "single training run");
  const Options train_o = add_common(train_cmd, train_f);
  train_cmd->add_option("--out", train_f.out, "output directory")->required();

  auto* grid_cmd = app.add_subcommand("ablate-metrics", "metric subset grid");
  const Options grid_o = add_common(grid_cmd, grid_f);
  grid_cmd->add_option("--out", grid_f.out, "output directory")->required();

  auto* rew_cmd = app.add_subcommand("ablate-rewards", "reward mode comparison");
  const Options rew_o = add_common(rew_cmd, rew_f);
  rew_cmd->add_option("--out", rew_f.out, "output directory")->required();

  auto* score_cmd = app.add_subcommand("score", "annotate external JSONL trajectories");
  const Options score_o = add_common(score_cmd, score_f);
  score_cmd->add_option("input", score_f.input, "input JSONL")->required();
  score_cmd->add_option("--out", score_f.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  try {
    if (*train_cmd) return cmd_train(resolve(train_f, train_o), train_f.out);
    if (*grid_cmd) return cmd_ablate_metrics(resolve(grid_f, grid_o), grid_f.out);
    if (*rew_cmd) return cmd_ablate_rewards(resolve(rew_f, rew_o), rew_f.out);
    return cmd_score(resolve(score_f, score_o), score_f.input, score_f.out);
  } catch (const InvalidConfig& e) {
    std::cerr << "uqrl: invalid config: " << e.what() << '\n';
    return kBadConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "uqrl: invalid input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "uqrl: error: " << e.what() << '\n';
    return kRuntime;
  }
}
