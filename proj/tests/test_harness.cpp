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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "uqrl/config.hpp"
#include "uqrl/errors.hpp"
#include "uqrl/harness.hpp"

using namespace uqrl;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  c.train_iters = 12;
  c.eval_every = 4;
  c.eval_episodes = 6;
  c.grammar_prior = 1.5;
  c.seeds = {0, 1};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UQRL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("uqrl_harness_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kSource = UQRL_SOURCE_DIR;

}  // namespace

TEST_CASE("config json round trip") {
  ExperimentConfig c;
  c.env = EnvKind::kShop;
  c.max_steps = 6;
  c.w_ent = 0.2;
  c.w_lc = 0.0;
  c.w_mar = 0.7;
  c.margin_scale = 0.5;
  c.lambda = 0.75;
  c.shaping = {0.8, RewardMode::kExponential, ShapingLevel::kTrajectoryLevel};
  c.group_size = 4;
  c.train_iters = 33;
  c.learning_rate = 0.3;
  c.grammar_prior = 1.25;
  c.seed = 7;
  c.seeds = {3, 9};
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.shaping.mode == RewardMode::kExponential);
  CHECK(back.seeds == std::vector<std::uint64_t>{3, 9});

  // A partial document keeps defaults elsewhere.
  const auto p = config_from_json(ordered_json::parse(R"({"shaping":{"mode":"negative"}})"));
  CHECK(p.shaping.mode == RewardMode::kNegative);
  CHECK(p.train_iters == 150);
  CHECK(p.lambda == 0.9);

  const auto path = fs::temp_directory_path() / "uqrl_config_test.json";
  save_config(c, path.string());
  CHECK(config_to_json(load_config(path.string())) == j);
  fs::remove(path);

  for (const char* file : {"default.json", "directional.json"})
    CHECK_NOTHROW(load_config(kSource + "/configs/" + file).validate());
}

TEST_CASE("config json is strict") {
  for (const char* bad : {
           R"({"bogus":1})",
           R"({"train":{"iters":"ten"}})",
           R"({"train":{"itters":10}})",
           R"({"env":{"kind":"maze"}})",
           R"({"shaping":{"level":"episode"}})",
           R"({"seeds":[1,-2]})",
           R"({"env":3})",
           R"([1,2])",
       }) {
    INFO(bad);
    CHECK_THROWS_AS(config_from_json(ordered_json::parse(bad)), InvalidConfig);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/uqrl.json"), InvalidConfig);

  ExperimentConfig c;
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = ExperimentConfig{};
  c.w_ent = c.w_lc = c.w_mar = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("grid row configs") {
  ExperimentConfig base;
  base.shaping.mode = RewardMode::kBaseline;
  const auto none = grid_row_config(base, 0);
  CHECK(none.shaping.mode == RewardMode::kBaseline);
  CHECK(none.w_ent == base.w_ent);
  const auto lc = grid_row_config(base, 2);
  CHECK(lc.shaping.mode == RewardMode::kSelaur);
  CHECK(lc.w_ent == 0.0);
  CHECK(lc.w_lc == 1.0);
  CHECK(lc.w_mar == 0.0);
  const auto ent_mar = grid_row_config(base, 5);
  CHECK(ent_mar.w_ent == 0.5);
  CHECK(ent_mar.w_lc == 0.0);
  CHECK(ent_mar.w_mar == 0.5);
  base.shaping.mode = RewardMode::kNegative;
  CHECK(grid_row_config(base, 7).shaping.mode == RewardMode::kNegative);
  CHECK_THROWS_AS(grid_row_config(base, 8), InvalidConfig);
}

TEST_CASE("aggregate statistics") {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto a = aggregate(xs);
  CHECK(a.n == 4);
  CHECK(a.mean == 2.5);
  CHECK(a.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(aggregate(std::vector<double>{5}).std == 0.0);
}

TEST_CASE("late entropy averages the last quarter") {
  MetricsLog log;
  for (int i = 0; i < 8; ++i) log.rows.push_back({i, RewardMode::kSelaur, 0, 0, double(i), 0, 0});
  CHECK(late_entropy(log, 8) == 6.5);
}

TEST_CASE("ablation grid") {
  const auto base = small_config(EnvKind::kShop);
  const auto report = run_ablation_grid(base, base.seeds);
  REQUIRE(report.rows.size() == 8);
  CHECK(report.rows[0].label() == "none");
  CHECK(report.rows[7].label() == "ent+lc+mar");
  CHECK(report.rows[0].mode == RewardMode::kBaseline);

  // Row 0 is a plain baseline run.
  auto direct = grid_row_config(base, 0);
  for (std::size_t k = 0; k < base.seeds.size(); ++k) {
    const auto r = run_once(direct.train_config(base.seeds[k]));
    CHECK(r.log.to_csv() == report.rows[0].runs[k].log.to_csv());
  }

  const auto runs = lines_of(report.runs_csv());
  REQUIRE(runs.size() == 1 + 8 * 2);
  CHECK(runs[0] == GridReport::kRunsHeader);
  const auto summary = lines_of(report.summary_csv());
  REQUIRE(summary.size() == 1 + 8);
  CHECK(summary[0] == GridReport::kSummaryHeader);
  CHECK(summary[1].rfind("none,0,0,0,baseline,2,", 0) == 0);

  CHECK(run_ablation_grid(base, base.seeds, kernels::Execution::kSerial).runs_csv() ==
        report.runs_csv());
  CHECK_THROWS_AS(run_ablation_grid(base, std::vector<std::uint64_t>{}), InvalidConfig);
}

TEST_CASE("reward variants") {
  const auto base = small_config(EnvKind::kKeyDoor);
  const auto report = run_reward_variants(base, base.seeds);
  REQUIRE(report.rows.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(report.rows[i].env == (i < 4 ? EnvKind::kKeyDoor : EnvKind::kShop));
    CHECK(report.rows[i].mode == kAllModes[i % 4]);
    CHECK(report.rows[i].runs.size() == 2);
  }
  CHECK(lines_of(report.runs_csv()).size() == 1 + 8 * 2);
  CHECK(lines_of(report.summary_csv())[0] == VariantReport::kSummaryHeader);
}

TEST_CASE("annotation of the sample records") {
  const ExperimentConfig cfg;
  std::ifstream in(kSource + "/docs/samples/external_trajectories.jsonl");
  std::ostringstream out;
  score_external(in, out, cfg);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2);

  const auto ep1 = ordered_json::parse(lines[0]);
  CHECK(ep1["id"] == "ep-1");
  const auto& a = ep1["annotations"];
  const auto third = 1.0L / 3;
  const auto d00 = TokenDistribution::top_k({0.6, 0.3}, 5, 0.1, 0);
  const auto d01 = TokenDistribution::top_k({0.5, 0.5}, 2, 0.0, 1);
  const auto d10 = TokenDistribution::top_k({0.9}, 100, 0.1, 0);
  const double u00 = double(oracle::aggregate(d00, third, third, third, 1));
  const double u01 = double(oracle::aggregate(d01, third, third, third, 1));
  const double u10 = double(oracle::aggregate(d10, third, third, third, 1));
  CHECK(a["token_uncertainty"][0][0].get<double>() == doctest::Approx(u00).epsilon(1e-12));
  CHECK(a["token_uncertainty"][0][1].get<double>() == doctest::Approx(u01).epsilon(1e-12));
  CHECK(a["token_uncertainty"][1][0].get<double>() == doctest::Approx(u10).epsilon(1e-12));
  const double s0 = (u00 + u01) / 2;
  CHECK(a["step_uncertainty"][0].get<double>() == doctest::Approx(s0).epsilon(1e-12));
  const double ut = (0.9 * s0 + u10) / 1.9;
  CHECK(a["trajectory_uncertainty"].get<double>() == doctest::Approx(ut).epsilon(1e-12));
  CHECK(a["shaped_step_rewards"][0].get<double>() == doctest::Approx(0.95 * s0).epsilon(1e-12));
  CHECK(a["shaped_step_rewards"][1].get<double>() == doctest::Approx(0.95 * u10).epsilon(1e-12));
  CHECK(a["shaped_trajectory_reward"].get<double>() == doctest::Approx(ut).epsilon(1e-12));
  CHECK(a["mode"] == "selaur");

  // Uniform over four tokens.
  const auto ep2 = ordered_json::parse(lines[1])["annotations"];
  CHECK(ep2["token_uncertainty"][0][0].get<double>() == 0.8270195262100015);
  CHECK(ep2["shaped_trajectory_reward"].get<double>() == 1.0);

  // Input bytes survive as a prefix.
  std::ifstream again(kSource + "/docs/samples/external_trajectories.jsonl");
  std::string first;
  std::getline(again, first);
  CHECK(lines[0].substr(0, first.size() - 1) == first.substr(0, first.size() - 1));
}

TEST_CASE("annotation is idempotent") {
  const ExperimentConfig cfg;
  const std::string rec =
      R"({"steps":[{"step_index":2,"tokens":[{"chosen_rank":0,"topk_probs":[0.7,0.2],"residual_mass":0.1,"vocab_size":3}],"env_reward":0}],"terminal":{"success":false,"score":0.25},"extra":[1,2]})";
  const auto once = annotate_record(rec, cfg);
  CHECK(once == annotate_record(once, cfg));
  CHECK(once.rfind(rec.substr(0, rec.size() - 1), 0) == 0);

  ExperimentConfig neg = cfg;
  neg.shaping.mode = RewardMode::kNegative;
  const auto a = ordered_json::parse(once)["annotations"];
  const auto b = ordered_json::parse(annotate_record(once, neg))["annotations"];
  CHECK(b["shaped_step_rewards"][0].get<double>() == -a["shaped_step_rewards"][0].get<double>());
  CHECK(b["mode"] == "negative");
}

TEST_CASE("malformed records report their line") {
  const ExperimentConfig cfg;
  auto message = [&](const std::string& in) {
    std::istringstream is(in);
    std::ostringstream os;
    try {
      score_external(is, os, cfg);
    } catch (const InvalidInput& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string good =
      R"({"steps":[{"step_index":0,"tokens":[{"chosen_rank":0,"topk_probs":[1.0],"residual_mass":0,"vocab_size":2}],"env_reward":1}],"terminal":{"success":true,"score":1}})";
  CHECK(message(good + "\n\n{oops\n").rfind("line 3: malformed JSON", 0) == 0);
  CHECK(message(R"({"terminal":{"success":true,"score":1}})").find("line 1: record: missing 'steps'") == 0);
  // Probabilities plus residual must sum to one.
  CHECK(message(R"({"steps":[{"step_index":0,"tokens":[{"chosen_rank":0,"topk_probs":[0.5],"residual_mass":0.1,"vocab_size":4}],"env_reward":0}],"terminal":{"success":false,"score":0}})")
            .rfind("line 1: steps[0].tokens[0]", 0) == 0);
  // Not sorted, rank out of range, non-increasing index, bad terminal.
  for (const char* bad : {
           R"({"steps":[{"step_index":0,"tokens":[{"chosen_rank":0,"topk_probs":[0.2,0.8],"residual_mass":0,"vocab_size":2}],"env_reward":0}],"terminal":{"success":false,"score":0}})",
           R"({"steps":[{"step_index":0,"tokens":[{"chosen_rank":5,"topk_probs":[1.0],"residual_mass":0,"vocab_size":2}],"env_reward":0}],"terminal":{"success":false,"score":0}})",
           R"({"steps":[{"step_index":1,"tokens":[{"chosen_rank":0,"topk_probs":[1.0],"residual_mass":0,"vocab_size":2}],"env_reward":0},{"step_index":1,"tokens":[{"chosen_rank":0,"topk_probs":[1.0],"residual_mass":0,"vocab_size":2}],"env_reward":0}],"terminal":{"success":false,"score":0}})",
           R"({"steps":[{"step_index":0,"tokens":[{"chosen_rank":0,"topk_probs":[1.0],"residual_mass":0,"vocab_size":2}],"env_reward":0}],"terminal":{"success":1,"score":0}})",
           R"({"steps":[],"terminal":{"success":false,"score":0}})",
           R"([1])",
       }) {
    INFO(bad);
    CHECK(message(bad).rfind("line 1: ", 0) == 0);
  }
  const auto annotated = annotate_record(good, cfg);
  const auto moved = R"({"annotations":{},)" + good.substr(1);
  CHECK(message(moved).find("must be the last member") != std::string::npos);
  CHECK(message(annotated) == "no error");

  std::istringstream empty("");
  std::ostringstream os;
  score_external(empty, os, cfg);
  CHECK(os.str().empty());
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("train") == 1);
  CHECK(run_cli("train --out /tmp/x --bogus") == 1);
  CHECK(run_cli("train --out " + scratch("badcfg").string() + " --group-size 1") == 1);
  CHECK(run_cli("train --out " + scratch("badenv").string() + " --env maze") == 1);
  CHECK(run_cli("score /nonexistent.jsonl") == 2);
  const auto bad = scratch("bad.jsonl");
  std::ofstream(bad) << "{\n";
  CHECK(run_cli("score " + bad.string()) == 2);
  fs::remove(bad);
  const auto scored = scratch("scored.jsonl");
  CHECK(run_cli("score " + kSource + "/docs/samples/external_trajectories.jsonl --out " +
                scored.string()) == 0);
  CHECK(lines_of(slurp(scored)).size() == 2);
  fs::remove(scored);
}

TEST_CASE("cli train is deterministic") {
  const auto a = scratch("train_a"), b = scratch("train_b");
  const std::string args = " --config " + kSource +
                           "/configs/directional.json --env shop --iters 15 --seed 3";
  REQUIRE(run_cli("train --out " + a.string() + args) == 0);
  REQUIRE(run_cli("train --out " + b.string() + args) == 0);
  for (const char* f : {"config.json", "metrics.csv", "traces.jsonl", "policy.json"}) {
    INFO(f);
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // The echoed config reproduces the run.
  const auto echoed = load_config((a / "config.json").string());
  CHECK(echoed.env == EnvKind::kShop);
  CHECK(echoed.train_iters == 15);
  CHECK(echoed.seed == 3);
  CHECK(run_once(echoed.train_config()).log.to_csv() == slurp(a / "metrics.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli ablations write their tables") {
  const auto out = scratch("grid");
  REQUIRE(run_cli("ablate-metrics --out " + out.string() +
                  " --env shop --iters 6 --seeds 0,1") == 0);
  CHECK(lines_of(slurp(out / "ablation_runs.csv")).size() == 17);
  CHECK(lines_of(slurp(out / "ablation_summary.csv")).size() == 9);
  CHECK(fs::exists(out / "curves" / "none_seed0.csv"));
  CHECK(fs::exists(out / "curves" / "ent+lc+mar_seed1.csv"));
  fs::remove_all(out);

  const auto rew = scratch("rewards");
  REQUIRE(run_cli("ablate-rewards --out " + rew.string() + " --iters 6 --seeds 4") == 0);
  CHECK(lines_of(slurp(rew / "rewards_summary.csv")).size() == 9);
  CHECK(fs::exists(rew / "curves" / "keydoor_selaur_seed4.csv"));
  fs::remove_all(rew);
}
