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

#ifndef UQRL_HARNESS_HPP_
#define UQRL_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqrl/config.hpp"

namespace uqrl {

struct RunSummary {
  std::uint64_t seed = 0;
  double success_rate = 0.0;  // final greedy evaluation
  double mean_score = 0.0;
  double late_entropy = 0.0;  // mean policy entropy over the last quarter
  MetricsLog log;
};

// Mean of mean_policy_entropy over rows with iter >= 3 * iters / 4.
double late_entropy(const MetricsLog& log, int train_iters);

RunSummary run_once(const TrainConfig& cfg);

struct Aggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when n < 2
};
Aggregate aggregate(std::span<const double> xs);

// One row per metric subset (entropy, least confidence, margin). The empty
// subset runs in Baseline mode with the base weights; other subsets keep
// the active weights renormalized and inactive ones at zero.
struct GridRow {
  std::array<bool, 3> active{};
  RewardMode mode = RewardMode::kSelaur;
  std::vector<RunSummary> runs;

  std::string label() const;  // e.g. "ent+mar", "none"
  Aggregate success() const;
  Aggregate score() const;
};

struct GridReport {
  EnvKind env = EnvKind::kKeyDoor;
  std::vector<GridRow> rows;

  static constexpr const char* kRunsHeader =
      "row,entropy,least_confidence,margin,mode,seed,success_rate,mean_score,"
      "late_entropy";
  static constexpr const char* kSummaryHeader =
      "row,entropy,least_confidence,margin,mode,n,mean_success,std_success,"
      "mean_score,std_score";
  std::string runs_csv() const;
  std::string summary_csv() const;
};

// Config for grid row `mask` (bit 0 entropy, bit 1 least confidence, bit 2
// margin). Non-empty rows use the base mode, or Selaur if that is Baseline.
ExperimentConfig grid_row_config(const ExperimentConfig& base, unsigned mask);

// Rows in mask order 0..7. Cells (row x seed) run in parallel, each one
// internally serial; the result does not depend on exec.
GridReport run_ablation_grid(
    const ExperimentConfig& base, std::span<const std::uint64_t> seeds,
    kernels::Execution exec = kernels::Execution::kParallel);

struct VariantRow {
  EnvKind env = EnvKind::kKeyDoor;
  RewardMode mode = RewardMode::kBaseline;
  std::vector<RunSummary> runs;

  Aggregate success() const;
  Aggregate score() const;
  Aggregate entropy() const;
};

struct VariantReport {
  std::vector<VariantRow> rows;  // env-major, modes in declaration order

  static constexpr const char* kRunsHeader =
      "env,mode,seed,success_rate,mean_score,late_entropy";
  static constexpr const char* kSummaryHeader =
      "env,mode,n,mean_success,std_success,mean_score,std_score,"
      "mean_late_entropy,std_late_entropy";
  std::string runs_csv() const;
  std::string summary_csv() const;
};

inline constexpr std::array<RewardMode, 4> kAllModes = {
    RewardMode::kBaseline, RewardMode::kNegative, RewardMode::kExponential,
    RewardMode::kSelaur};

// 4 modes x both environments; the base config's env is ignored.
VariantReport run_reward_variants(
    const ExperimentConfig& base, std::span<const std::uint64_t> seeds,
    kernels::Execution exec = kernels::Execution::kParallel);

// Offline scoring of externally logged trajectories (one JSON object per
// line). Each record gets an "annotations" member appended as its last key;
// the original bytes are kept. Records that already carry annotations are
// re-scored from scratch. Errors throw InvalidInput prefixed "line N:".
std::string annotate_record(std::string_view line, const ExperimentConfig& cfg,
                            std::size_t line_no = 1);
void score_external(std::istream& in, std::ostream& out,
                    const ExperimentConfig& cfg);

}  // namespace uqrl

#endif  // UQRL_HARNESS_HPP_
