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

#include "uqrl/harness.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "uqrl/errors.hpp"

namespace uqrl {
namespace {

using nlohmann::ordered_json;

constexpr std::array<const char*, 3> kMetricNames = {"ent", "lc", "mar"};

// Trains every config into its own slot; no shared state between cells.
std::vector<RunSummary> run_cells(const std::vector<TrainConfig>& cells,
                                  kernels::Execution exec) {
  std::vector<RunSummary> out(cells.size());
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
  if (exec == kernels::Execution::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = run_once(cells[i]);
    return out;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      TrainConfig c = cells[i];
      c.execution = kernels::Execution::kSerial;
      out[i] = run_once(c);
    } catch (...) {
#pragma omp critical(uqrl_harness_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

void require_seeds(std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw InvalidConfig("seeds must be non-empty");
}

}  // namespace

double late_entropy(const MetricsLog& log, int train_iters) {
  const int start = 3 * train_iters / 4;
  double sum = 0.0;
  int n = 0;
  for (const auto& r : log.rows) {
    if (r.iter >= start) {
      sum += r.mean_policy_entropy;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

RunSummary run_once(const TrainConfig& cfg) {
  TrainResult r = train(cfg);
  RunSummary s;
  s.seed = cfg.seed;
  s.success_rate = r.final_eval.success_rate;
  s.mean_score = r.final_eval.mean_score;
  s.late_entropy = late_entropy(r.log, cfg.train_iters);
  s.log = std::move(r.log);
  return s;
}

Aggregate aggregate(std::span<const double> xs) {
  Aggregate a;
  a.n = xs.size();
  if (xs.empty()) return a;
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

namespace {

template <typename Get>
Aggregate aggregate_runs(const std::vector<RunSummary>& runs, Get get) {
  std::vector<double> xs;
  xs.reserve(runs.size());
  for (const auto& r : runs) xs.push_back(get(r));
  return aggregate(xs);
}

}  // namespace

std::string GridRow::label() const {
  std::string s;
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (!active[k]) continue;
    if (!s.empty()) s += '+';
    s += kMetricNames[k];
  }
  return s.empty() ? "none" : s;
}

Aggregate GridRow::success() const {
  return aggregate_runs(runs, [](const RunSummary& r) { return r.success_rate; });
}
Aggregate GridRow::score() const {
  return aggregate_runs(runs, [](const RunSummary& r) { return r.mean_score; });
}

ExperimentConfig grid_row_config(const ExperimentConfig& base, unsigned mask) {
  if (mask > 7) throw InvalidConfig("grid row mask must be in [0, 7]");
  ExperimentConfig c = base;
  if (mask == 0) {
    c.shaping.mode = RewardMode::kBaseline;
    return c;
  }
  if (c.shaping.mode == RewardMode::kBaseline)
    c.shaping.mode = RewardMode::kSelaur;
  const bool e = mask & 1u, l = mask & 2u, m = mask & 4u;
  const double n = static_cast<double>(e + l + m);
  c.w_ent = e ? 1.0 / n : 0.0;
  c.w_lc = l ? 1.0 / n : 0.0;
  c.w_mar = m ? 1.0 / n : 0.0;
  return c;
}

GridReport run_ablation_grid(const ExperimentConfig& base,
                             std::span<const std::uint64_t> seeds,
                             kernels::Execution exec) {
  require_seeds(seeds);
  base.validate();
  std::vector<TrainConfig> cells;
  GridReport report;
  report.env = base.env;
  for (unsigned mask = 0; mask < 8; ++mask) {
    const ExperimentConfig rc = grid_row_config(base, mask);
    GridRow row;
    row.active = {(mask & 1u) != 0, (mask & 2u) != 0, (mask & 4u) != 0};
    row.mode = rc.shaping.mode;
    report.rows.push_back(row);
    for (auto s : seeds) cells.push_back(rc.train_config(s));
  }
  auto runs = run_cells(cells, exec);
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    for (std::size_t k = 0; k < seeds.size(); ++k)
      report.rows[r].runs.push_back(std::move(runs[r * seeds.size() + k]));
  }
  return report;
}

std::string GridReport::runs_csv() const {
  std::ostringstream out;
  out << kRunsHeader << '\n';
  for (const auto& row : rows) {
    for (const auto& run : row.runs) {
      out << row.label() << ',' << flag(row.active[0]) << ','
          << flag(row.active[1]) << ',' << flag(row.active[2]) << ','
          << to_string(row.mode) << ',' << run.seed << ','
          << format_double(run.success_rate) << ','
          << format_double(run.mean_score) << ','
          << format_double(run.late_entropy) << '\n';
    }
  }
  return out.str();
}

std::string GridReport::summary_csv() const {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& row : rows) {
    const auto s = row.success();
    const auto q = row.score();
    out << row.label() << ',' << flag(row.active[0]) << ','
        << flag(row.active[1]) << ',' << flag(row.active[2]) << ','
        << to_string(row.mode) << ',' << s.n << ',' << format_double(s.mean)
        << ',' << format_double(s.std) << ',' << format_double(q.mean) << ','
        << format_double(q.std) << '\n';
  }
  return out.str();
}

Aggregate VariantRow::success() const {
  return aggregate_runs(runs, [](const RunSummary& r) { return r.success_rate; });
}
Aggregate VariantRow::score() const {
  return aggregate_runs(runs, [](const RunSummary& r) { return r.mean_score; });
}
Aggregate VariantRow::entropy() const {
  return aggregate_runs(runs, [](const RunSummary& r) { return r.late_entropy; });
}

VariantReport run_reward_variants(const ExperimentConfig& base,
                                  std::span<const std::uint64_t> seeds,
                                  kernels::Execution exec) {
  require_seeds(seeds);
  base.validate();
  VariantReport report;
  std::vector<TrainConfig> cells;
  for (EnvKind env : {EnvKind::kKeyDoor, EnvKind::kShop}) {
    for (RewardMode mode : kAllModes) {
      ExperimentConfig c = base;
      c.env = env;
      c.shaping.mode = mode;
      report.rows.push_back(VariantRow{env, mode, {}});
      for (auto s : seeds) cells.push_back(c.train_config(s));
    }
  }
  auto runs = run_cells(cells, exec);
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    for (std::size_t k = 0; k < seeds.size(); ++k)
      report.rows[r].runs.push_back(std::move(runs[r * seeds.size() + k]));
  }
  return report;
}

std::string VariantReport::runs_csv() const {
  std::ostringstream out;
  out << kRunsHeader << '\n';
  for (const auto& row : rows) {
    for (const auto& run : row.runs) {
      out << to_string(row.env) << ',' << to_string(row.mode) << ','
          << run.seed << ',' << format_double(run.success_rate) << ','
          << format_double(run.mean_score) << ','
          << format_double(run.late_entropy) << '\n';
    }
  }
  return out.str();
}

std::string VariantReport::summary_csv() const {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& row : rows) {
    const auto s = row.success();
    const auto q = row.score();
    const auto h = row.entropy();
    out << to_string(row.env) << ',' << to_string(row.mode) << ',' << s.n
        << ',' << format_double(s.mean) << ',' << format_double(s.std) << ','
        << format_double(q.mean) << ',' << format_double(q.std) << ','
        << format_double(h.mean) << ',' << format_double(h.std) << '\n';
  }
  return out.str();
}

// ---- external scoring ----

namespace {

class RecordError {
 public:
  explicit RecordError(std::size_t line) : prefix_("line " + std::to_string(line) + ": ") {}
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput(prefix_ + what);
  }

 private:
  std::string prefix_;
};

const ordered_json& field(const ordered_json& obj, const char* key,
                          const std::string& where, const RecordError& err) {
  const auto it = obj.find(key);
  if (it == obj.end()) err.fail(where + ": missing '" + key + "'");
  return *it;
}

double real_field(const ordered_json& obj, const char* key,
                  const std::string& where, const RecordError& err) {
  const auto& v = field(obj, key, where, err);
  if (!v.is_number()) err.fail(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::uint64_t count_field(const ordered_json& obj, const char* key,
                          const std::string& where, const RecordError& err) {
  const auto& v = field(obj, key, where, err);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  err.fail(where + "." + key + ": expected a non-negative integer");
}

Trajectory parse_trajectory(const ordered_json& j, const UncertaintyConfig& ucfg,
                            const RecordError& err) {
  const auto& steps = field(j, "steps", "record", err);
  if (!steps.is_array() || steps.empty())
    err.fail("record.steps: expected a non-empty array");
  Trajectory traj;
  std::int64_t last_index = -1;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const std::string where = "steps[" + std::to_string(t) + "]";
    const auto& s = steps[t];
    if (!s.is_object()) err.fail(where + ": expected an object");
    const auto index = static_cast<std::int64_t>(count_field(s, "step_index", where, err));
    if (index <= last_index) err.fail(where + ".step_index: must be strictly increasing");
    last_index = index;
    StepRecord rec;
    rec.state = static_cast<int>(t);
    rec.env_reward = real_field(s, "env_reward", where, err);
    const auto& tokens = field(s, "tokens", where, err);
    if (!tokens.is_array() || tokens.empty())
      err.fail(where + ".tokens: expected a non-empty array");
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      const std::string tw = where + ".tokens[" + std::to_string(k) + "]";
      const auto& tok = tokens[k];
      if (!tok.is_object()) err.fail(tw + ": expected an object");
      const auto& probs = field(tok, "topk_probs", tw, err);
      if (!probs.is_array()) err.fail(tw + ".topk_probs: expected an array");
      std::vector<double> p;
      for (const auto& x : probs) {
        if (!x.is_number()) err.fail(tw + ".topk_probs: expected numbers");
        p.push_back(x.get<double>());
      }
      const auto rank = count_field(tok, "chosen_rank", tw, err);
      const auto vocab = count_field(tok, "vocab_size", tw, err);
      const double residual = real_field(tok, "residual_mass", tw, err);
      try {
        rec.distributions.push_back(TokenDistribution::top_k(
            std::move(p), static_cast<std::size_t>(vocab), residual,
            static_cast<std::size_t>(rank)));
      } catch (const InvalidInput& e) {
        err.fail(tw + ": " + e.what());
      }
      rec.tokens.push_back(static_cast<int>(rank));
    }
    traj.steps.push_back(std::move(rec));
  }
  const auto& term = field(j, "terminal", "record", err);
  if (!term.is_object()) err.fail("record.terminal: expected an object");
  const auto& success = field(term, "success", "terminal", err);
  if (!success.is_boolean()) err.fail("terminal.success: expected a boolean");
  traj.success = success.get<bool>();
  traj.score = real_field(term, "score", "terminal", err);
  try {
    finalize_trajectory(traj, ucfg);
  } catch (const InvalidInput& e) {
    err.fail(e.what());
  }
  return traj;
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

std::string annotate_record(std::string_view line, const ExperimentConfig& cfg,
                            std::size_t line_no) {
  const RecordError err(line_no);
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    err.fail(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) err.fail("record must be a JSON object");

  std::string body(line);
  if (j.contains("annotations")) {
    // Only the trailing form this function writes can be stripped losslessly.
    const auto key = body.rfind("\"annotations\"");
    const auto comma = body.rfind(',', key);
    const auto close = body.rfind('}');
    bool ok = key != std::string::npos && comma != std::string::npos &&
              blank(std::string_view(body).substr(comma + 1, key - comma - 1));
    if (ok) {
      std::string stripped = body.substr(0, comma) + body.substr(close);
      ordered_json expect = j;
      expect.erase("annotations");
      try {
        ok = ordered_json::parse(stripped) == expect;
      } catch (const nlohmann::json::parse_error&) {
        ok = false;
      }
      if (ok) body = std::move(stripped);
    }
    if (!ok) err.fail("existing 'annotations' must be the last member");
    j.erase("annotations");
  }

  const UncertaintyConfig ucfg = cfg.uncertainty();
  const Trajectory traj = parse_trajectory(j, ucfg, err);

  ShapingConfig step_cfg = cfg.shaping;
  step_cfg.level = ShapingLevel::kStepWise;
  ShapingConfig traj_cfg = cfg.shaping;
  traj_cfg.level = ShapingLevel::kTrajectoryLevel;

  ordered_json tokens = ordered_json::array();
  ordered_json steps = ordered_json::array();
  for (const auto& s : traj.steps) {
    tokens.push_back(s.token_uncertainties);
    steps.push_back(*s.step_uncertainty);
  }
  ordered_json ann;
  ann["mode"] = to_string(cfg.shaping.mode);
  ann["token_uncertainty"] = std::move(tokens);
  ann["step_uncertainty"] = std::move(steps);
  ann["trajectory_uncertainty"] = *traj.trajectory_uncertainty;
  ann["shaped_step_rewards"] = shape_step_rewards(traj, step_cfg);
  ann["shaped_trajectory_reward"] = shape_trajectory_reward(traj, traj_cfg);

  const auto close = body.rfind('}');
  return body.substr(0, close) + ",\"annotations\":" + ann.dump() +
         body.substr(close);
}

void score_external(std::istream& in, std::ostream& out,
                    const ExperimentConfig& cfg) {
  cfg.validate();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    out << annotate_record(line, cfg, line_no) << '\n';
  }
}

}  // namespace uqrl
