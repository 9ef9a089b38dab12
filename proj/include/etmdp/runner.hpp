/*
 * Copyright 2026 The etmdp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ETMDP_RUNNER_HPP
#define ETMDP_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "etmdp/analysis.hpp"
#include "etmdp/config.hpp"

namespace etmdp::cli {

struct EvalStats {
  double mean_return = 0.0;  // base rewards only, r_e excluded
  double mean_cost = 0.0;
  double success_rate = 0.0;  // maze only: goal reached with zero cost
  int episodes = 0;
};

// Greedy evaluation on a fresh environment built from cfg.
EvalStats evaluate(const agents::Agent& agent, const RunConfig& cfg,
                   int episodes, std::uint64_t seed);

struct SeedResult {
  std::uint64_t seed = 0;
  analysis::CurveRun curve;
  EvalStats final_eval;
  std::size_t skipped_updates = 0;
};

// Trains one seed. When seed_dir is non-empty it receives curves.csv,
// train_log.csv and the final checkpoint.
SeedResult train_seed(const RunConfig& cfg, std::uint64_t seed,
                      const std::filesystem::path& seed_dir);

// One sub-directory per seed plus manifest.txt with the resolved config.
// Seeds are spread over cfg.workers threads.
std::vector<SeedResult> cmd_train(const RunConfig& cfg);

// Reloads every seed's checkpoint under run_dir and evaluates it.
std::vector<EvalStats> cmd_eval(const std::filesystem::path& run_dir,
                                int episodes);

struct RegretBenchOptions {
  int n_instances = 50;
  std::vector<int> sizes{20};
  double invalid_fraction = 0.5;
  int n_actions = 3;
  int horizon = 10;
  // 0 picks |S| * |A| + 10.
  int episodes = 0;
  double reward_end = -1.0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no files
};

struct RegretBenchRow {
  int instance = 0;
  int n_states = 0;
  int n_invalid = 0;
  double et_regret = 0.0;
  double cmdp_regret = 0.0;
  double measured_ratio = 0.0;
  double analytic_ratio = 0.0;
  double et_bound = 0.0;
  double cmdp_bound = 0.0;
  double savings = 0.0;
  bool curves_identical = false;

  bool within_bound() const {
    return et_regret <= et_bound && cmdp_regret <= cmdp_bound;
  }
};

struct RegretBenchSummary {
  std::vector<RegretBenchRow> rows;
  double mean_measured_ratio = 0.0;
  double analytic_floor = 0.0;  // of the first size
  int ratio_above_one = 0;
  int within_bound = 0;
  double mean_savings = 0.0;
};

RegretBenchSummary cmd_regret_bench(const RegretBenchOptions& opts);

struct VisitationOptions {
  int level = 4;
  bool early_terminated = true;
  long steps = 50'000;
  std::uint64_t seed = 0;
  int resolution = 64;
  std::filesystem::path out_dir;  // empty: no files
};

struct VisitationSummary {
  analysis::VisitationHistogram histogram;
  // Fraction of mass outside the level's enclosing ring (-1 without one).
  double outside_fraction = -1.0;
};

VisitationSummary cmd_visitation(const VisitationOptions& opts);

// Aggregates every seed's curves.csv under run_dir into curves.svg and
// curves_summary.csv. Returns the SVG path.
std::filesystem::path cmd_plot(const std::filesystem::path& run_dir);

}  // namespace etmdp::cli

#endif  // ETMDP_RUNNER_HPP
