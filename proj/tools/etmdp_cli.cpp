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

// Command-line front end. Talks to the library only through etmdp.h.

#include <CLI11.hpp>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "etmdp/etmdp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int report(etmdp_status status) {
  if (status == ETMDP_OK) return kExitOk;
  std::fprintf(stderr, "etmdp: %s: %s\n", etmdp_status_name(status), etmdp_last_error());
  return status == ETMDP_ERR_CONFIG || status == ETMDP_ERR_INVALID_ARGUMENT ? kExitConfig
                                                                            : kExitRuntime;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  std::istringstream in(etmdp_config_keys());
  for (std::string k; std::getline(in, k);) {
    if (!k.empty() && k != "code.version") keys.push_back(k);
  }
  return keys;
}

// Seed default for subcommands without a config file.
bool env_seed(std::uint64_t& seed) {
  const char* text = std::getenv("ETMDP_SEED");
  if (text == nullptr || *text == '\0') return true;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (errno != 0 || *end != '\0' || *text == '-') return false;
  seed = v;
  return true;
}

struct TrainArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

int run_train(const TrainArgs& args) {
  std::string text;
  if (!args.config_file.empty()) {
    std::ifstream in(args.config_file);
    if (!in) {
      std::fprintf(stderr, "etmdp: cannot read config file %s\n", args.config_file.c_str());
      return kExitConfig;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    if (!text.empty() && text.back() != '\n') text += '\n';
  }
  for (const auto& [k, v] : args.overrides) text += k + " = " + v + "\n";
  const int rc = report(etmdp_run_train(text.c_str()));
  if (rc == kExitOk) std::printf("training finished\n");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-termination MDP experiments"};
  app.set_version_flag("--version", etmdp_version());
  app.require_subcommand(1);

  TrainArgs train_args;
  const std::vector<std::string> keys = config_keys();
  std::vector<std::string> key_values(keys.size());
  CLI::App* train = app.add_subcommand("train", "Train agents on every configured seed");
  train->add_option("-c,--config", train_args.config_file, "key = value configuration file");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    train->add_option("--" + keys[i], key_values[i], "override " + keys[i]);
  }

  std::string run_dir;
  int eval_episodes = 10;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate the checkpoints of a training run");
  eval->add_option("run_dir", run_dir, "run directory written by train")->required();
  eval->add_option("-n,--episodes", eval_episodes, "episodes per seed")->check(CLI::PositiveNumber);

  etmdp_regret_options regret;
  etmdp_regret_options_init(&regret);
  std::vector<int> sizes{20};
  std::string regret_out;
  std::uint64_t regret_seed = 0;
  CLI::App* bench = app.add_subcommand("regret-bench", "Optimistic learners on random tabular CMDPs");
  bench->add_option("--instances", regret.n_instances, "instances per size")->capture_default_str();
  bench->add_option("--sizes", sizes, "state counts")->delimiter(',');
  bench->add_option("--invalid-fraction", regret.invalid_fraction, "fraction of invalid states")
      ->capture_default_str();
  bench->add_option("--actions", regret.n_actions, "actions per state")->capture_default_str();
  bench->add_option("--horizon", regret.horizon, "episode length")->capture_default_str();
  bench->add_option("--episodes", regret.episodes, "learner episodes, 0 = |S||A| + 10")
      ->capture_default_str();
  bench->add_option("--reward-end", regret.reward_end, "termination reward")->capture_default_str();
  CLI::Option* bench_seed = bench->add_option("--seed", regret_seed, "instance generator seed");
  bench->add_option("-o,--out", regret_out, "output directory");

  etmdp_visitation_options visit;
  etmdp_visitation_options_init(&visit);
  std::string visit_out;
  std::string visit_mode = "et";
  std::uint64_t visit_seed = 0;
  CLI::App* vis = app.add_subcommand("visitation", "Random-agent state visitation heatmap");
  vis->add_option("--level", visit.level, "maze level")->check(CLI::Range(1, 4))->capture_default_str();
  vis->add_option("--mode", visit_mode, "et (binary early termination) or none")
      ->check(CLI::IsMember({"et", "none"}))
      ->capture_default_str();
  vis->add_option("--steps", visit.steps, "environment steps")->capture_default_str();
  CLI::Option* vis_seed = vis->add_option("--seed", visit_seed, "agent seed");
  vis->add_option("--resolution", visit.resolution, "cells per side")->capture_default_str();
  vis->add_option("-o,--out", visit_out, "output directory");

  std::string plot_dir;
  CLI::App* plot = app.add_subcommand("plot", "Render a run's learning curves to SVG");
  plot->add_option("run_dir", plot_dir, "run directory written by train")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (train->parsed()) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (train->count("--" + keys[i]) > 0) train_args.overrides[keys[i]] = key_values[i];
    }
    return run_train(train_args);
  }
  if (eval->parsed()) {
    double success = 0.0, ret = 0.0, cost = 0.0;
    const int rc = report(etmdp_run_eval(run_dir.c_str(), eval_episodes, &success, &ret, &cost));
    if (rc == kExitOk) {
      std::printf("success_rate = %.4f\nmean_return = %.4f\nmean_cost = %.4f\n", success, ret,
                  cost);
    }
    return rc;
  }
  if (bench->parsed()) {
    if (bench_seed->count() == 0 && !env_seed(regret_seed)) {
      std::fprintf(stderr, "etmdp: ETMDP_SEED must be a non-negative integer\n");
      return kExitConfig;
    }
    regret.seed = regret_seed;
    regret.sizes = sizes.data();
    regret.n_sizes = sizes.size();
    regret.out_dir = regret_out.empty() ? nullptr : regret_out.c_str();
    etmdp_regret_summary s{};
    const int rc = report(etmdp_run_regret_bench(&regret, &s));
    if (rc == kExitOk) {
      std::printf(
          "instances = %d\nmean_measured_ratio = %.4f\nanalytic_floor = %.4f\n"
          "ratio_above_one = %d\nwithin_bound = %d\nmean_savings = %.4f\n",
          s.n_instances, s.mean_measured_ratio, s.analytic_floor, s.ratio_above_one,
          s.within_bound, s.mean_savings);
    }
    return rc;
  }
  if (vis->parsed()) {
    if (vis_seed->count() == 0 && !env_seed(visit_seed)) {
      std::fprintf(stderr, "etmdp: ETMDP_SEED must be a non-negative integer\n");
      return kExitConfig;
    }
    visit.seed = visit_seed;
    visit.early_terminated = visit_mode == "et" ? 1 : 0;
    visit.out_dir = visit_out.empty() ? nullptr : visit_out.c_str();
    long total = 0;
    double outside = 0.0;
    const int rc = report(etmdp_run_visitation(&visit, &total, &outside));
    if (rc == kExitOk) std::printf("steps = %ld\noutside_fraction = %.6f\n", total, outside);
    return rc;
  }
  if (plot->parsed()) {
    const int rc = report(etmdp_run_plot(plot_dir.c_str()));
    if (rc == kExitOk) std::printf("wrote %s/curves.svg\n", plot_dir.c_str());
    return rc;
  }
  return kExitConfig;
}
