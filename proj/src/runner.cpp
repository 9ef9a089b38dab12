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

#include "etmdp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "etmdp/error.hpp"
#include "etmdp/tabular.hpp"

namespace etmdp::cli {
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

fs::path seed_dir_name(const fs::path& root, std::uint64_t seed) {
  return root / ("seed_" + std::to_string(seed));
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

RunConfig read_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / "manifest.txt";
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return RunConfig::from_key_values(parse_key_values(in, path.string()));
}

}  // namespace

EvalStats evaluate(const agents::Agent& agent, const RunConfig& cfg, int episodes,
                   std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  std::unique_ptr<Environment> env = make_base_env(cfg);
  const auto* maze = dynamic_cast<const envs::MazeEnv*>(env.get());
  agents::AgentPolicy policy(agent);
  EvalStats stats;
  stats.episodes = episodes;
  int successes = 0;
  for (int k = 0; k < episodes; ++k) {
    Trajectory traj = rollout(policy, *env, env->spec().horizon, mix_seed(seed, k));
    const EpisodeStats es = episodic_stats(traj);
    stats.mean_return += es.episodic_return;
    stats.mean_cost += es.episodic_cost;
    if (maze != nullptr && es.episodic_cost == 0.0) {
      bool reached = false;
      for (std::size_t i = 0; i < traj.steps.size() && !reached; ++i) {
        const Vec& next = i + 1 < traj.steps.size() ? traj.steps[i + 1].state : traj.final_state;
        reached = maze->in_goal({next[0], next[1]});
      }
      if (reached) ++successes;
    }
  }
  stats.mean_return /= episodes;
  stats.mean_cost /= episodes;
  stats.success_rate = static_cast<double>(successes) / episodes;
  return stats;
}

SeedResult train_seed(const RunConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  cfg.validate();
  std::unique_ptr<Environment> env = make_env(cfg);
  auto* et = dynamic_cast<EtEnv*>(env.get());
  const CmdpSpec& spec = env->spec();
  const bool lagrangian = cfg.agent_kind == agents::AgentKind::LagrangianTd3;
  agents::Agent agent(cfg.agent_kind, env->observation_dim(), spec.action_dim, cfg.agent,
                      mix_seed(seed, 1));
  std::mt19937_64 warmup_rng(mix_seed(seed, 2));
  std::uniform_real_distribution<double> warmup(-1.0, 1.0);
  std::normal_distribution<double> jitter(0.0, std::max(cfg.agent.expl_noise, 1e-12));
  const bool persistent = cfg.warmup == "persistent";
  Vec held(static_cast<std::size_t>(spec.action_dim));
  for (double& a : held) a = warmup(warmup_rng);

  std::ofstream log;
  if (!seed_dir.empty()) {
    make_dirs(seed_dir);
    log = open_out(seed_dir / "train_log.csv");
    log << "step,critic1_loss,critic2_loss,actor_loss,lambda\n";
  }

  SeedResult result;
  result.seed = seed;
  result.curve.seed = seed;
  std::uint64_t episode = 0;
  Vec obs = env->reset(mix_seed(seed, 100 + episode));
  double ep_cost = 0.0;
  agents::TrainReport last;
  double last_actor = std::nan("");
  long updates = 0;
  for (long step = 1; step <= cfg.total_steps; ++step) {
    Vec action;
    if (step <= cfg.start_steps && persistent) {
      action = held;
      for (double& a : action) a = std::clamp(a + jitter(warmup_rng), -1.0, 1.0);
    } else if (step <= cfg.start_steps) {
      action.resize(static_cast<std::size_t>(spec.action_dim));
      for (double& a : action) a = warmup(warmup_rng);
    } else {
      action = agent.select_action(obs, true);
    }
    StepResult res = env->step(action);
    double reward = res.reward;
    double cost = res.cost;
    Vec next = res.next_state;
    bool terminal = false;
    if (et != nullptr && res.violated) {
      reward = et->last_base_step().reward;
      next = et->pre_absorption_observation();
      terminal = true;
    }
    ep_cost += res.cost;
    if (!lagrangian) cost = (et != nullptr && res.violated) ? res.cost : 0.0;
    agent.observe(obs, action, reward, cost, next, terminal, res.done && !terminal);
    if (res.done) {
      agent.end_episode(ep_cost);
      ep_cost = 0.0;
      obs = env->reset(mix_seed(seed, 100 + ++episode));
      for (double& a : held) a = warmup(warmup_rng);
    } else {
      obs = std::move(res.next_state);
    }

    if (step > cfg.start_steps) {
      last = agent.train_step();
      if (last.actor_loss) last_actor = *last.actor_loss;
      ++updates;
    }
    if (log.is_open() && step % cfg.log_interval == 0 && updates > 0) {
      log << step << ',' << fmt(last.critic1_loss) << ',' << fmt(last.critic2_loss) << ','
          << fmt(last_actor) << ',' << fmt(agent.lambda()) << '\n';
    }
    if (step % cfg.eval_interval == 0) {
      const EvalStats ev = evaluate(agent, cfg, cfg.eval_episodes, mix_seed(seed, 1000 + step));
      result.curve.points.push_back({step, ev.mean_return, ev.mean_cost});
    }
  }
  result.final_eval = evaluate(agent, cfg, cfg.eval_episodes, mix_seed(seed, 7));
  result.skipped_updates = agent.skipped_updates();

  if (!seed_dir.empty()) {
    std::ofstream curves = open_out(seed_dir / "curves.csv");
    analysis::write_curves_csv(curves, {result.curve});
    agent.save(seed_dir / "checkpoint");
  }
  return result;
}

std::vector<SeedResult> cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const fs::path root = cfg.output_dir;
  make_dirs(root);
  {
    KeyValues kv = cfg.to_key_values();
    kv["code.version"] = kCodeVersion;
    std::ofstream manifest = open_out(root / "manifest.txt");
    manifest << format_key_values(kv);
  }
  std::vector<SeedResult> results(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        results[i] = train_seed(cfg, cfg.seeds[i], seed_dir_name(root, cfg.seeds[i]));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), cfg.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ofstream summary = open_out(root / "summary.csv");
  summary << "seed,final_return,final_cost,success_rate,skipped_updates\n";
  for (const SeedResult& r : results) {
    summary << r.seed << ',' << fmt(r.final_eval.mean_return) << ','
            << fmt(r.final_eval.mean_cost) << ',' << fmt(r.final_eval.success_rate) << ','
            << r.skipped_updates << '\n';
  }
  return results;
}

std::vector<EvalStats> cmd_eval(const fs::path& run_dir, int episodes) {
  const RunConfig cfg = read_manifest(run_dir);
  std::unique_ptr<Environment> env = make_env(cfg);
  std::vector<EvalStats> out;
  for (std::uint64_t seed : cfg.seeds) {
    agents::Agent agent(cfg.agent_kind, env->observation_dim(), env->spec().action_dim,
                        cfg.agent, mix_seed(seed, 1));
    agent.load(seed_dir_name(run_dir, seed) / "checkpoint");
    out.push_back(evaluate(agent, cfg, episodes, mix_seed(seed, 7)));
  }
  return out;
}

namespace {

void write_regret_curve(const fs::path& path, const tabular::RegretCurve& curve) {
  std::ofstream out = open_out(path);
  out << "episode,inst_regret,cum_regret,steps\n";
  for (const tabular::RegretPoint& p : curve.points) {
    out << p.episode << ',' << fmt(p.inst_regret) << ',' << fmt(p.cum_regret) << ',' << p.steps
        << '\n';
  }
}

bool same_regret(const tabular::RegretCurve& a, const tabular::RegretCurve& b) {
  if (a.points.size() != b.points.size()) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].inst_regret != b.points[i].inst_regret ||
        a.points[i].steps != b.points[i].steps) {
      return false;
    }
  }
  return true;
}

}  // namespace

RegretBenchSummary cmd_regret_bench(const RegretBenchOptions& opts) {
  if (opts.n_instances < 1) throw ConfigError("regret-bench: instances must be >= 1");
  if (opts.sizes.empty()) throw ConfigError("regret-bench: at least one size is required");
  if (!(opts.invalid_fraction >= 0.0 && opts.invalid_fraction < 1.0)) {
    throw ConfigError("regret-bench: invalid fraction must lie in [0, 1)");
  }
  if (opts.n_actions < 1 || opts.horizon < 1) {
    throw ConfigError("regret-bench: actions and horizon must be >= 1");
  }
  if (!opts.out_dir.empty()) make_dirs(opts.out_dir / "curves");

  std::mt19937_64 rng(opts.seed);
  RegretBenchSummary summary;
  int finite_ratios = 0;
  int instance = 0;
  for (int size : opts.sizes) {
    if (size < 2) throw ConfigError("regret-bench: sizes must be >= 2");
    tabular::InstanceOptions io;
    io.n_states = size;
    io.n_actions = opts.n_actions;
    io.n_invalid = std::min(static_cast<int>(std::lround(opts.invalid_fraction * size)), size - 1);
    io.horizon = opts.horizon;
    io.reward_max = 1.0 / opts.horizon;
    if (summary.rows.empty()) summary.analytic_floor = tabular::corollary_ratio(size, io.n_invalid);
    for (int k = 0; k < opts.n_instances; ++k, ++instance) {
      const tabular::TabularMdp mdp = tabular::random_instance(rng, io);
      tabular::LearnerOptions lo;
      lo.episodes = opts.episodes > 0 ? opts.episodes : size * opts.n_actions + 10;
      lo.reward_end = opts.reward_end;
      lo.model = tabular::LearnerModel::EarlyTerminated;
      const tabular::RegretCurve et = tabular::optimistic_learner(mdp, lo);
      lo.model = tabular::LearnerModel::Penalized;
      const tabular::RegretCurve cmdp = tabular::optimistic_learner(mdp, lo);

      RegretBenchRow row;
      row.instance = instance;
      row.n_states = size;
      row.n_invalid = io.n_invalid;
      row.et_regret = et.cumulative();
      row.cmdp_regret = cmdp.cumulative();
      if (row.et_regret > 0.0) {
        row.measured_ratio = row.cmdp_regret / row.et_regret;
      } else {
        row.measured_ratio = row.cmdp_regret > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
      }
      row.analytic_ratio = tabular::corollary_ratio(size, io.n_invalid);
      row.et_bound = tabular::regret_bound(mdp, tabular::LearnerModel::EarlyTerminated);
      row.cmdp_bound = tabular::regret_bound(mdp, tabular::LearnerModel::Penalized);
      row.savings = tabular::sample_savings(et);
      row.curves_identical = same_regret(et, cmdp);
      summary.rows.push_back(row);

      if (std::isfinite(row.measured_ratio)) {
        summary.mean_measured_ratio += row.measured_ratio;
        ++finite_ratios;
      }
      if (row.measured_ratio > 1.0) ++summary.ratio_above_one;
      if (row.within_bound()) ++summary.within_bound;
      summary.mean_savings += row.savings;
      if (!opts.out_dir.empty()) {
        const fs::path base = opts.out_dir / "curves" / ("instance_" + std::to_string(instance));
        write_regret_curve(base.string() + "_et.csv", et);
        write_regret_curve(base.string() + "_cmdp.csv", cmdp);
      }
    }
  }
  if (finite_ratios > 0) summary.mean_measured_ratio /= finite_ratios;
  summary.mean_savings /= static_cast<double>(summary.rows.size());

  if (!opts.out_dir.empty()) {
    std::ofstream report = open_out(opts.out_dir / "report.csv");
    report << "instance,n_states,n_invalid,et_regret,cmdp_regret,measured_ratio,analytic_ratio,"
              "et_bound,cmdp_bound,savings,within_bound,curves_identical\n";
    for (const RegretBenchRow& r : summary.rows) {
      report << r.instance << ',' << r.n_states << ',' << r.n_invalid << ',' << fmt(r.et_regret)
             << ',' << fmt(r.cmdp_regret) << ',' << fmt(r.measured_ratio) << ','
             << fmt(r.analytic_ratio) << ',' << fmt(r.et_bound) << ',' << fmt(r.cmdp_bound)
             << ',' << fmt(r.savings) << ',' << (r.within_bound() ? 1 : 0) << ','
             << (r.curves_identical ? 1 : 0) << '\n';
    }
    std::ofstream s = open_out(opts.out_dir / "summary.txt");
    s << "instances = " << summary.rows.size() << '\n'
      << "mean_measured_ratio = " << fmt(summary.mean_measured_ratio) << '\n'
      << "analytic_floor = " << fmt(summary.analytic_floor) << '\n'
      << "ratio_above_one = " << summary.ratio_above_one << '\n'
      << "within_bound = " << summary.within_bound << '\n'
      << "mean_savings = " << fmt(summary.mean_savings) << '\n';
  }
  return summary;
}

VisitationSummary cmd_visitation(const VisitationOptions& opts) {
  if (opts.steps < 1) throw ConfigError("visitation: steps must be >= 1");
  if (opts.resolution < 1) throw ConfigError("visitation: resolution must be >= 1");
  if (opts.level < 1 || opts.level > 4) throw ConfigError("visitation: level must be 1..4");
  const envs::MazeSpec maze = envs::maze_level(opts.level);
  VisitationSummary out{
      analysis::random_visitation(maze, opts.early_terminated, opts.steps, opts.seed,
                                  opts.resolution),
      -1.0};
  if (maze.enclosure) out.outside_fraction = analysis::mass_outside(out.histogram, *maze.enclosure);
  if (!opts.out_dir.empty()) {
    make_dirs(opts.out_dir);
    std::ofstream csv = open_out(opts.out_dir / "histogram.csv");
    out.histogram.write_csv(csv);
    const std::string title = "Level " + std::to_string(opts.level) + ", random agent, " +
                              (opts.early_terminated ? "early termination" : "unwrapped");
    std::ofstream svg = open_out(opts.out_dir / "heatmap.svg");
    svg << analysis::render_heatmap_svg(out.histogram, maze.lava, title);
    std::ofstream s = open_out(opts.out_dir / "summary.txt");
    s << "level = " << opts.level << '\n'
      << "early_terminated = " << (opts.early_terminated ? "true" : "false") << '\n'
      << "steps = " << out.histogram.total() << '\n'
      << "outside_fraction = " << fmt(out.outside_fraction) << '\n';
  }
  return out;
}

fs::path cmd_plot(const fs::path& run_dir) {
  const RunConfig cfg = read_manifest(run_dir);
  std::vector<analysis::CurveRun> runs;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path path = seed_dir_name(run_dir, seed) / "curves.csv";
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    for (analysis::CurveRun& r : analysis::read_curves_csv(in)) runs.push_back(std::move(r));
  }
  const analysis::CurveBundle bundle = analysis::aggregate_curves(runs);
  const std::string title = std::string(agents::to_string(cfg.agent_kind)) + " on " + cfg.env_id +
                            (cfg.env_id == "maze" ? " level " + std::to_string(cfg.level) : "");
  const fs::path svg_path = run_dir / "curves.svg";
  std::ofstream svg = open_out(svg_path);
  svg << analysis::render_curves_svg(bundle, title);
  std::ofstream csv = open_out(run_dir / "curves_summary.csv");
  csv << "step,return_median,return_q25,return_q75,cost_median,cost_q25,cost_q75\n";
  for (std::size_t i = 0; i < bundle.steps.size(); ++i) {
    csv << bundle.steps[i] << ',' << fmt(bundle.return_median[i]) << ','
        << fmt(bundle.return_q25[i]) << ',' << fmt(bundle.return_q75[i]) << ','
        << fmt(bundle.cost_median[i]) << ',' << fmt(bundle.cost_q25[i]) << ','
        << fmt(bundle.cost_q75[i]) << '\n';
  }
  return svg_path;
}

}  // namespace etmdp::cli
