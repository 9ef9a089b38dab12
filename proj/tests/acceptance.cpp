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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "etmdp/agents.hpp"
#include "etmdp/analysis.hpp"
#include "etmdp/early_termination.hpp"
#include "etmdp/envs.hpp"
#include "etmdp/nn.hpp"
#include "etmdp/runner.hpp"
#include "etmdp/tabular.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace etmdp;
using namespace etmdp::tabular;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome equivalence_at_safe_threshold() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> ns(2, 12), na(1, 4), nh(1, 8), nb(0, 3);
  const int n = 200;
  int agree = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    InstanceOptions opts;
    opts.n_states = ns(rng);
    opts.n_actions = na(rng);
    opts.horizon = nh(rng);
    opts.n_invalid = std::uniform_int_distribution<int>(0, opts.n_states - 1)(rng);
    opts.reward_max = 1.0;
    const TabularMdp mdp = random_instance(rng, opts);
    const int budget = nb(rng);
    const auto et = et_optimum(mdp, budget, safe_re_threshold(mdp, mdp.horizon), mdp.horizon);
    const auto c = constrained_optimum(mdp, budget, mdp.horizon);
    const double gap = std::abs(et.value - c.value);
    worst = std::max(worst, gap);
    agree += (gap <= 1e-9 && c.feasible) ? 1 : 0;
  }
  const double dt = seconds_since(t0);
  return {agree == n && dt < 10.0,
          format("%d/%d instances equal, max gap %.1e, %.2fs (limit 10s)", agree, n, worst, dt)};
}

Outcome brute_force_agreement() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> ns(2, 5), na(1, 3), nh(1, 5), nb(0, 3);
  const int n = 200;
  int agree = 0, infeasible = 0;
  for (int i = 0; i < n; ++i) {
    InstanceOptions opts;
    opts.n_states = ns(rng);
    opts.n_actions = na(rng);
    opts.horizon = nh(rng);
    opts.n_invalid = std::uniform_int_distribution<int>(0, opts.n_states - 1)(rng);
    opts.safe_action = i % 4 != 0;
    const TabularMdp mdp = random_instance(rng, opts);
    const int budget = nb(rng);
    const auto sol = constrained_optimum(mdp, budget, mdp.horizon);
    const auto brute = oracle::brute_force_constrained(mdp, budget, mdp.horizon);
    infeasible += brute.feasible ? 0 : 1;
    agree += (sol.feasible == brute.feasible && std::abs(sol.value - brute.value) <= 1e-9) ? 1 : 0;
  }
  const double dt = seconds_since(t0);
  return {agree == n && dt < 60.0,
          format("%d/%d instances match enumeration (%d infeasible), %.2fs (limit 60s)", agree, n,
                 infeasible, dt)};
}

Outcome regret_bound_shape() {
  const auto t0 = Clock::now();
  cli::RegretBenchOptions opts;
  opts.n_instances = 50;
  opts.sizes = {20};
  opts.invalid_fraction = 0.5;
  opts.seed = 303;
  const auto s = cli::cmd_regret_bench(opts);
  int positive_savings = 0;
  for (const auto& row : s.rows) positive_savings += row.savings > 0.0 ? 1 : 0;
  const int n = static_cast<int>(s.rows.size());
  return {n == 50 && s.within_bound == n && s.ratio_above_one >= 45 && positive_savings == n,
          format("within bound %d/%d, ratio > 1 in %d/%d (need 45), mean ratio %.2f vs analytic "
                 "%.3f, savings > 0 in %d/%d, %.2fs",
                 s.within_bound, n, s.ratio_above_one, n, s.mean_measured_ratio,
                 s.analytic_floor, positive_savings, n, seconds_since(t0))};
}

double probe(const nn::Matrix& g, const nn::Matrix& out) {
  return (g.array() * out.array()).sum();
}

nn::Matrix random_matrix(std::mt19937_64& rng, nn::Index rows, nn::Index cols, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  nn::Matrix m(rows, cols);
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> dim(1, 6);
  int checks = 0, passed = 0;
  double worst = 0.0;
  auto check = [&](const nn::Matrix& analytic, const nn::Matrix& numeric) {
    const double e = nn::relative_error(analytic, numeric);
    worst = std::max(worst, e);
    ++checks;
    passed += e < 1e-4 ? 1 : 0;
  };
  const int configs = 20;
  for (int trial = 0; trial < configs; ++trial) {
    for (nn::Activation act : {nn::Activation::Identity, nn::Activation::Tanh,
                               nn::Activation::Relu, nn::Activation::Sigmoid}) {
      const nn::Index rows = dim(rng), cols = dim(rng);
      nn::Matrix x = random_matrix(rng, rows, cols, 1.0);
      const nn::Matrix g = random_matrix(rng, x.rows(), x.cols(), 1.0);
      check(nn::activate_backward(act, nn::activate(act, x), g),
            nn::numerical_gradient([&] { return probe(g, nn::activate(act, x)); }, x));
    }

    const nn::Index d_in = dim(rng), d_out = dim(rng);
    nn::Dense layer("d", d_in, d_out, rng);
    nn::Matrix x = random_matrix(rng, layer.weight().value.cols(), dim(rng), 1.0);
    const nn::Matrix g = random_matrix(rng, layer.weight().value.rows(), x.cols(), 1.0);
    nn::zero_grads(layer.params());
    const nn::Matrix dx = layer.backward(x, g);
    auto dense_loss = [&] { return probe(g, layer.forward(x)); };
    check(dx, nn::numerical_gradient(dense_loss, x));
    for (nn::Param* p : layer.params()) check(p->grad, nn::numerical_gradient(dense_loss, p->value));

    const nn::Index g_in = dim(rng), g_hidden = dim(rng);
    nn::Gru gru("g", g_in, g_hidden, rng);
    for (nn::Param* p : gru.params()) {
      p->value = random_matrix(rng, p->value.rows(), p->value.cols(), 0.7);
    }
    const nn::Index in = gru.input_dim();
    const nn::Index hidden = gru.hidden_dim();
    const nn::Index batch = dim(rng);
    std::vector<nn::Matrix> xs;
    for (int t = 1 + trial % 4; t > 0; --t) xs.push_back(random_matrix(rng, in, batch, 1.0));
    nn::Matrix h0 = random_matrix(rng, hidden, batch, 0.5);
    const nn::Matrix gh = random_matrix(rng, hidden, batch, 1.0);
    nn::Gru::Cache cache;
    gru.forward(xs, h0, cache);
    nn::zero_grads(gru.params());
    const nn::Gru::InputGrads grads = gru.backward(cache, gh);
    auto gru_loss = [&] { return probe(gh, gru.forward(xs, h0)); };
    for (nn::Param* p : gru.params()) check(p->grad, nn::numerical_gradient(gru_loss, p->value));
    for (std::size_t t = 0; t < xs.size(); ++t) {
      check(grads.dx[t], nn::numerical_gradient(gru_loss, xs[t]));
    }
    check(grads.dh0, nn::numerical_gradient(gru_loss, h0));

    // Actor loss through Q(s, pi(s, ctx)) into the actor's context encoder.
    agents::AgentConfig cfg;
    cfg.hidden_layers = 1 + trial % 2;
    cfg.hidden_units = 4 + trial % 5;
    cfg.context_hidden = 2 + trial % 4;
    cfg.context_len = 1 + trial % 3;
    cfg.buffer_capacity = 100;
    const int od = 1 + trial % 3, ad = 1 + trial % 2;
    agents::Agent agent(agents::AgentKind::ContextTd3, od, ad, cfg, 500 + trial);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int step = 0; step < 12; ++step) {
      Vec s(od), a(ad), s2(od);
      for (double& v : s) v = u(rng);
      for (double& v : a) v = u(rng);
      for (double& v : s2) v = u(rng);
      agent.observe(s, a, u(rng), 0.0, s2, false, step % 6 == 5);
    }
    std::vector<const agents::ReplayRecord*> recs;
    for (std::size_t i = 0; i < agent.replay().size(); i += 2) recs.push_back(&agent.replay()[i]);
    const agents::Batch b = agent.make_batch(recs);
    nn::zero_grads(agent.all_params());
    agent.actor_loss(b, true);
    nn::ParamList chain = agent.actor_params();
    for (nn::Param* p : agent.actor_context_params()) chain.push_back(p);
    for (nn::Param* p : chain) {
      check(p->grad, nn::numerical_gradient([&] { return agent.actor_loss(b, false); }, p->value));
    }
    const nn::Matrix y = agent.td_targets(b, false);
    nn::zero_grads(agent.all_params());
    agent.critic_loss(b, y, true);
    nn::ParamList critic = agent.critic_params(1);
    for (nn::Param* p : agent.critic_context_params()) critic.push_back(p);
    auto critic_total = [&] {
      const agents::CriticLoss l = agent.critic_loss(b, y, false);
      return l.critic1 + l.critic2;
    };
    for (nn::Param* p : critic) check(p->grad, nn::numerical_gradient(critic_total, p->value));
  }
  const double dt = seconds_since(t0);
  return {passed == checks && dt < 30.0,
          format("%d/%d checks under 1e-4 over %d configurations, worst %.1e, %.2fs (limit 30s)",
                 passed, checks, configs, worst, dt)};
}

Outcome limited_visitation() {
  const auto t0 = Clock::now();
  const envs::MazeSpec maze = envs::maze_level(4);
  if (!maze.enclosure) return {false, "level 4 has no enclosing ring"};
  const auto et = analysis::random_visitation(maze, true, 50'000, 505);
  const auto raw = analysis::random_visitation(maze, false, 50'000, 505);
  const double et_out = analysis::mass_outside(et, *maze.enclosure);
  const double raw_out = analysis::mass_outside(raw, *maze.enclosure);
  const double dt = seconds_since(t0);
  return {et_out == 0.0 && raw_out > 0.05 && dt < 60.0,
          format("outside mass %.4f terminated vs %.4f unwrapped (need 0 and > 0.05), %.2fs", et_out,
                 raw_out, dt)};
}

struct SeedRun {
  std::uint64_t seed = 0;
  double final_return = 0.0;
  double success = 0.0;
};

std::vector<SeedRun> train_seeds(const cli::RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  std::vector<SeedRun> out(seeds.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next == seeds.size()) return;
        i = next++;
      }
      const cli::SeedResult r = cli::train_seed(cfg, seeds[i], "");
      out[i] = {seeds[i], r.final_eval.mean_return, r.final_eval.success_rate};
      std::lock_guard<std::mutex> lock(mu);
      std::printf("  %s seed %llu: final return %.1f, success %.2f\n",
                  std::string(agents::to_string(cfg.agent_kind)).c_str(),
                  static_cast<unsigned long long>(seeds[i]), r.final_eval.mean_return,
                  r.final_eval.success_rate);
      std::fflush(stdout);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                     static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

double median_return(const std::vector<SeedRun>& runs, std::size_t first_n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < std::min(first_n, runs.size()); ++i) v.push_back(runs[i].final_return);
  return analysis::quantile(v, 0.5);
}

Outcome maze_learning() {
  const auto t0 = Clock::now();
  cli::KeyValues kv{{"env.id", "maze"},
                    {"env.level", "1"},
                    {"env.init", "fixed"},
                    {"et.mode", "binary"},
                    {"et.reward_end", "-10"},
                    {"agent.hidden_layers", "2"},
                    {"agent.hidden_units", "64"},
                    {"agent.batch_size", "64"},
                    {"train.total_steps", "100000"},
                    {"train.eval_interval", "10000"},
                    {"train.eval_episodes", "1"}};
  kv["agent.kind"] = "context-td3";
  const cli::RunConfig ctx_cfg = cli::RunConfig::from_key_values(kv);
  kv["agent.kind"] = "td3";
  const cli::RunConfig td3_cfg = cli::RunConfig::from_key_values(kv);

  const auto ctx = train_seeds(ctx_cfg, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto td3 = train_seeds(td3_cfg, {0, 1, 2, 3, 4});
  int successes = 0;
  for (const auto& r : ctx) successes += r.success >= 1.0 ? 1 : 0;
  const double ctx_median = median_return(ctx, 5);
  const double td3_median = median_return(td3, 5);
  const double dt = seconds_since(t0);
  return {successes >= 7 && ctx_median >= td3_median && dt < 7200.0,
          format("context-td3 success %d/10 (need 7), median return over seeds 0-4 %.1f vs td3 "
                 "%.1f, %.0fs (limit 7200s)",
                 successes, ctx_median, td3_median, dt)};
}

Outcome counterexample() {
  const auto t0 = Clock::now();
  const envs::MazeSpec spec = envs::counterexample_maze(1.0);
  auto tightened = wrap(envs::counterexample_env(1.0), EtMode::Tightened, -10.0);
  auto extended = wrap(envs::counterexample_env(1.0), EtMode::BudgetExtended, -10.0);
  const auto t = oracle::search_goal(*tightened, spec.goal_center, spec.goal_radius);
  const auto e = oracle::search_goal(*extended, spec.goal_center, spec.goal_radius);
  const double dt = seconds_since(t0);
  return {!t.goal_reached && e.goal_reached && e.min_cost <= 1.0 && dt < 60.0,
          format("tightened goal reachable: %s (%ld states), budget-extended C=1: %s with cost %.0f "
                 "(%ld states), %.2fs (limit 60s)",
                 t.goal_reached ? "yes" : "no", t.states_expanded,
                 e.goal_reached ? "yes" : "no", e.min_cost, e.states_expanded,
                 dt)};
}

Outcome termination_reward_conservatism() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(808);
  const int n = 50;
  int monotone = 0, strictly_safer = 0;
  for (int i = 0; i < n; ++i) {
    InstanceOptions opts;
    opts.n_states = 10;
    opts.n_actions = 3;
    opts.n_invalid = 4;
    opts.horizon = 8;
    opts.reward_max = 20.0;
    const TabularMdp mdp = random_instance(rng, opts);
    std::vector<double> costs;
    for (double re : {-1.0, -10.0, safe_re_threshold(mdp, mdp.horizon)}) {
      costs.push_back(et_optimum(mdp, 0, re, mdp.horizon).episode_cost);
    }
    monotone += (costs[1] <= costs[0] && costs[2] <= costs[1]) ? 1 : 0;
    strictly_safer += costs[2] < costs[0] ? 1 : 0;
  }
  return {monotone == n,
          format("cost non-increasing in %d/%d instances (strictly lower at the safe threshold in "
                 "%d), %.2fs",
                 monotone, n, strictly_safer, seconds_since(t0))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "etmdp_acceptance_determinism";
  fs::remove_all(root);
  int identical = 0, total = 0;
  for (const char* kind : {"context-td3", "td3", "lagrangian-td3"}) {
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::string(kind) + "_" + std::to_string(rep));
      cli::KeyValues kv{{"agent.kind", kind},          {"agent.hidden_units", "16"},
                        {"agent.hidden_layers", "2"},  {"agent.batch_size", "16"},
                        {"train.total_steps", "1500"}, {"train.start_steps", "500"},
                        {"train.eval_interval", "500"}, {"train.eval_episodes", "2"},
                        {"train.seeds", "3,4"},         {"train.workers", "2"},
                        {"output.dir", dir.string()}};
      cli::cmd_train(cli::RunConfig::from_key_values(kv));
      files[rep] = slurp(dir / "seed_3" / "curves.csv") + slurp(dir / "seed_4" / "curves.csv");
    }
    ++total;
    identical += (!files[0].empty() && files[0] == files[1]) ? 1 : 0;
  }
  fs::remove_all(root);
  return {identical == total,
          format("%d/%d agent kinds reproduce byte-identical curve CSVs, %.2fs", identical, total,
                 seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"safe termination reward reproduces the constrained optimum", equivalence_at_safe_threshold},
      {"constrained optimum matches exhaustive enumeration", brute_force_agreement},
      {"optimistic learner regret bound and ET advantage", regret_bound_shape},
      {"finite-difference gradient checks", gradient_checks},
      {"limited state visitation on level 4", limited_visitation},
      {"maze learning, context-td3 vs td3", maze_learning},
      {"counterexample: tightened unsolvable, budget-extended solvable", counterexample},
      {"smaller termination reward is more conservative", termination_reward_conservatism},
      {"determinism of training curves", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && selected.count(id) == 0) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d %s: %s -- %s\n", id, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
