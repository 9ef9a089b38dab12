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

#ifndef ETMDP_TABULAR_HPP
#define ETMDP_TABULAR_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "etmdp/core.hpp"
#include "etmdp/early_termination.hpp"

namespace etmdp::tabular {

// Deterministic finite CMDP where cost is 1 exactly on transitions into the
// invalid set S_c, which must be absorbing.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  int start = 0;
  std::vector<int> next;        // [s * n_actions + a]
  std::vector<double> reward;   // [s * n_actions + a]
  std::vector<bool> invalid;    // [s]

  TabularMdp() = default;
  TabularMdp(int n_states, int n_actions, int horizon);

  int transition(int s, int a) const { return next[index(s, a)]; }
  double r(int s, int a) const { return reward[index(s, a)]; }
  int cost(int s, int a) const { return invalid[transition(s, a)] ? 1 : 0; }
  int n_invalid() const;
  double reward_min() const;
  double reward_max() const;
  CmdpSpec cmdp_spec(int budget) const;
  // Throws std::invalid_argument on out-of-range entries or a non-absorbing
  // invalid set.
  void validate() const;

  std::size_t index(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
           static_cast<std::size_t>(a);
  }
};

// V[t][s] for t = 0..H and the greedy action table [t][s] (t < H). Ties go
// to the lowest action index.
struct ValueTable {
  std::vector<std::vector<double>> value;
  std::vector<std::vector<int>> policy;
};

ValueTable value_iteration(const TabularMdp& mdp, int horizon);

struct ConstrainedSolution {
  // Best return among action sequences with cumulative cost <= budget. When
  // none exists, `feasible` is false and `value` is the best return collected
  // up to and including the first violating step.
  double value = 0.0;
  bool feasible = true;
  int budget = 0;
  // Greedy actions indexed [t][s][b], b in 0..budget+1 (budget+1 means over
  // budget). -1 where every action violates.
  std::vector<std::vector<std::vector<int>>> policy;
};

// Exact DP over (t, s, b) with b saturating at budget + 1.
ConstrainedSolution constrained_optimum(const TabularMdp& mdp, int budget,
                                        int horizon);

struct EtSolution {
  double value = 0.0;
  // Episodic cost and length of the greedy ET trajectory from the start.
  double episode_cost = 0.0;
  int episode_length = 0;
  bool violates = false;
  std::vector<std::vector<std::vector<int>>> policy;  // [t][s][b], b <= budget
};

// Optimum of the early-terminated MDP: a step whose cost pushes b above the
// budget pays r_e (per `rule`) and absorbs into s_e with zero reward.
EtSolution et_optimum(const TabularMdp& mdp, int budget, double reward_end,
                      int horizon,
                      TerminationReward rule = TerminationReward::Additive);

double safe_re_threshold(const TabularMdp& mdp, int horizon);

struct RegretPoint {
  int episode = 0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  int steps = 0;
};

struct RegretCurve {
  std::vector<RegretPoint> points;
  int horizon = 0;
  int effective_states = 0;

  double cumulative() const {
    return points.empty() ? 0.0 : points.back().cum_regret;
  }
  long total_steps() const;
};

enum class LearnerModel {
  // ET-MDP on (S \ S_c) + {s_e}: first cost terminates with r + r_e.
  EarlyTerminated,
  // CMDP solved as a plain MDP over S: every costly step pays r + r_e and
  // the episode always runs the full horizon.
  Penalized,
};

struct LearnerOptions {
  LearnerModel model = LearnerModel::EarlyTerminated;
  int episodes = 0;
  double reward_end = -1.0;
  // Start with every transition and reward known.
  bool preseed = false;
};

// Optimistic model-based learner for deterministic MDPs: unknown state-action
// pairs are valued at the reward upper bound for every remaining step; each
// episode executes the greedy DP policy of the optimistic model and reveals
// what it visits. Regret is measured against the constrained optimum with
// zero budget.
RegretCurve optimistic_learner(const TabularMdp& mdp,
                               const LearnerOptions& options);

int effective_states(const TabularMdp& mdp, LearnerModel model);
// 2 * H * |S_eff| * |A|.
double regret_bound(const TabularMdp& mdp, LearnerModel model);
// 1 - executed steps / (episodes * H).
double sample_savings(const RegretCurve& curve);
// |S| / (|S| - |S_c| + 1). Requires 0 <= n_invalid < n_states.
double corollary_ratio(int n_states, int n_invalid);

// Uniform-random actions on the early-terminated model; the curve's steps
// column records where each episode was cut off.
RegretCurve random_policy_run(const TabularMdp& mdp, int episodes,
                              double reward_end, std::uint64_t seed);

struct InstanceOptions {
  int n_states = 6;
  int n_actions = 3;
  int n_invalid = 2;
  int horizon = 5;
  // Rewards are drawn from {0, step, 2 step, ..., reward_max}.
  double reward_max = 1.0;
  int reward_levels = 8;
  // When set, action 0 from every valid state leads to a valid state, so the
  // start is always feasible.
  bool safe_action = true;
};

// Random deterministic instance. The start is state 0 and always valid;
// invalid states occupy the highest indices and are absorbing.
TabularMdp random_instance(std::mt19937_64& rng, const InstanceOptions& opts);

}  // namespace etmdp::tabular

#endif  // ETMDP_TABULAR_HPP
