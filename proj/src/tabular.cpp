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

#include "etmdp/tabular.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace etmdp::tabular {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class T>
std::vector<std::vector<std::vector<T>>> cube(int a, int b, int c, T fill) {
  return std::vector<std::vector<std::vector<T>>>(
      static_cast<std::size_t>(a),
      std::vector<std::vector<T>>(static_cast<std::size_t>(b),
                                  std::vector<T>(static_cast<std::size_t>(c), fill)));
}

void check_horizon(int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
}

}  // namespace

TabularMdp::TabularMdp(int n_states_, int n_actions_, int horizon_)
    : n_states(n_states_), n_actions(n_actions_), horizon(horizon_) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("TabularMdp: need at least one state and one action");
  }
  const auto n = static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
  next.assign(n, 0);
  reward.assign(n, 0.0);
  invalid.assign(static_cast<std::size_t>(n_states), false);
}

int TabularMdp::n_invalid() const {
  return static_cast<int>(std::count(invalid.begin(), invalid.end(), true));
}

double TabularMdp::reward_min() const {
  return reward.empty() ? 0.0 : *std::min_element(reward.begin(), reward.end());
}

double TabularMdp::reward_max() const {
  return reward.empty() ? 0.0 : *std::max_element(reward.begin(), reward.end());
}

CmdpSpec TabularMdp::cmdp_spec(int budget) const {
  CmdpSpec spec;
  spec.state_dim = 1;
  spec.action_dim = 1;
  spec.horizon = horizon;
  spec.budget = budget;
  spec.reward_min = reward_min();
  spec.reward_max = reward_max();
  spec.deterministic = true;
  return spec;
}

void TabularMdp::validate() const {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("TabularMdp: empty spaces");
  const auto n = static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
  if (next.size() != n || reward.size() != n ||
      invalid.size() != static_cast<std::size_t>(n_states)) {
    throw std::invalid_argument("TabularMdp: table sizes do not match the spaces");
  }
  if (start < 0 || start >= n_states) throw std::invalid_argument("TabularMdp: start out of range");
  if (horizon < 0) throw std::invalid_argument("TabularMdp: negative horizon");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const int sp = transition(s, a);
      if (sp < 0 || sp >= n_states) {
        throw std::invalid_argument("TabularMdp: transition out of range at (" +
                                    std::to_string(s) + ", " + std::to_string(a) + ")");
      }
      if (invalid[s] && !invalid[sp]) {
        throw std::invalid_argument("TabularMdp: invalid set is not absorbing at state " +
                                    std::to_string(s));
      }
    }
  }
}

ValueTable value_iteration(const TabularMdp& mdp, int horizon) {
  check_horizon(horizon);
  ValueTable out;
  out.value.assign(static_cast<std::size_t>(horizon) + 1,
                   std::vector<double>(static_cast<std::size_t>(mdp.n_states), 0.0));
  out.policy.assign(static_cast<std::size_t>(horizon),
                    std::vector<int>(static_cast<std::size_t>(mdp.n_states), 0));
  for (int t = horizon - 1; t >= 0; --t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = kNegInf;
      int best_a = 0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double q = mdp.r(s, a) + out.value[t + 1][mdp.transition(s, a)];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      out.value[t][s] = best;
      out.policy[t][s] = best_a;
    }
  }
  return out;
}

ConstrainedSolution constrained_optimum(const TabularMdp& mdp, int budget, int horizon) {
  check_horizon(horizon);
  if (budget < 0) throw std::invalid_argument("constrained_optimum: negative budget");
  const int nb = budget + 2;  // b = budget + 1 is "over budget"
  auto value = cube<double>(horizon + 1, mdp.n_states, nb, kNegInf);
  // Best return up to and including the first violation.
  auto forced = cube<double>(horizon + 1, mdp.n_states, nb, kNegInf);
  ConstrainedSolution out;
  out.budget = budget;
  out.policy = cube<int>(horizon, mdp.n_states, nb, -1);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int b = 0; b <= budget; ++b) value[horizon][s][b] = 0.0;
  }
  for (int t = horizon - 1; t >= 0; --t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int b = 0; b <= budget; ++b) {
        double best = kNegInf;
        double best_forced = kNegInf;
        int best_a = -1;
        for (int a = 0; a < mdp.n_actions; ++a) {
          const int nb_next = std::min(b + mdp.cost(s, a), budget + 1);
          const int sp = mdp.transition(s, a);
          if (nb_next <= budget) {
            const double q = mdp.r(s, a) + value[t + 1][sp][nb_next];
            if (q > best) {
              best = q;
              best_a = a;
            }
            best_forced = std::max(best_forced, mdp.r(s, a) + forced[t + 1][sp][nb_next]);
          } else {
            best_forced = std::max(best_forced, mdp.r(s, a));
          }
        }
        value[t][s][b] = best;
        forced[t][s][b] = best_forced;
        out.policy[t][s][b] = best_a;
      }
    }
  }
  const double v = value[0][mdp.start][0];
  out.feasible = v > kNegInf;
  out.value = out.feasible ? v : forced[0][mdp.start][0];
  return out;
}

EtSolution et_optimum(const TabularMdp& mdp, int budget, double reward_end, int horizon,
                      TerminationReward rule) {
  check_horizon(horizon);
  if (budget < 0) throw std::invalid_argument("et_optimum: negative budget");
  const int nb = budget + 1;
  auto value = cube<double>(horizon + 1, mdp.n_states, nb, 0.0);
  EtSolution out;
  out.policy = cube<int>(horizon, mdp.n_states, nb, 0);
  auto violation_reward = [&](int s, int a) {
    return rule == TerminationReward::Additive ? mdp.r(s, a) + reward_end : reward_end;
  };
  for (int t = horizon - 1; t >= 0; --t) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int b = 0; b < nb; ++b) {
        double best = kNegInf;
        int best_a = 0;
        for (int a = 0; a < mdp.n_actions; ++a) {
          const int b_next = b + mdp.cost(s, a);
          const double q = b_next > budget
                               ? violation_reward(s, a)
                               : mdp.r(s, a) + value[t + 1][mdp.transition(s, a)][b_next];
          if (q > best) {
            best = q;
            best_a = a;
          }
        }
        value[t][s][b] = best;
        out.policy[t][s][b] = best_a;
      }
    }
  }
  out.value = value[0][mdp.start][0];

  int s = mdp.start;
  int b = 0;
  for (int t = 0; t < horizon; ++t) {
    const int a = out.policy[t][s][b];
    const int c = mdp.cost(s, a);
    out.episode_cost += c;
    out.episode_length = t + 1;
    if (b + c > budget) {
      out.violates = true;
      break;
    }
    b += c;
    s = mdp.transition(s, a);
  }
  return out;
}

double safe_re_threshold(const TabularMdp& mdp, int horizon) {
  CmdpSpec spec = mdp.cmdp_spec(0);
  spec.horizon = horizon;
  return etmdp::safe_re_threshold(spec);
}

long RegretCurve::total_steps() const {
  long n = 0;
  for (const RegretPoint& p : points) n += p.steps;
  return n;
}

int effective_states(const TabularMdp& mdp, LearnerModel model) {
  return model == LearnerModel::EarlyTerminated ? mdp.n_states - mdp.n_invalid() + 1
                                                : mdp.n_states;
}

double regret_bound(const TabularMdp& mdp, LearnerModel model) {
  return 2.0 * mdp.horizon * effective_states(mdp, model) * mdp.n_actions;
}

RegretCurve optimistic_learner(const TabularMdp& mdp, const LearnerOptions& options) {
  mdp.validate();
  if (options.episodes < 0) throw std::invalid_argument("optimistic_learner: negative episodes");
  const int H = mdp.horizon;
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  const bool early = options.model == LearnerModel::EarlyTerminated;
  const double optimism = std::max(mdp.reward_max(), 0.0);
  const double reference = constrained_optimum(mdp, 0, H).value;

  std::vector<bool> known(mdp.next.size(), options.preseed);
  // Learned entries: only read where known.
  std::vector<int> seen_next(mdp.next.size(), 0);
  std::vector<double> seen_reward(mdp.next.size(), 0.0);
  std::vector<int> seen_cost(mdp.next.size(), 0);
  if (options.preseed) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        seen_next[mdp.index(s, a)] = mdp.transition(s, a);
        seen_reward[mdp.index(s, a)] = mdp.r(s, a);
        seen_cost[mdp.index(s, a)] = mdp.cost(s, a);
      }
    }
  }

  RegretCurve curve;
  curve.horizon = H;
  curve.effective_states = effective_states(mdp, options.model);
  std::vector<std::vector<double>> value(static_cast<std::size_t>(H) + 1,
                                         std::vector<double>(static_cast<std::size_t>(S)));
  std::vector<std::vector<int>> policy(static_cast<std::size_t>(H),
                                       std::vector<int>(static_cast<std::size_t>(S)));
  double cumulative = 0.0;
  for (int k = 1; k <= options.episodes; ++k) {
    // Plan on the optimistic model.
    std::fill(value[H].begin(), value[H].end(), 0.0);
    for (int t = H - 1; t >= 0; --t) {
      for (int s = 0; s < S; ++s) {
        double best = kNegInf;
        int best_a = 0;
        for (int a = 0; a < A; ++a) {
          const std::size_t i = mdp.index(s, a);
          double q;
          if (!known[i]) {
            q = optimism * (H - t);
          } else if (seen_cost[i] > 0) {
            q = seen_reward[i] + options.reward_end + (early ? 0.0 : value[t + 1][seen_next[i]]);
          } else {
            q = seen_reward[i] + value[t + 1][seen_next[i]];
          }
          if (q > best) {
            best = q;
            best_a = a;
          }
        }
        value[t][s] = best;
        policy[t][s] = best_a;
      }
    }
    // Execute and reveal.
    double ret = 0.0;
    int steps = 0;
    int s = mdp.start;
    for (int t = 0; t < H; ++t) {
      const int a = policy[t][s];
      const std::size_t i = mdp.index(s, a);
      known[i] = true;
      seen_next[i] = mdp.transition(s, a);
      seen_reward[i] = mdp.r(s, a);
      seen_cost[i] = mdp.cost(s, a);
      ++steps;
      if (seen_cost[i] > 0) {
        ret += seen_reward[i] + options.reward_end;
        if (early) break;
      } else {
        ret += seen_reward[i];
      }
      s = seen_next[i];
    }
    const double inst = reference - ret;
    cumulative += inst;
    curve.points.push_back({k, inst, cumulative, steps});
  }
  return curve;
}

double sample_savings(const RegretCurve& curve) {
  if (curve.points.empty() || curve.horizon <= 0) return 0.0;
  const double full = static_cast<double>(curve.points.size()) * curve.horizon;
  return 1.0 - static_cast<double>(curve.total_steps()) / full;
}

double corollary_ratio(int n_states, int n_invalid) {
  if (n_invalid < 0 || n_invalid >= n_states) {
    throw std::invalid_argument("corollary_ratio: need 0 <= n_invalid < n_states");
  }
  return static_cast<double>(n_states) / static_cast<double>(n_states - n_invalid + 1);
}

RegretCurve random_policy_run(const TabularMdp& mdp, int episodes, double reward_end,
                              std::uint64_t seed) {
  mdp.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, mdp.n_actions - 1);
  const double reference = constrained_optimum(mdp, 0, mdp.horizon).value;
  RegretCurve curve;
  curve.horizon = mdp.horizon;
  curve.effective_states = effective_states(mdp, LearnerModel::EarlyTerminated);
  double cumulative = 0.0;
  for (int k = 1; k <= episodes; ++k) {
    double ret = 0.0;
    int steps = 0;
    int s = mdp.start;
    for (int t = 0; t < mdp.horizon; ++t) {
      const int a = pick(rng);
      ++steps;
      if (mdp.cost(s, a) > 0) {
        ret += mdp.r(s, a) + reward_end;
        break;
      }
      ret += mdp.r(s, a);
      s = mdp.transition(s, a);
    }
    cumulative += reference - ret;
    curve.points.push_back({k, reference - ret, cumulative, steps});
  }
  return curve;
}

TabularMdp random_instance(std::mt19937_64& rng, const InstanceOptions& opts) {
  if (opts.n_invalid < 0 || opts.n_invalid >= opts.n_states) {
    throw std::invalid_argument("random_instance: need 0 <= n_invalid < n_states");
  }
  if (opts.reward_levels < 1) throw std::invalid_argument("random_instance: reward_levels < 1");
  TabularMdp mdp(opts.n_states, opts.n_actions, opts.horizon);
  const int n_valid = opts.n_states - opts.n_invalid;
  for (int s = n_valid; s < opts.n_states; ++s) mdp.invalid[s] = true;
  std::uniform_int_distribution<int> any_state(0, opts.n_states - 1);
  std::uniform_int_distribution<int> valid_state(0, n_valid - 1);
  std::uniform_int_distribution<int> invalid_state(n_valid, opts.n_states - 1);
  std::uniform_int_distribution<int> level(0, opts.reward_levels);
  const double step = opts.reward_max / opts.reward_levels;
  for (int s = 0; s < opts.n_states; ++s) {
    for (int a = 0; a < opts.n_actions; ++a) {
      int sp;
      if (mdp.invalid[s]) {
        sp = invalid_state(rng);
      } else if (opts.safe_action && a == 0) {
        sp = valid_state(rng);
      } else {
        sp = any_state(rng);
      }
      mdp.next[mdp.index(s, a)] = sp;
      mdp.reward[mdp.index(s, a)] = step * level(rng);
    }
  }
  mdp.start = 0;
  return mdp;
}

}  // namespace etmdp::tabular
