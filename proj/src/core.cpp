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

#include "etmdp/core.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "etmdp/error.hpp"

namespace etmdp {

void CmdpSpec::validate() const {
  if (state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("CmdpSpec: state_dim and action_dim must be positive");
  }
  if (horizon < 1) throw std::invalid_argument("CmdpSpec: horizon must be >= 1");
  if (!(budget >= 0.0)) throw std::invalid_argument("CmdpSpec: budget must be >= 0");
  if (!(reward_min <= reward_max)) {
    throw std::invalid_argument("CmdpSpec: reward_min must not exceed reward_max");
  }
}

Trajectory rollout(Policy& policy, Environment& env, int max_steps,
                   std::uint64_t rng_seed) {
  const CmdpSpec& spec = env.spec();
  if (max_steps < 0) throw std::invalid_argument("rollout: max_steps must be >= 0");
  if (max_steps > spec.horizon) {
    throw std::invalid_argument("rollout: max_steps " + std::to_string(max_steps) +
                                " exceeds horizon " + std::to_string(spec.horizon));
  }
  Trajectory traj;
  Vec obs = env.reset(rng_seed);
  policy.reset();
  const int steps = std::min(max_steps, spec.horizon);
  traj.steps.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int t = 0; t < steps; ++t) {
    Vec action = policy.act(obs);
    if (static_cast<int>(action.size()) != spec.action_dim) {
      throw Error("rollout: policy returned " + std::to_string(action.size()) +
                  " action components at step " + std::to_string(t) + ", expected " +
                  std::to_string(spec.action_dim));
    }
    for (double a : action) {
      if (!std::isfinite(a)) {
        throw Error("rollout: non-finite action at step " + std::to_string(t));
      }
    }
    StepResult res = env.step(action);
    policy.record(obs, action, res.reward);
    traj.steps.push_back({obs, action, res.reward, res.cost});
    obs = std::move(res.next_state);
    if (res.done) {
      traj.terminal = true;
      break;
    }
  }
  if (!traj.steps.empty()) traj.final_state = std::move(obs);
  return traj;
}

EpisodeStats episodic_stats(const Trajectory& traj) {
  EpisodeStats stats;
  for (const Transition& step : traj.steps) {
    stats.episodic_return += step.reward;
    stats.episodic_cost += step.cost;
  }
  stats.length = traj.steps.size();
  return stats;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t sdim = traj.empty() ? 0 : traj.steps.front().state.size();
  const std::size_t adim = traj.empty() ? 0 : traj.steps.front().action.size();
  out << "t";
  for (std::size_t i = 0; i < sdim; ++i) out << ",s" << i;
  for (std::size_t i = 0; i < adim; ++i) out << ",a" << i;
  out << ",reward,cost\n";
  const auto old_precision = out.precision(17);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const Transition& step = traj.steps[t];
    out << t;
    for (double v : step.state) out << ',' << v;
    for (double v : step.action) out << ',' << v;
    out << ',' << step.reward << ',' << step.cost << '\n';
  }
  out.precision(old_precision);
}

UniformRandomPolicy::UniformRandomPolicy(int action_dim, std::uint64_t seed)
    : action_dim_(action_dim), rng_(seed) {}

Vec UniformRandomPolicy::act(std::span<const double>) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec a(static_cast<std::size_t>(action_dim_));
  for (double& v : a) v = dist(rng_);
  return a;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace etmdp
