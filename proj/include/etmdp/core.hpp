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

#ifndef ETMDP_CORE_HPP
#define ETMDP_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace etmdp {

using Vec = std::vector<double>;

// Static description of a constrained MDP: spaces, horizon, budget and the
// range every emitted reward lies in.
struct CmdpSpec {
  int state_dim = 1;
  int action_dim = 1;
  int horizon = 1;
  double budget = 0.0;
  double reward_min = 0.0;
  double reward_max = 0.0;
  bool deterministic = true;

  // Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  double cost = 0.0;
  bool done = false;
  // Set on the step whose cost first pushes the running total past the
  // permitted budget.
  bool violated = false;
};

// Behavioral contract every environment implements. Stochastic environments
// own their generator and reseed it in reset().
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const CmdpSpec& spec() const = 0;
  virtual int observation_dim() const { return spec().state_dim; }
  virtual Vec reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
  virtual std::string name() const = 0;
};

// A policy maps observations to actions in [-1, 1]^action_dim. Policies
// that condition on recent history keep their own context and receive each
// executed (state, action, reward) through record().
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void reset() {}
  virtual Vec act(std::span<const double> observation) = 0;
  virtual void record(std::span<const double> /*observation*/,
                      std::span<const double> /*action*/, double /*reward*/) {}
};

struct Transition {
  Vec state;
  Vec action;
  double reward = 0.0;
  double cost = 0.0;
};

struct Trajectory {
  std::vector<Transition> steps;
  // Observation after the last executed step (empty for empty trajectories).
  Vec final_state;
  bool terminal = false;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

struct EpisodeStats {
  double episodic_return = 0.0;
  double episodic_cost = 0.0;
  std::size_t length = 0;
};

// Resets env with rng_seed, then runs policy for at most max_steps steps or
// until done. max_steps above the horizon is std::invalid_argument; a
// non-finite action throws etmdp::Error naming the step index.
Trajectory rollout(Policy& policy, Environment& env, int max_steps,
                   std::uint64_t rng_seed);

// Undiscounted sums over the trajectory.
EpisodeStats episodic_stats(const Trajectory& traj);

// Header `t,s0..,a0..,reward,cost`, one row per step.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Policy returning the same action every step.
class ConstantPolicy : public Policy {
 public:
  explicit ConstantPolicy(Vec action) : action_(std::move(action)) {}
  Vec act(std::span<const double>) override { return action_; }

 private:
  Vec action_;
};

// Uniform actions in [-1, 1]^dim from an owned generator. The generator keeps
// running across episodes.
class UniformRandomPolicy : public Policy {
 public:
  UniformRandomPolicy(int action_dim, std::uint64_t seed);
  Vec act(std::span<const double>) override;

 private:
  int action_dim_;
  std::mt19937_64 rng_;
};

// SplitMix64 step; used to derive independent seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace etmdp

#endif  // ETMDP_CORE_HPP
