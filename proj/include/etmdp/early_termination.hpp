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

#ifndef ETMDP_EARLY_TERMINATION_HPP
#define ETMDP_EARLY_TERMINATION_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "etmdp/core.hpp"

namespace etmdp {

enum class EtMode {
  // Binary task: any positive cost terminates (effective budget 0).
  Binary,
  // Budget task: terminate once the running cost exceeds the base budget.
  // Observations carry normalized budget-left and time-left.
  BudgetExtended,
  // Budget task treated as binary: effective budget 0 whatever the base says.
  Tightened,
};

// How the termination reward enters the violating step.
enum class TerminationReward {
  // r' = r_e on the violating step.
  Replace,
  // r' = r + r_e on the violating step.
  Additive,
};

std::string_view to_string(EtMode mode);
// Accepts "binary", "budget" / "budget-extended", "tightened".
std::optional<EtMode> parse_et_mode(std::string_view text);

// Early-terminated view of a constrained environment. Tracks the running
// cost b; when b exceeds the effective budget the episode moves to the
// absorbing state s_e, paying r_e once and 0 afterwards.
class EtEnv : public Environment {
 public:
  EtEnv(std::unique_ptr<Environment> base, EtMode mode, double reward_end,
        TerminationReward rule = TerminationReward::Replace);

  const CmdpSpec& spec() const override { return spec_; }
  int observation_dim() const override;
  Vec reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override;

  EtMode mode() const { return mode_; }
  double reward_end() const { return reward_end_; }
  TerminationReward rule() const { return rule_; }
  double effective_budget() const;
  double cumulative_cost() const { return cost_so_far_; }
  bool absorbing() const { return absorbing_; }
  int elapsed_steps() const { return t_; }

  const Environment& base() const { return *base_; }
  Environment& base() { return *base_; }
  // Raw result of the most recent base step, before the ET transform.
  const StepResult& last_base_step() const { return last_base_; }
  // Observation the agent would have seen after the last step had it not
  // been absorbed.
  Vec pre_absorption_observation() const;

 private:
  Vec observe(const Vec& base_state) const;
  Vec absorbing_observation() const;

  std::unique_ptr<Environment> base_;
  EtMode mode_;
  double reward_end_;
  TerminationReward rule_;
  CmdpSpec spec_;
  double cost_so_far_ = 0.0;
  bool absorbing_ = false;
  int t_ = 0;
  StepResult last_base_;
};

// Throws std::invalid_argument on a non-finite r_e.
std::unique_ptr<EtEnv> wrap(std::unique_ptr<Environment> base, EtMode mode,
                            double reward_end,
                            TerminationReward rule = TerminationReward::Replace);

// Termination reward below which every violating trajectory returns strictly
// less than every feasible one: H * (r_min - max(r_max, 0)) - 1.
double safe_re_threshold(const CmdpSpec& spec);

}  // namespace etmdp

#endif  // ETMDP_EARLY_TERMINATION_HPP
