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

#include "etmdp/early_termination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etmdp {

std::string_view to_string(EtMode mode) {
  switch (mode) {
    case EtMode::Binary: return "binary";
    case EtMode::BudgetExtended: return "budget";
    case EtMode::Tightened: return "tightened";
  }
  return "unknown";
}

std::optional<EtMode> parse_et_mode(std::string_view text) {
  if (text == "binary") return EtMode::Binary;
  if (text == "budget" || text == "budget-extended") return EtMode::BudgetExtended;
  if (text == "tightened") return EtMode::Tightened;
  return std::nullopt;
}

EtEnv::EtEnv(std::unique_ptr<Environment> base, EtMode mode, double reward_end,
             TerminationReward rule)
    : base_(std::move(base)), mode_(mode), reward_end_(reward_end), rule_(rule) {
  if (!base_) throw std::invalid_argument("EtEnv: null base environment");
  if (!std::isfinite(reward_end)) {
    throw std::invalid_argument("EtEnv: termination reward must be finite");
  }
  spec_ = base_->spec();
  if (mode_ == EtMode::BudgetExtended) spec_.state_dim = base_->observation_dim() + 2;
  spec_.reward_min = std::min({spec_.reward_min, reward_end_, 0.0});
  if (rule_ == TerminationReward::Additive) {
    spec_.reward_min = std::min(spec_.reward_min, base_->spec().reward_min + reward_end_);
    spec_.reward_max = std::max(spec_.reward_max, base_->spec().reward_max + reward_end_);
  } else {
    spec_.reward_max = std::max(spec_.reward_max, reward_end_);
  }
  spec_.reward_max = std::max(spec_.reward_max, 0.0);
}

int EtEnv::observation_dim() const { return spec_.state_dim; }

double EtEnv::effective_budget() const {
  return mode_ == EtMode::BudgetExtended ? base_->spec().budget : 0.0;
}

Vec EtEnv::observe(const Vec& base_state) const {
  if (mode_ != EtMode::BudgetExtended) return base_state;
  Vec obs = base_state;
  const double budget = effective_budget();
  const double horizon = static_cast<double>(base_->spec().horizon);
  obs.push_back(budget > 0.0 ? (budget - cost_so_far_) / budget : 0.0);
  obs.push_back(horizon > 0.0 ? (horizon - t_) / horizon : 0.0);
  return obs;
}

Vec EtEnv::absorbing_observation() const {
  return Vec(static_cast<std::size_t>(observation_dim()), 0.0);
}

Vec EtEnv::reset(std::uint64_t seed) {
  cost_so_far_ = 0.0;
  absorbing_ = false;
  t_ = 0;
  last_base_ = StepResult{};
  return observe(base_->reset(seed));
}

StepResult EtEnv::step(std::span<const double> action) {
  if (absorbing_) {
    StepResult res;
    res.next_state = absorbing_observation();
    res.done = true;
    return res;
  }
  last_base_ = base_->step(action);
  ++t_;
  cost_so_far_ += last_base_.cost;

  StepResult res;
  res.cost = last_base_.cost;
  if (cost_so_far_ > effective_budget()) {
    absorbing_ = true;
    res.violated = true;
    res.done = true;
    res.reward = rule_ == TerminationReward::Additive ? last_base_.reward + reward_end_
                                                      : reward_end_;
    res.next_state = absorbing_observation();
    return res;
  }
  res.reward = last_base_.reward;
  res.done = last_base_.done;
  res.next_state = observe(last_base_.next_state);
  return res;
}

Vec EtEnv::pre_absorption_observation() const { return observe(last_base_.next_state); }

std::unique_ptr<Environment> EtEnv::clone() const {
  auto copy = std::make_unique<EtEnv>(base_->clone(), mode_, reward_end_, rule_);
  copy->cost_so_far_ = cost_so_far_;
  copy->absorbing_ = absorbing_;
  copy->t_ = t_;
  copy->last_base_ = last_base_;
  return copy;
}

std::string EtEnv::name() const {
  return "et-" + std::string(to_string(mode_)) + "(" + base_->name() + ")";
}

std::unique_ptr<EtEnv> wrap(std::unique_ptr<Environment> base, EtMode mode,
                            double reward_end, TerminationReward rule) {
  return std::make_unique<EtEnv>(std::move(base), mode, reward_end, rule);
}

double safe_re_threshold(const CmdpSpec& spec) {
  return static_cast<double>(spec.horizon) *
             (spec.reward_min - std::max(spec.reward_max, 0.0)) -
         1.0;
}

}  // namespace etmdp
