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

#ifndef ETMDP_AGENTS_HPP
#define ETMDP_AGENTS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "etmdp/core.hpp"
#include "etmdp/nn.hpp"

namespace etmdp::agents {

enum class AgentKind { Td3, ContextTd3, LagrangianTd3 };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view text);

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double expl_noise = 0.1;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  int batch_size = 256;
  std::size_t buffer_capacity = 1'000'000;
  int hidden_layers = 3;
  int hidden_units = 256;
  // GRU width for the context encoders; forced to 0 for the plain kinds. A
  // context agent with width 0 is plain TD3.
  int context_hidden = 30;
  int context_len = 3;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double context_lr = 3e-4;
  // Added to the reward of a step with positive cost (ET kinds).
  double reward_end = -10.0;
  // Lagrangian baseline.
  double lambda_init = 0.0;
  double lambda_lr = 0.01;
  double budget = 0.0;
  // Global-norm gradient clipping per optimizer; 0 disables.
  double grad_clip = 10.0;
  // Reject observe() calls whose state is not the previous next_state.
  bool check_sequence = false;

  // Throws etmdp::ConfigError naming the offending field.
  void validate() const;
};

// The last L (state, action, reward) triples, oldest first. Unfilled slots
// hold zeros.
class ContextWindow {
 public:
  ContextWindow() = default;
  ContextWindow(int length, int state_dim, int action_dim);

  int length() const { return length_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int slot_dim() const { return state_dim_ + action_dim_ + 1; }

  void push(std::span<const double> state, std::span<const double> action,
            double reward);
  void clear();
  // i = 0 is the oldest slot.
  std::span<const double> slot(int i) const;
  const Vec& data() const { return data_; }
  bool is_zero() const;

  friend bool operator==(const ContextWindow&, const ContextWindow&) = default;

 private:
  int length_ = 0;
  int state_dim_ = 0;
  int action_dim_ = 0;
  Vec data_;
};

struct ReplayRecord {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
  bool done = false;
  ContextWindow before;  // Z'_L: history preceding `state`
  ContextWindow after;   // Z_L: `before` with (state, action, reward) pushed
};

// Fixed-capacity ring buffer; the oldest record is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(ReplayRecord record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return records_.empty(); }
  // Storage order, not insertion order, once the buffer has wrapped.
  const ReplayRecord& operator[](std::size_t i) const { return records_[i]; }
  std::vector<const ReplayRecord*> sample(std::mt19937_64& rng,
                                          std::size_t n) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<ReplayRecord> records_;
};

struct TrainReport {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  std::optional<double> actor_loss;
  bool skipped = false;
};

// Minibatch in column layout.
struct Batch {
  nn::Matrix state, action, reward, next_state, not_done;
  std::vector<nn::Matrix> before;  // one (slot_dim x B) matrix per slot
  std::vector<nn::Matrix> after;
  nn::Index size() const { return state.cols(); }
};

struct CriticLoss {
  double critic1 = 0.0;
  double critic2 = 0.0;
};

// TD3 family with optional recurrent context encoders; one for the actor
// (w_a) and one for the critics (w_c). With context width 0 the encoders are
// bypassed and the agent is plain TD3.
class Agent {
 public:
  Agent(AgentKind kind, int obs_dim, int action_dim, AgentConfig config,
        std::uint64_t seed);

  AgentKind kind() const { return kind_; }
  const AgentConfig& config() const { return config_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  int context_dim() const { return context_dim_; }
  bool has_context() const { return context_dim_ > 0; }

  ContextWindow empty_window() const;
  // Deterministic actor output pi(s, C_wa(window)).
  Vec policy_action(std::span<const double> state,
                    const ContextWindow& before) const;
  // clamp(pi + explore * N(0, expl_noise^2), -1, 1). Throws etmdp::Error on a
  // non-finite network output.
  Vec select_action(std::span<const double> state, const ContextWindow& before,
                    bool explore);
  Vec select_action(std::span<const double> state, bool explore) {
    return select_action(state, window_, explore);
  }

  // One environment step, in order. Applies reward_end when cost > 0 (ET
  // kinds) or the lambda penalty (Lagrangian), pushes into the context
  // window, stores the record, and clears the windows at episode end.
  void observe(std::span<const double> state, std::span<const double> action,
               double reward, double cost, std::span<const double> next_state,
               bool terminal, bool truncated = false);
  // Lagrangian multiplier update from the finished episode's cost; resets the
  // context window for every kind.
  void end_episode(double episodic_cost);

  TrainReport train_step();
  TrainReport train_on(std::span<const ReplayRecord* const> records);

  // Building blocks of train_on, exposed for gradient checks.
  Batch make_batch(std::span<const ReplayRecord* const> records) const;
  nn::Matrix td_targets(const Batch& batch, bool with_noise = true);
  CriticLoss critic_loss(const Batch& batch, const nn::Matrix& targets,
                         bool backprop);
  double actor_loss(const Batch& batch, bool backprop);

  double q_value(int critic, std::span<const double> state,
                 std::span<const double> action, const ContextWindow& before) const;

  double lambda() const { return lambda_; }
  const ContextWindow& window() const { return window_; }
  const ReplayBuffer& replay() const { return replay_; }
  long updates() const { return updates_; }
  std::size_t skipped_updates() const { return skipped_; }

  nn::ParamList actor_params();
  nn::ParamList critic_params(int critic);
  nn::ParamList actor_context_params();
  nn::ParamList critic_context_params();
  nn::ParamList target_actor_params();
  nn::ParamList target_critic_params(int critic);
  // Online networks, encoders and targets in a fixed order.
  nn::ParamList all_params();

  void save(const std::filesystem::path& stem);
  void load(const std::filesystem::path& stem);

 private:
  nn::Matrix encode(const nn::Gru* gru, const std::vector<nn::Matrix>& seq,
                    nn::Index cols, nn::Gru::Cache* cache) const;

  AgentKind kind_;
  int obs_dim_;
  int action_dim_;
  AgentConfig config_;
  int context_dim_;
  std::mt19937_64 rng_;

  nn::Mlp actor_, actor_target_;
  nn::Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  std::unique_ptr<nn::Gru> ctx_actor_, ctx_critic_;
  nn::Adam actor_opt_, critic1_opt_, critic2_opt_, ctx_actor_opt_, ctx_critic_opt_;

  ReplayBuffer replay_;
  ContextWindow window_;
  Vec expected_state_;
  double lambda_;
  long updates_ = 0;
  std::size_t skipped_ = 0;
};

// max(0, lambda + lr * (episodic_cost - budget)).
double lagrangian_step(double lambda, double episodic_cost, double budget,
                       double lr);

// Agent's deterministic policy as a rollout Policy with its own context.
class AgentPolicy : public Policy {
 public:
  explicit AgentPolicy(const Agent& agent);

  void reset() override;
  Vec act(std::span<const double> observation) override;
  void record(std::span<const double> observation,
              std::span<const double> action, double reward) override;

 private:
  const Agent& agent_;
  ContextWindow window_;
};

}  // namespace etmdp::agents

#endif  // ETMDP_AGENTS_HPP
