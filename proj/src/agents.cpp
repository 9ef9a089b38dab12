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

#include "etmdp/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "etmdp/error.hpp"

namespace etmdp::agents {

using nn::Index;
using nn::Matrix;

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Td3:
      return "td3";
    case AgentKind::ContextTd3:
      return "context-td3";
    case AgentKind::LagrangianTd3:
      return "lagrangian-td3";
  }
  return "unknown";
}

std::optional<AgentKind> parse_agent_kind(std::string_view text) {
  for (AgentKind k : {AgentKind::Td3, AgentKind::ContextTd3, AgentKind::LagrangianTd3}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw ConfigError(std::string("agent.") + field + " " + rule);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma", "must lie in [0, 1]");
  require(tau >= 0.0 && tau <= 1.0, "tau", "must lie in [0, 1]");
  require(policy_delay >= 1, "policy_delay", "must be >= 1");
  require(expl_noise >= 0.0, "expl_noise", "must be >= 0");
  require(target_noise >= 0.0, "target_noise", "must be >= 0");
  require(noise_clip >= 0.0, "noise_clip", "must be >= 0");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(buffer_capacity >= 1, "buffer_capacity", "must be >= 1");
  require(hidden_layers >= 1, "hidden_layers", "must be >= 1");
  require(hidden_units >= 1, "hidden_units", "must be >= 1");
  require(context_hidden >= 0, "context_hidden", "must be >= 0");
  require(context_len >= 1, "context_len", "must be >= 1");
  require(actor_lr > 0.0 && std::isfinite(actor_lr), "actor_lr", "must be > 0");
  require(critic_lr > 0.0 && std::isfinite(critic_lr), "critic_lr", "must be > 0");
  require(context_lr > 0.0 && std::isfinite(context_lr), "context_lr", "must be > 0");
  require(std::isfinite(reward_end), "reward_end", "must be finite");
  require(lambda_init >= 0.0 && std::isfinite(lambda_init), "lambda_init", "must be >= 0");
  require(lambda_lr >= 0.0 && std::isfinite(lambda_lr), "lambda_lr", "must be >= 0");
  require(budget >= 0.0 && std::isfinite(budget), "budget", "must be >= 0");
  require(grad_clip >= 0.0, "grad_clip", "must be >= 0");
}

// ---------------------------------------------------------------------------
// ContextWindow

ContextWindow::ContextWindow(int length, int state_dim, int action_dim)
    : length_(length), state_dim_(state_dim), action_dim_(action_dim) {
  if (length < 0 || state_dim < 0 || action_dim < 0) {
    throw std::invalid_argument("ContextWindow: negative dimension");
  }
  data_.assign(static_cast<std::size_t>(length) * static_cast<std::size_t>(slot_dim()), 0.0);
}

void ContextWindow::push(std::span<const double> state, std::span<const double> action,
                         double reward) {
  if (length_ == 0) return;
  if (state.size() != static_cast<std::size_t>(state_dim_) ||
      action.size() != static_cast<std::size_t>(action_dim_)) {
    throw std::invalid_argument("ContextWindow::push: state or action has the wrong size");
  }
  const auto w = static_cast<std::size_t>(slot_dim());
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(w), data_.end(), data_.begin());
  auto out = data_.end() - static_cast<std::ptrdiff_t>(w);
  out = std::copy(state.begin(), state.end(), out);
  out = std::copy(action.begin(), action.end(), out);
  *out = reward;
}

void ContextWindow::clear() { std::fill(data_.begin(), data_.end(), 0.0); }

std::span<const double> ContextWindow::slot(int i) const {
  if (i < 0 || i >= length_) throw std::out_of_range("ContextWindow::slot: index out of range");
  const auto w = static_cast<std::size_t>(slot_dim());
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(i) * w, w);
}

bool ContextWindow::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------------------
// ReplayBuffer

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(ReplayRecord record) {
  if (records_.size() < capacity_) {
    records_.push_back(std::move(record));
  } else {
    records_[cursor_] = std::move(record);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const ReplayRecord*> ReplayBuffer::sample(std::mt19937_64& rng, std::size_t n) const {
  if (records_.empty()) throw Error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, records_.size() - 1);
  std::vector<const ReplayRecord*> out(n);
  for (auto& p : out) p = &records_[pick(rng)];
  return out;
}

// ---------------------------------------------------------------------------
// Agent

namespace {

std::vector<Index> layer_sizes(Index in, const AgentConfig& cfg, Index out) {
  std::vector<Index> sizes{in};
  for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_units);
  sizes.push_back(out);
  return sizes;
}

int context_width(AgentKind kind, const AgentConfig& cfg) {
  return kind == AgentKind::ContextTd3 ? cfg.context_hidden : 0;
}

const AgentConfig& validated(const AgentConfig& cfg) {
  cfg.validate();
  return cfg;
}

int checked_dim(int d, const char* what) {
  if (d < 1) throw ConfigError(std::string(what) + " must be >= 1");
  return d;
}

Matrix column(std::span<const double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = v[i];
  return m;
}

std::vector<Matrix> window_sequence(const ContextWindow& w) {
  std::vector<Matrix> seq;
  seq.reserve(static_cast<std::size_t>(w.length()));
  for (int i = 0; i < w.length(); ++i) seq.push_back(column(w.slot(i)));
  return seq;
}

Matrix stack(std::initializer_list<const Matrix*> parts) {
  Index rows = 0;
  Index cols = (*parts.begin())->cols();
  for (const Matrix* p : parts) rows += p->rows();
  Matrix out(rows, cols);
  Index r = 0;
  for (const Matrix* p : parts) {
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

}  // namespace

Agent::Agent(AgentKind kind, int obs_dim, int action_dim, AgentConfig config, std::uint64_t seed)
    : kind_(kind),
      obs_dim_(checked_dim(obs_dim, "observation dimension")),
      action_dim_(checked_dim(action_dim, "action dimension")),
      config_(validated(config)),
      context_dim_(context_width(kind, config_)),
      rng_(seed),
      actor_("actor", layer_sizes(obs_dim + context_dim_, config_, action_dim),
             nn::Activation::Relu, nn::Activation::Tanh, rng_),
      actor_target_(actor_),
      critic1_("critic1", layer_sizes(obs_dim + action_dim + context_dim_, config_, 1),
               nn::Activation::Relu, nn::Activation::Identity, rng_),
      critic2_("critic2", layer_sizes(obs_dim + action_dim + context_dim_, config_, 1),
               nn::Activation::Relu, nn::Activation::Identity, rng_),
      critic1_target_(critic1_),
      critic2_target_(critic2_),
      actor_opt_(config_.actor_lr),
      critic1_opt_(config_.critic_lr),
      critic2_opt_(config_.critic_lr),
      ctx_actor_opt_(config_.context_lr),
      ctx_critic_opt_(config_.context_lr),
      replay_(config_.buffer_capacity),
      window_(empty_window()),
      lambda_(config_.lambda_init) {
  if (context_dim_ > 0) {
    const Index slot = obs_dim + action_dim + 1;
    ctx_actor_ = std::make_unique<nn::Gru>("ctx_actor", slot, context_dim_, rng_);
    ctx_critic_ = std::make_unique<nn::Gru>("ctx_critic", slot, context_dim_, rng_);
  }
  auto rename = [](const nn::ParamList& ps, const std::string& from, const std::string& to) {
    for (nn::Param* p : ps) p->name.replace(0, from.size(), to);
  };
  rename(actor_target_.params(), "actor", "actor_target");
  rename(critic1_target_.params(), "critic1", "critic1_target");
  rename(critic2_target_.params(), "critic2", "critic2_target");
}

ContextWindow Agent::empty_window() const {
  return has_context() ? ContextWindow(config_.context_len, obs_dim_, action_dim_)
                       : ContextWindow();
}

Matrix Agent::encode(const nn::Gru* gru, const std::vector<Matrix>& seq, Index cols,
                     nn::Gru::Cache* cache) const {
  if (gru == nullptr) return Matrix(0, cols);
  const Matrix h0 = Matrix::Zero(context_dim_, cols);
  return cache ? gru->forward(seq, h0, *cache) : gru->forward(seq, h0);
}

Vec Agent::policy_action(std::span<const double> state, const ContextWindow& before) const {
  if (state.size() != static_cast<std::size_t>(obs_dim_)) {
    throw std::invalid_argument("policy_action: state has " + std::to_string(state.size()) +
                                " entries, expected " + std::to_string(obs_dim_));
  }
  const Matrix s = column(state);
  const Matrix z = encode(ctx_actor_.get(), window_sequence(before), 1, nullptr);
  const Matrix a = actor_.forward(stack({&s, &z}));
  return Vec(a.data(), a.data() + a.size());
}

Vec Agent::select_action(std::span<const double> state, const ContextWindow& before,
                         bool explore) {
  Vec a = policy_action(state, before);
  std::normal_distribution<double> noise(0.0, config_.expl_noise);
  for (double& v : a) {
    if (!std::isfinite(v)) throw Error("actor produced a non-finite action");
    if (explore && config_.expl_noise > 0.0) v += noise(rng_);
    v = std::clamp(v, -1.0, 1.0);
  }
  return a;
}

void Agent::observe(std::span<const double> state, std::span<const double> action,
                    double reward, double cost, std::span<const double> next_state,
                    bool terminal, bool truncated) {
  if (state.size() != static_cast<std::size_t>(obs_dim_) ||
      next_state.size() != static_cast<std::size_t>(obs_dim_) ||
      action.size() != static_cast<std::size_t>(action_dim_)) {
    throw std::invalid_argument("observe: state, action or next state has the wrong size");
  }
  if (config_.check_sequence && !expected_state_.empty() &&
      !std::equal(state.begin(), state.end(), expected_state_.begin(), expected_state_.end())) {
    throw Error("observe: state does not continue the previous transition");
  }
  double shaped = reward;
  if (kind_ == AgentKind::LagrangianTd3) {
    shaped = reward - lambda_ * cost;
  } else if (cost > 0.0) {
    shaped = reward + config_.reward_end;
  }
  ReplayRecord rec;
  rec.state.assign(state.begin(), state.end());
  rec.action.assign(action.begin(), action.end());
  rec.reward = shaped;
  rec.next_state.assign(next_state.begin(), next_state.end());
  rec.done = terminal;
  rec.before = window_;
  window_.push(state, action, shaped);
  rec.after = window_;
  replay_.push(std::move(rec));
  if (terminal || truncated) {
    window_.clear();
    expected_state_.clear();
  } else {
    expected_state_.assign(next_state.begin(), next_state.end());
  }
}

double lagrangian_step(double lambda, double episodic_cost, double budget, double lr) {
  return std::max(0.0, lambda + lr * (episodic_cost - budget));
}

void Agent::end_episode(double episodic_cost) {
  if (kind_ == AgentKind::LagrangianTd3) {
    lambda_ = lagrangian_step(lambda_, episodic_cost, config_.budget, config_.lambda_lr);
  }
  window_.clear();
  expected_state_.clear();
}

Batch Agent::make_batch(std::span<const ReplayRecord* const> records) const {
  const auto n = static_cast<Index>(records.size());
  if (n == 0) throw std::invalid_argument("make_batch: no records");
  Batch b;
  b.state.resize(obs_dim_, n);
  b.action.resize(action_dim_, n);
  b.reward.resize(1, n);
  b.next_state.resize(obs_dim_, n);
  b.not_done.resize(1, n);
  const int L = has_context() ? config_.context_len : 0;
  const Index slot = obs_dim_ + action_dim_ + 1;
  b.before.assign(static_cast<std::size_t>(L), Matrix(slot, n));
  b.after.assign(static_cast<std::size_t>(L), Matrix(slot, n));
  for (Index j = 0; j < n; ++j) {
    const ReplayRecord& r = *records[static_cast<std::size_t>(j)];
    b.state.col(j) = column(r.state);
    b.action.col(j) = column(r.action);
    b.reward(0, j) = r.reward;
    b.next_state.col(j) = column(r.next_state);
    b.not_done(0, j) = r.done ? 0.0 : 1.0;
    for (int i = 0; i < L; ++i) {
      b.before[i].col(j) = column(r.before.slot(i));
      b.after[i].col(j) = column(r.after.slot(i));
    }
  }
  return b;
}

Matrix Agent::td_targets(const Batch& batch, bool with_noise) {
  const Index n = batch.size();
  const Matrix za = encode(ctx_actor_.get(), batch.after, n, nullptr);
  const Matrix zc = encode(ctx_critic_.get(), batch.after, n, nullptr);
  Matrix a2 = actor_target_.forward(stack({&batch.next_state, &za}));
  if (with_noise && config_.target_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, config_.target_noise);
    for (Index j = 0; j < a2.cols(); ++j) {
      for (Index i = 0; i < a2.rows(); ++i) {
        const double e = std::clamp(noise(rng_), -config_.noise_clip, config_.noise_clip);
        a2(i, j) = std::clamp(a2(i, j) + e, -1.0, 1.0);
      }
    }
  }
  const Matrix x = stack({&batch.next_state, &a2, &zc});
  const Matrix q = critic1_target_.forward(x).cwiseMin(critic2_target_.forward(x));
  return batch.reward + config_.gamma * batch.not_done.cwiseProduct(q);
}

CriticLoss Agent::critic_loss(const Batch& batch, const Matrix& targets, bool backprop) {
  const Index n = batch.size();
  const double scale = 1.0 / static_cast<double>(n);
  nn::Gru::Cache ctx_cache;
  const Matrix zc = encode(ctx_critic_.get(), batch.before, n, &ctx_cache);
  const Matrix x = stack({&batch.state, &batch.action, &zc});
  nn::Mlp::Cache c1, c2;
  const Matrix e1 = critic1_.forward(x, c1) - targets;
  const Matrix e2 = critic2_.forward(x, c2) - targets;
  CriticLoss out{e1.squaredNorm() * scale, e2.squaredNorm() * scale};
  if (backprop) {
    const Matrix dx1 = critic1_.backward(c1, 2.0 * scale * e1);
    const Matrix dx2 = critic2_.backward(c2, 2.0 * scale * e2);
    if (ctx_critic_) {
      const Matrix dz = dx1.bottomRows(context_dim_) + dx2.bottomRows(context_dim_);
      ctx_critic_->backward(ctx_cache, dz);
    }
  }
  return out;
}

double Agent::actor_loss(const Batch& batch, bool backprop) {
  const Index n = batch.size();
  nn::Gru::Cache ctx_cache;
  const Matrix za = encode(ctx_actor_.get(), batch.before, n, &ctx_cache);
  const Matrix zc = encode(ctx_critic_.get(), batch.before, n, nullptr);
  nn::Mlp::Cache ac, cc;
  const Matrix a = actor_.forward(stack({&batch.state, &za}), ac);
  const Matrix q = critic1_.forward(stack({&batch.state, &a, &zc}), cc);
  const double loss = -q.mean();
  if (backprop) {
    const Matrix dq = Matrix::Constant(1, n, -1.0 / static_cast<double>(n));
    const Matrix dx = critic1_.backward(cc, dq, false);
    const Matrix dxa = actor_.backward(ac, dx.middleRows(obs_dim_, action_dim_));
    if (ctx_actor_) ctx_actor_->backward(ctx_cache, dxa.bottomRows(context_dim_));
  }
  return loss;
}

TrainReport Agent::train_step() {
  const auto records = replay_.sample(rng_, static_cast<std::size_t>(config_.batch_size));
  return train_on(records);
}

TrainReport Agent::train_on(std::span<const ReplayRecord* const> records) {
  const Batch batch = make_batch(records);
  TrainReport report;

  nn::zero_grads(critic_params(1));
  nn::zero_grads(critic_params(2));
  nn::zero_grads(critic_context_params());
  const Matrix y = td_targets(batch, true);
  const CriticLoss cl = critic_loss(batch, y, true);
  report.critic1_loss = cl.critic1;
  report.critic2_loss = cl.critic2;
  bool ok = critic1_opt_.step(critic_params(1), config_.grad_clip);
  ok = critic2_opt_.step(critic_params(2), config_.grad_clip) && ok;
  if (ctx_critic_) ok = ctx_critic_opt_.step(critic_context_params(), config_.grad_clip) && ok;

  ++updates_;
  if (updates_ % config_.policy_delay == 0) {
    nn::zero_grads(actor_params());
    nn::zero_grads(actor_context_params());
    report.actor_loss = actor_loss(batch, true);
    ok = actor_opt_.step(actor_params(), config_.grad_clip) && ok;
    if (ctx_actor_) ok = ctx_actor_opt_.step(actor_context_params(), config_.grad_clip) && ok;
    nn::soft_update(target_actor_params(), actor_params(), config_.tau);
    nn::soft_update(target_critic_params(1), critic_params(1), config_.tau);
    nn::soft_update(target_critic_params(2), critic_params(2), config_.tau);
  }
  if (!ok) {
    report.skipped = true;
    ++skipped_;
  }
  return report;
}

double Agent::q_value(int critic, std::span<const double> state, std::span<const double> action,
                      const ContextWindow& before) const {
  if (critic != 1 && critic != 2) throw std::invalid_argument("q_value: critic must be 1 or 2");
  const Matrix s = column(state);
  const Matrix a = column(action);
  const Matrix z = encode(ctx_critic_.get(), window_sequence(before), 1, nullptr);
  const nn::Mlp& net = critic == 1 ? critic1_ : critic2_;
  return net.forward(stack({&s, &a, &z}))(0, 0);
}

nn::ParamList Agent::actor_params() { return actor_.params(); }

nn::ParamList Agent::critic_params(int critic) {
  if (critic != 1 && critic != 2) throw std::invalid_argument("critic must be 1 or 2");
  return critic == 1 ? critic1_.params() : critic2_.params();
}

nn::ParamList Agent::actor_context_params() {
  return ctx_actor_ ? ctx_actor_->params() : nn::ParamList{};
}

nn::ParamList Agent::critic_context_params() {
  return ctx_critic_ ? ctx_critic_->params() : nn::ParamList{};
}

nn::ParamList Agent::target_actor_params() { return actor_target_.params(); }

nn::ParamList Agent::target_critic_params(int critic) {
  if (critic != 1 && critic != 2) throw std::invalid_argument("critic must be 1 or 2");
  return critic == 1 ? critic1_target_.params() : critic2_target_.params();
}

nn::ParamList Agent::all_params() {
  nn::ParamList out;
  for (const nn::ParamList& part :
       {actor_params(), critic_params(1), critic_params(2), actor_context_params(),
        critic_context_params(), target_actor_params(), target_critic_params(1),
        target_critic_params(2)}) {
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void Agent::save(const std::filesystem::path& stem) { nn::save_checkpoint(stem, all_params()); }

void Agent::load(const std::filesystem::path& stem) { nn::load_checkpoint(stem, all_params()); }

AgentPolicy::AgentPolicy(const Agent& agent) : agent_(agent), window_(agent.empty_window()) {}

void AgentPolicy::reset() { window_.clear(); }

Vec AgentPolicy::act(std::span<const double> observation) {
  return agent_.policy_action(observation, window_);
}

void AgentPolicy::record(std::span<const double> observation, std::span<const double> action,
                         double reward) {
  window_.push(observation, action, reward);
}

}  // namespace etmdp::agents
