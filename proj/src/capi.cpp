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

#include "etmdp/etmdp.h"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "etmdp/agents.hpp"
#include "etmdp/config.hpp"
#include "etmdp/error.hpp"
#include "etmdp/runner.hpp"
#include "etmdp/tabular.hpp"

struct etmdp_env_s {
  std::unique_ptr<etmdp::Environment> env;
};

struct etmdp_agent_s {
  etmdp::agents::Agent agent;
};

namespace {

using etmdp::cli::KeyValues;
using etmdp::cli::RunConfig;

thread_local std::string g_last_error;

template <class F>
etmdp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const etmdp::ConfigError& e) {
    g_last_error = e.what();
    return ETMDP_ERR_CONFIG;
  } catch (const etmdp::IoError& e) {
    g_last_error = e.what();
    return ETMDP_ERR_IO;
  } catch (const etmdp::Error& e) {
    g_last_error = e.what();
    return ETMDP_ERR_RUNTIME;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return ETMDP_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    g_last_error = e.what();
    return ETMDP_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ETMDP_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ETMDP_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown failure";
    return ETMDP_ERR_RUNTIME;
  }
}

etmdp_status fail(etmdp_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

#define ETMDP_REQUIRE(ptr)                                              \
  do {                                                                  \
    if ((ptr) == nullptr) return fail(ETMDP_ERR_NULL_POINTER, #ptr " is null"); \
  } while (0)

KeyValues parse_text(const char* text) {
  return text == nullptr ? KeyValues{} : etmdp::cli::parse_key_values(std::string_view(text));
}

// Refuses keys outside the given prefixes so typos are caught early.
void restrict_keys(const KeyValues& kv, std::initializer_list<std::string_view> prefixes,
                   const char* what) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (std::string_view p : prefixes) ok = ok || std::string_view(k).substr(0, p.size()) == p;
    if (!ok) throw etmdp::ConfigError(std::string(what) + ": key '" + k + "' is not accepted here");
  }
}

etmdp_status check_len(size_t got, size_t want, const char* what) {
  if (got < want) {
    return fail(ETMDP_ERR_BUFFER_TOO_SMALL, std::string(what) + " needs " + std::to_string(want) +
                                                " entries, got " + std::to_string(got));
  }
  return ETMDP_OK;
}

}  // namespace

extern "C" {

const char* etmdp_version(void) { return etmdp::cli::kCodeVersion; }

const char* etmdp_last_error(void) { return g_last_error.c_str(); }

const char* etmdp_status_name(etmdp_status status) {
  switch (status) {
    case ETMDP_OK: return "ok";
    case ETMDP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ETMDP_ERR_NULL_POINTER: return "null pointer";
    case ETMDP_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case ETMDP_ERR_CONFIG: return "configuration error";
    case ETMDP_ERR_IO: return "i/o error";
    case ETMDP_ERR_RUNTIME: return "runtime failure";
  }
  return "unknown status";
}

const char* etmdp_config_keys(void) {
  static const std::string joined = [] {
    std::string out;
    for (const std::string& k : etmdp::cli::config_keys()) out += k + "\n";
    return out;
  }();
  return joined.c_str();
}

etmdp_status etmdp_env_create(const char* config, etmdp_env_t* out) {
  ETMDP_REQUIRE(out);
  return guarded([&] {
    const KeyValues kv = parse_text(config);
    restrict_keys(kv, {"env.", "et."}, "environment config");
    const RunConfig cfg = RunConfig::from_key_values(kv);
    *out = new etmdp_env_s{etmdp::cli::make_env(cfg)};
    return ETMDP_OK;
  });
}

etmdp_status etmdp_env_destroy(etmdp_env_t env) {
  delete env;
  return ETMDP_OK;
}

etmdp_status etmdp_env_observation_dim(etmdp_env_t env, size_t* out) {
  ETMDP_REQUIRE(env);
  ETMDP_REQUIRE(out);
  *out = static_cast<size_t>(env->env->observation_dim());
  return ETMDP_OK;
}

etmdp_status etmdp_env_action_dim(etmdp_env_t env, size_t* out) {
  ETMDP_REQUIRE(env);
  ETMDP_REQUIRE(out);
  *out = static_cast<size_t>(env->env->spec().action_dim);
  return ETMDP_OK;
}

etmdp_status etmdp_env_horizon(etmdp_env_t env, int* out) {
  ETMDP_REQUIRE(env);
  ETMDP_REQUIRE(out);
  *out = env->env->spec().horizon;
  return ETMDP_OK;
}

etmdp_status etmdp_env_reset(etmdp_env_t env, uint64_t seed, double* obs, size_t obs_len) {
  ETMDP_REQUIRE(env);
  ETMDP_REQUIRE(obs);
  const auto dim = static_cast<size_t>(env->env->observation_dim());
  if (etmdp_status s = check_len(obs_len, dim, "observation buffer"); s != ETMDP_OK) return s;
  return guarded([&] {
    const etmdp::Vec o = env->env->reset(seed);
    std::copy(o.begin(), o.end(), obs);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_env_step(etmdp_env_t env, const double* action, size_t action_len,
                            double* next_obs, size_t obs_len, etmdp_step* out) {
  ETMDP_REQUIRE(env);
  ETMDP_REQUIRE(action);
  ETMDP_REQUIRE(next_obs);
  ETMDP_REQUIRE(out);
  const auto adim = static_cast<size_t>(env->env->spec().action_dim);
  if (action_len != adim) {
    return fail(ETMDP_ERR_INVALID_ARGUMENT, "action has " + std::to_string(action_len) +
                                                " entries, expected " + std::to_string(adim));
  }
  const auto odim = static_cast<size_t>(env->env->observation_dim());
  if (etmdp_status s = check_len(obs_len, odim, "observation buffer"); s != ETMDP_OK) return s;
  return guarded([&] {
    const etmdp::StepResult r = env->env->step(std::span<const double>(action, action_len));
    std::copy(r.next_state.begin(), r.next_state.end(), next_obs);
    *out = etmdp_step{r.reward, r.cost, r.done ? 1 : 0, r.violated ? 1 : 0};
    return ETMDP_OK;
  });
}

etmdp_status etmdp_safe_re_threshold(int horizon, double reward_min, double reward_max,
                                     double* out) {
  ETMDP_REQUIRE(out);
  return guarded([&] {
    etmdp::CmdpSpec spec;
    spec.horizon = horizon;
    spec.reward_min = reward_min;
    spec.reward_max = reward_max;
    spec.validate();
    *out = etmdp::safe_re_threshold(spec);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_corollary_ratio(int n_states, int n_invalid, double* out) {
  ETMDP_REQUIRE(out);
  return guarded([&] {
    *out = etmdp::tabular::corollary_ratio(n_states, n_invalid);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_create(const char* kind, size_t obs_dim, size_t action_dim,
                                const char* overrides, uint64_t seed, etmdp_agent_t* out) {
  ETMDP_REQUIRE(kind);
  ETMDP_REQUIRE(out);
  return guarded([&] {
    KeyValues kv = parse_text(overrides);
    restrict_keys(kv, {"agent.", "et.reward_end", "env.budget"}, "agent overrides");
    kv["agent.kind"] = kind;
    const RunConfig cfg = RunConfig::from_key_values(kv);
    if (obs_dim == 0 || action_dim == 0 || obs_dim > 1u << 20 || action_dim > 1u << 20) {
      throw std::invalid_argument("agent dimensions must lie in [1, 2^20]");
    }
    *out = new etmdp_agent_s{etmdp::agents::Agent(cfg.agent_kind, static_cast<int>(obs_dim),
                                                  static_cast<int>(action_dim), cfg.agent, seed)};
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_destroy(etmdp_agent_t agent) {
  delete agent;
  return ETMDP_OK;
}

etmdp_status etmdp_agent_select_action(etmdp_agent_t agent, const double* obs, size_t obs_len,
                                       int explore, double* action, size_t action_len) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(obs);
  ETMDP_REQUIRE(action);
  const auto adim = static_cast<size_t>(agent->agent.action_dim());
  if (etmdp_status s = check_len(action_len, adim, "action buffer"); s != ETMDP_OK) return s;
  return guarded([&] {
    const etmdp::Vec a =
        agent->agent.select_action(std::span<const double>(obs, obs_len), explore != 0);
    std::copy(a.begin(), a.end(), action);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_observe(etmdp_agent_t agent, const double* obs, const double* action,
                                 double reward, double cost, const double* next_obs,
                                 int terminal, int truncated) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(obs);
  ETMDP_REQUIRE(action);
  ETMDP_REQUIRE(next_obs);
  return guarded([&] {
    const auto od = static_cast<size_t>(agent->agent.obs_dim());
    const auto ad = static_cast<size_t>(agent->agent.action_dim());
    agent->agent.observe(std::span<const double>(obs, od), std::span<const double>(action, ad),
                         reward, cost, std::span<const double>(next_obs, od), terminal != 0,
                         truncated != 0);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_end_episode(etmdp_agent_t agent, double episodic_cost) {
  ETMDP_REQUIRE(agent);
  return guarded([&] {
    agent->agent.end_episode(episodic_cost);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_train_step(etmdp_agent_t agent, etmdp_train_report* out) {
  ETMDP_REQUIRE(agent);
  return guarded([&] {
    const etmdp::agents::TrainReport r = agent->agent.train_step();
    if (out != nullptr) {
      *out = etmdp_train_report{r.critic1_loss, r.critic2_loss,
                                r.actor_loss.value_or(std::numeric_limits<double>::quiet_NaN()),
                                r.skipped ? 1 : 0};
    }
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_replay_size(etmdp_agent_t agent, size_t* out) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(out);
  *out = agent->agent.replay().size();
  return ETMDP_OK;
}

etmdp_status etmdp_agent_lambda(etmdp_agent_t agent, double* out) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(out);
  *out = agent->agent.lambda();
  return ETMDP_OK;
}

etmdp_status etmdp_agent_save(etmdp_agent_t agent, const char* stem) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(stem);
  return guarded([&] {
    agent->agent.save(stem);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_agent_load(etmdp_agent_t agent, const char* stem) {
  ETMDP_REQUIRE(agent);
  ETMDP_REQUIRE(stem);
  return guarded([&] {
    agent->agent.load(stem);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_run_train(const char* config) {
  return guarded([&] {
    const RunConfig cfg =
        RunConfig::from_key_values(parse_text(config), etmdp::cli::default_seed_from_env());
    etmdp::cli::cmd_train(cfg);
    return ETMDP_OK;
  });
}

etmdp_status etmdp_run_eval(const char* run_dir, int episodes, double* success_rate,
                            double* mean_return, double* mean_cost) {
  ETMDP_REQUIRE(run_dir);
  return guarded([&] {
    const auto stats = etmdp::cli::cmd_eval(run_dir, episodes);
    double s = 0.0, r = 0.0, c = 0.0;
    for (const auto& e : stats) {
      s += e.success_rate;
      r += e.mean_return;
      c += e.mean_cost;
    }
    const double n = static_cast<double>(stats.size());
    if (success_rate) *success_rate = s / n;
    if (mean_return) *mean_return = r / n;
    if (mean_cost) *mean_cost = c / n;
    return ETMDP_OK;
  });
}

void etmdp_regret_options_init(etmdp_regret_options* opts) {
  if (opts == nullptr) return;
  static const int kDefaultSize = 20;
  const etmdp::cli::RegretBenchOptions d;
  *opts = etmdp_regret_options{d.n_instances, &kDefaultSize, 1, d.invalid_fraction,
                               d.n_actions,   d.horizon,     d.episodes, d.reward_end,
                               d.seed,        nullptr};
}

etmdp_status etmdp_run_regret_bench(const etmdp_regret_options* opts, etmdp_regret_summary* out) {
  ETMDP_REQUIRE(opts);
  if (opts->n_sizes > 0 && opts->sizes == nullptr) {
    return fail(ETMDP_ERR_NULL_POINTER, "sizes is null");
  }
  return guarded([&] {
    etmdp::cli::RegretBenchOptions o;
    o.n_instances = opts->n_instances;
    o.sizes.assign(opts->sizes, opts->sizes + opts->n_sizes);
    o.invalid_fraction = opts->invalid_fraction;
    o.n_actions = opts->n_actions;
    o.horizon = opts->horizon;
    o.episodes = opts->episodes;
    o.reward_end = opts->reward_end;
    o.seed = opts->seed;
    if (opts->out_dir != nullptr) o.out_dir = opts->out_dir;
    const auto s = etmdp::cli::cmd_regret_bench(o);
    if (out != nullptr) {
      *out = etmdp_regret_summary{static_cast<int>(s.rows.size()), s.mean_measured_ratio,
                                  s.analytic_floor,                 s.ratio_above_one,
                                  s.within_bound,                   s.mean_savings};
    }
    return ETMDP_OK;
  });
}

void etmdp_visitation_options_init(etmdp_visitation_options* opts) {
  if (opts == nullptr) return;
  const etmdp::cli::VisitationOptions d;
  *opts = etmdp_visitation_options{d.level, d.early_terminated ? 1 : 0, d.steps, d.seed,
                                   d.resolution, nullptr};
}

etmdp_status etmdp_run_visitation(const etmdp_visitation_options* opts, long* total_steps,
                                  double* outside_fraction) {
  ETMDP_REQUIRE(opts);
  return guarded([&] {
    etmdp::cli::VisitationOptions o;
    o.level = opts->level;
    o.early_terminated = opts->early_terminated != 0;
    o.steps = opts->steps;
    o.seed = opts->seed;
    o.resolution = opts->resolution;
    if (opts->out_dir != nullptr) o.out_dir = opts->out_dir;
    const auto s = etmdp::cli::cmd_visitation(o);
    if (total_steps) *total_steps = s.histogram.total();
    if (outside_fraction) *outside_fraction = s.outside_fraction;
    return ETMDP_OK;
  });
}

etmdp_status etmdp_run_plot(const char* run_dir) {
  ETMDP_REQUIRE(run_dir);
  return guarded([&] {
    etmdp::cli::cmd_plot(run_dir);
    return ETMDP_OK;
  });
}

}  // extern "C"
