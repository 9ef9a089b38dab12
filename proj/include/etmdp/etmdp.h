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

/*
 * C interface to the etmdp library. Every function returns an etmdp_status;
 * on failure a message for the calling thread is available from
 * etmdp_last_error() until the next call on that thread. Handles are opaque
 * and owned by the caller, released with the matching *_destroy function.
 */

#ifndef ETMDP_ETMDP_H
#define ETMDP_ETMDP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define ETMDP_API __declspec(dllexport)
#else
#  define ETMDP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum etmdp_status {
  ETMDP_OK = 0,
  ETMDP_ERR_INVALID_ARGUMENT = 1,
  ETMDP_ERR_NULL_POINTER = 2,
  ETMDP_ERR_BUFFER_TOO_SMALL = 3,
  ETMDP_ERR_CONFIG = 4,
  ETMDP_ERR_IO = 5,
  ETMDP_ERR_RUNTIME = 6,
} etmdp_status;

typedef struct etmdp_env_s* etmdp_env_t;
typedef struct etmdp_agent_s* etmdp_agent_t;

ETMDP_API const char* etmdp_version(void);
ETMDP_API const char* etmdp_last_error(void);
ETMDP_API const char* etmdp_status_name(etmdp_status status);

/* Newline-separated list of every configuration key. */
ETMDP_API const char* etmdp_config_keys(void);

/* ---- environments ---------------------------------------------------- */

/*
 * `config` is key = value text using the env.* and et.* keys (may be NULL or
 * empty for the defaults: maze level 1, binary early termination).
 */
ETMDP_API etmdp_status etmdp_env_create(const char* config, etmdp_env_t* out);
ETMDP_API etmdp_status etmdp_env_destroy(etmdp_env_t env);
ETMDP_API etmdp_status etmdp_env_observation_dim(etmdp_env_t env, size_t* out);
ETMDP_API etmdp_status etmdp_env_action_dim(etmdp_env_t env, size_t* out);
ETMDP_API etmdp_status etmdp_env_horizon(etmdp_env_t env, int* out);
ETMDP_API etmdp_status etmdp_env_reset(etmdp_env_t env, uint64_t seed,
                                       double* obs, size_t obs_len);

typedef struct etmdp_step {
  double reward;
  double cost;
  int done;
  int violated;
} etmdp_step;

ETMDP_API etmdp_status etmdp_env_step(etmdp_env_t env, const double* action,
                                      size_t action_len, double* next_obs,
                                      size_t obs_len, etmdp_step* out);

/* H * (r_min - max(r_max, 0)) - 1 */
ETMDP_API etmdp_status etmdp_safe_re_threshold(int horizon, double reward_min,
                                               double reward_max, double* out);
ETMDP_API etmdp_status etmdp_corollary_ratio(int n_states, int n_invalid,
                                             double* out);

/* ---- agents ---------------------------------------------------------- */

/* kind: "td3", "context-td3" or "lagrangian-td3"; overrides use agent.* keys. */
ETMDP_API etmdp_status etmdp_agent_create(const char* kind, size_t obs_dim,
                                          size_t action_dim,
                                          const char* overrides, uint64_t seed,
                                          etmdp_agent_t* out);
ETMDP_API etmdp_status etmdp_agent_destroy(etmdp_agent_t agent);
ETMDP_API etmdp_status etmdp_agent_select_action(etmdp_agent_t agent,
                                                 const double* obs,
                                                 size_t obs_len, int explore,
                                                 double* action,
                                                 size_t action_len);
ETMDP_API etmdp_status etmdp_agent_observe(etmdp_agent_t agent,
                                           const double* obs,
                                           const double* action, double reward,
                                           double cost, const double* next_obs,
                                           int terminal, int truncated);
ETMDP_API etmdp_status etmdp_agent_end_episode(etmdp_agent_t agent,
                                               double episodic_cost);

typedef struct etmdp_train_report {
  double critic1_loss;
  double critic2_loss;
  double actor_loss; /* NaN when the actor was not updated */
  int skipped;
} etmdp_train_report;

ETMDP_API etmdp_status etmdp_agent_train_step(etmdp_agent_t agent,
                                              etmdp_train_report* out);
ETMDP_API etmdp_status etmdp_agent_replay_size(etmdp_agent_t agent,
                                               size_t* out);
ETMDP_API etmdp_status etmdp_agent_lambda(etmdp_agent_t agent, double* out);
/* Writes <stem>.bin and <stem>.txt. */
ETMDP_API etmdp_status etmdp_agent_save(etmdp_agent_t agent, const char* stem);
ETMDP_API etmdp_status etmdp_agent_load(etmdp_agent_t agent, const char* stem);

/* ---- experiments ----------------------------------------------------- */

/* Trains every configured seed; the run directory comes from output.dir. */
ETMDP_API etmdp_status etmdp_run_train(const char* config);
/*
 * Evaluates each seed checkpoint under run_dir. Writes the mean success
 * rate, return and cost across seeds (any output pointer may be NULL).
 */
ETMDP_API etmdp_status etmdp_run_eval(const char* run_dir, int episodes,
                                      double* success_rate,
                                      double* mean_return, double* mean_cost);

typedef struct etmdp_regret_options {
  int n_instances;
  const int* sizes;
  size_t n_sizes;
  double invalid_fraction;
  int n_actions;
  int horizon;
  int episodes; /* 0 = |S||A| + 10 */
  double reward_end;
  uint64_t seed;
  const char* out_dir; /* NULL = no files */
} etmdp_regret_options;

ETMDP_API void etmdp_regret_options_init(etmdp_regret_options* opts);

typedef struct etmdp_regret_summary {
  int n_instances;
  double mean_measured_ratio;
  double analytic_floor;
  int ratio_above_one;
  int within_bound;
  double mean_savings;
} etmdp_regret_summary;

ETMDP_API etmdp_status etmdp_run_regret_bench(const etmdp_regret_options* opts,
                                              etmdp_regret_summary* out);

typedef struct etmdp_visitation_options {
  int level;
  int early_terminated;
  long steps;
  uint64_t seed;
  int resolution;
  const char* out_dir; /* NULL = no files */
} etmdp_visitation_options;

ETMDP_API void etmdp_visitation_options_init(etmdp_visitation_options* opts);
/* outside_fraction is -1 for layouts without an enclosing ring. */
ETMDP_API etmdp_status etmdp_run_visitation(const etmdp_visitation_options* opts,
                                            long* total_steps,
                                            double* outside_fraction);

/* Writes curves.svg under run_dir. */
ETMDP_API etmdp_status etmdp_run_plot(const char* run_dir);

#ifdef __cplusplus
}
#endif

#endif /* ETMDP_ETMDP_H */
