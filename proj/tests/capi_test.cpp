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

// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "etmdp/etmdp.h"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("etmdp_capi_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(etmdp_status_name(ETMDP_OK), "ok");
  EXPECT_STREQ(etmdp_status_name(ETMDP_ERR_CONFIG), "configuration error");
  EXPECT_STREQ(etmdp_status_name(static_cast<etmdp_status>(99)), "unknown status");
  EXPECT_EQ(std::string(etmdp_version()).rfind("etmdp ", 0), 0u);
  const std::string keys = etmdp_config_keys();
  EXPECT_NE(keys.find("agent.kind\n"), std::string::npos);
  EXPECT_NE(keys.find("et.reward_end\n"), std::string::npos);
}

TEST(CApi, NullHandlesAreReported) {
  size_t dim = 0;
  EXPECT_EQ(etmdp_env_observation_dim(nullptr, &dim), ETMDP_ERR_NULL_POINTER);
  EXPECT_NE(std::string(etmdp_last_error()).find("null"), std::string::npos);
  EXPECT_EQ(etmdp_env_create("", nullptr), ETMDP_ERR_NULL_POINTER);
  EXPECT_EQ(etmdp_env_destroy(nullptr), ETMDP_OK);
  EXPECT_EQ(etmdp_agent_destroy(nullptr), ETMDP_OK);
}

TEST(CApi, ConfigErrorsCarryAMessage) {
  etmdp_env_t env = nullptr;
  EXPECT_EQ(etmdp_env_create("env.level = 9", &env), ETMDP_ERR_CONFIG);
  EXPECT_NE(std::string(etmdp_last_error()).find("env.level"), std::string::npos);
  EXPECT_EQ(env, nullptr);
  EXPECT_EQ(etmdp_env_create("agent.kind = td3", &env), ETMDP_ERR_CONFIG);
  etmdp_agent_t agent = nullptr;
  EXPECT_EQ(etmdp_agent_create("cpo", 2, 2, nullptr, 0, &agent), ETMDP_ERR_CONFIG);
  EXPECT_NE(std::string(etmdp_last_error()).find("cpo"), std::string::npos);
  EXPECT_EQ(etmdp_agent_create("td3", 0, 2, nullptr, 0, &agent), ETMDP_ERR_INVALID_ARGUMENT);
}

TEST(CApi, MazeStepsAndTerminatesOnLava) {
  etmdp_env_t env = nullptr;
  ASSERT_EQ(etmdp_env_create("env.id = maze\nenv.level = 1\net.mode = binary\n", &env),
            ETMDP_OK);
  size_t odim = 0, adim = 0;
  int horizon = 0;
  ASSERT_EQ(etmdp_env_observation_dim(env, &odim), ETMDP_OK);
  ASSERT_EQ(etmdp_env_action_dim(env, &adim), ETMDP_OK);
  ASSERT_EQ(etmdp_env_horizon(env, &horizon), ETMDP_OK);
  EXPECT_EQ(odim, 2u);
  EXPECT_EQ(adim, 2u);
  EXPECT_EQ(horizon, 32);

  double obs[2];
  double small[1];
  EXPECT_EQ(etmdp_env_reset(env, 0, small, 1), ETMDP_ERR_BUFFER_TOO_SMALL);
  ASSERT_EQ(etmdp_env_reset(env, 0, obs, 2), ETMDP_OK);
  EXPECT_EQ(obs[0], 8.0);
  EXPECT_EQ(obs[1], 8.0);

  const double east[2] = {1.0, 0.0}, south[2] = {0.0, -1.0};
  etmdp_step st{};
  EXPECT_EQ(etmdp_env_step(env, east, 1, obs, 2, &st), ETMDP_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(etmdp_env_step(env, east, 2, obs, 2, &st), ETMDP_OK);
  EXPECT_EQ(obs[0], 9.0);
  EXPECT_DOUBLE_EQ(st.reward, -0.1);
  EXPECT_EQ(st.done, 0);
  for (int i = 0; i < 3; ++i) ASSERT_EQ(etmdp_env_step(env, east, 2, obs, 2, &st), ETMDP_OK);
  int steps = 0;
  while (!st.done && steps < 10) {
    ASSERT_EQ(etmdp_env_step(env, south, 2, obs, 2, &st), ETMDP_OK);
    ++steps;
  }
  EXPECT_EQ(st.violated, 1);
  EXPECT_EQ(st.done, 1);
  EXPECT_EQ(st.reward, -10.0);
  EXPECT_EQ(obs[0], 0.0);
  EXPECT_EQ(obs[1], 0.0);
  const double nan_action[2] = {NAN, 0.0};
  ASSERT_EQ(etmdp_env_reset(env, 1, obs, 2), ETMDP_OK);
  EXPECT_NE(etmdp_env_step(env, nan_action, 2, obs, 2, &st), ETMDP_OK);
  etmdp_env_destroy(env);
}

TEST(CApi, BudgetModeAppendsTwoFeatures) {
  etmdp_env_t env = nullptr;
  ASSERT_EQ(etmdp_env_create("env.id = gather\net.mode = budget\nenv.budget = 2", &env),
            ETMDP_OK);
  etmdp_env_t plain = nullptr;
  ASSERT_EQ(etmdp_env_create("env.id = gather\net.mode = none", &plain), ETMDP_OK);
  size_t a = 0, b = 0;
  etmdp_env_observation_dim(env, &a);
  etmdp_env_observation_dim(plain, &b);
  EXPECT_EQ(a, b + 2);
  std::vector<double> obs(a);
  ASSERT_EQ(etmdp_env_reset(env, 3, obs.data(), obs.size()), ETMDP_OK);
  EXPECT_EQ(obs[a - 2], 1.0);
  EXPECT_EQ(obs[a - 1], 1.0);
  etmdp_env_destroy(env);
  etmdp_env_destroy(plain);
}

TEST(CApi, Thresholds) {
  double v = 0.0;
  ASSERT_EQ(etmdp_safe_re_threshold(32, -0.1, 30.0, &v), ETMDP_OK);
  EXPECT_NEAR(v, -964.2, 1e-9);
  EXPECT_EQ(etmdp_safe_re_threshold(32, 1.0, 0.0, &v), ETMDP_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(etmdp_corollary_ratio(16, 8, &v), ETMDP_OK);
  EXPECT_NEAR(v, 16.0 / 9.0, 1e-15);
  EXPECT_EQ(etmdp_corollary_ratio(5, 5, &v), ETMDP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(etmdp_corollary_ratio(5, 1, nullptr), ETMDP_ERR_NULL_POINTER);
}

TEST(CApi, AgentLifecycle) {
  etmdp_agent_t agent = nullptr;
  ASSERT_EQ(etmdp_agent_create("context-td3", 2, 2,
                               "agent.hidden_units = 16\nagent.batch_size = 4\n"
                               "agent.context_hidden = 4\net.reward_end = -5",
                               7, &agent),
            ETMDP_OK);
  double obs[2] = {8.0, 8.0}, next[2] = {9.0, 8.0}, act[2];
  EXPECT_EQ(etmdp_agent_select_action(agent, obs, 2, 1, act, 1), ETMDP_ERR_BUFFER_TOO_SMALL);
  ASSERT_EQ(etmdp_agent_select_action(agent, obs, 2, 1, act, 2), ETMDP_OK);
  EXPECT_LE(std::abs(act[0]), 1.0);
  etmdp_train_report rep{};
  EXPECT_NE(etmdp_agent_train_step(agent, &rep), ETMDP_OK);  // empty buffer
  for (int i = 0; i < 6; ++i) {
    ASSERT_EQ(etmdp_agent_observe(agent, obs, act, -0.1, 0.0, next, 0, 0), ETMDP_OK);
    obs[0] = next[0];
    next[0] += 0.5;
  }
  ASSERT_EQ(etmdp_agent_observe(agent, obs, act, -0.1, 1.0, next, 1, 0), ETMDP_OK);
  ASSERT_EQ(etmdp_agent_end_episode(agent, 1.0), ETMDP_OK);
  size_t n = 0;
  ASSERT_EQ(etmdp_agent_replay_size(agent, &n), ETMDP_OK);
  EXPECT_EQ(n, 7u);
  ASSERT_EQ(etmdp_agent_train_step(agent, &rep), ETMDP_OK);
  EXPECT_TRUE(std::isfinite(rep.critic1_loss));
  EXPECT_TRUE(std::isnan(rep.actor_loss));
  ASSERT_EQ(etmdp_agent_train_step(agent, &rep), ETMDP_OK);
  EXPECT_TRUE(std::isfinite(rep.actor_loss));

  const fs::path dir = fresh_dir("agent");
  fs::create_directories(dir);
  const std::string stem = (dir / "ckpt").string();
  ASSERT_EQ(etmdp_agent_save(agent, stem.c_str()), ETMDP_OK);
  etmdp_agent_t other = nullptr;
  ASSERT_EQ(etmdp_agent_create("context-td3", 2, 2,
                               "agent.hidden_units = 16\nagent.context_hidden = 4", 99, &other),
            ETMDP_OK);
  ASSERT_EQ(etmdp_agent_load(other, stem.c_str()), ETMDP_OK);
  double a1[2], a2[2];
  etmdp_agent_select_action(agent, obs, 2, 0, a1, 2);
  etmdp_agent_select_action(other, obs, 2, 0, a2, 2);
  EXPECT_EQ(a1[0], a2[0]);
  EXPECT_EQ(a1[1], a2[1]);
  EXPECT_EQ(etmdp_agent_load(other, (dir / "missing").string().c_str()), ETMDP_ERR_IO);
  etmdp_agent_destroy(agent);
  etmdp_agent_destroy(other);
}

TEST(CApi, LagrangianMultiplierMoves) {
  etmdp_agent_t agent = nullptr;
  ASSERT_EQ(etmdp_agent_create("lagrangian-td3", 1, 1,
                               "agent.hidden_units = 8\nagent.lambda_lr = 0.5", 0, &agent),
            ETMDP_OK);
  double lambda = -1.0;
  ASSERT_EQ(etmdp_agent_lambda(agent, &lambda), ETMDP_OK);
  const double before = lambda;
  etmdp_agent_end_episode(agent, 2.0);
  etmdp_agent_lambda(agent, &lambda);
  EXPECT_GT(lambda, before);
  etmdp_agent_destroy(agent);
}

TEST(CApi, RegretBench) {
  etmdp_regret_options opts;
  etmdp_regret_options_init(&opts);
  EXPECT_EQ(opts.n_instances, 50);
  const int sizes[] = {8};
  opts.n_instances = 4;
  opts.sizes = sizes;
  opts.n_sizes = 1;
  opts.horizon = 5;
  opts.seed = 3;
  etmdp_regret_summary s{};
  ASSERT_EQ(etmdp_run_regret_bench(&opts, &s), ETMDP_OK) << etmdp_last_error();
  EXPECT_EQ(s.n_instances, 4);
  EXPECT_EQ(s.within_bound, 4);
  EXPECT_NEAR(s.analytic_floor, 8.0 / 5.0, 1e-12);
  opts.sizes = nullptr;
  EXPECT_EQ(etmdp_run_regret_bench(&opts, &s), ETMDP_ERR_NULL_POINTER);
}

TEST(CApi, Visitation) {
  etmdp_visitation_options opts;
  etmdp_visitation_options_init(&opts);
  EXPECT_EQ(opts.level, 4);
  EXPECT_EQ(opts.steps, 50000);
  opts.steps = 4000;
  const fs::path dir = fresh_dir("visit");
  const std::string d = dir.string();
  opts.out_dir = d.c_str();
  long total = 0;
  double outside = -2.0;
  ASSERT_EQ(etmdp_run_visitation(&opts, &total, &outside), ETMDP_OK) << etmdp_last_error();
  EXPECT_EQ(total, 4000);
  EXPECT_EQ(outside, 0.0);
  EXPECT_FALSE(fs::is_empty(dir));
  opts.level = 0;
  EXPECT_NE(etmdp_run_visitation(&opts, &total, &outside), ETMDP_OK);
}

TEST(CApi, TrainEvalPlot) {
  const fs::path dir = fresh_dir("train");
  const std::string config =
      "agent.kind = td3\nagent.hidden_units = 8\nagent.hidden_layers = 1\n"
      "agent.batch_size = 8\ntrain.total_steps = 200\ntrain.start_steps = 64\n"
      "train.eval_interval = 100\ntrain.eval_episodes = 1\ntrain.seeds = 1,2\n"
      "output.dir = " + dir.string() + "\n";
  ASSERT_EQ(etmdp_run_train(config.c_str()), ETMDP_OK) << etmdp_last_error();
  double success = -1.0, ret = 0.0, cost = -1.0;
  ASSERT_EQ(etmdp_run_eval(dir.string().c_str(), 1, &success, &ret, &cost), ETMDP_OK)
      << etmdp_last_error();
  EXPECT_GE(success, 0.0);
  EXPECT_LE(success, 1.0);
  EXPECT_GE(cost, 0.0);
  ASSERT_EQ(etmdp_run_plot(dir.string().c_str()), ETMDP_OK) << etmdp_last_error();
  EXPECT_TRUE(fs::exists(dir / "curves.svg"));
  EXPECT_EQ(etmdp_run_eval((dir / "nope").string().c_str(), 1, nullptr, nullptr, nullptr),
            ETMDP_ERR_IO);
  EXPECT_EQ(etmdp_run_train("train.total_steps = -4"), ETMDP_ERR_CONFIG);
}

}  // namespace
