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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "etmdp/config.hpp"
#include "etmdp/error.hpp"

namespace {

using namespace etmdp::cli;

std::string config_error(const KeyValues& kv) {
  try {
    RunConfig::from_key_values(kv);
  } catch (const etmdp::ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(KeyValues, ParsesCommentsWhitespaceAndOverrides) {
  const KeyValues kv = parse_key_values(
      "# header\n"
      "env.level = 3   # trailing\n"
      "\n"
      "  agent.kind=td3\n"
      "env.level = 2\n");
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("env.level"), "2");
  EXPECT_EQ(kv.at("agent.kind"), "td3");
}

TEST(KeyValues, MalformedLineNamesSourceAndLine) {
  std::istringstream in("env.level = 1\nnot a pair\n");
  try {
    parse_key_values(in, "run.conf");
    FAIL();
  } catch (const etmdp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.conf:2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_key_values(" = 3\n"), etmdp::ConfigError);
}

TEST(KeyValues, FormatParsesBack) {
  const KeyValues kv{{"a.b", "1"}, {"c.d", "x y"}};
  EXPECT_EQ(format_key_values(kv), "a.b = 1\nc.d = x y\n");
  EXPECT_EQ(parse_key_values(format_key_values(kv)), kv);
}

TEST(RunConfig, DefaultsMatchTheReferenceSetup) {
  const RunConfig cfg = RunConfig::from_key_values({});
  EXPECT_EQ(cfg.env_id, "maze");
  EXPECT_EQ(cfg.level, 1);
  EXPECT_EQ(cfg.init, etmdp::envs::InitMode::Fixed);
  EXPECT_EQ(cfg.et_mode, etmdp::EtMode::Binary);
  EXPECT_EQ(cfg.reward_end, -10.0);
  EXPECT_EQ(cfg.agent_kind, etmdp::agents::AgentKind::ContextTd3);
  EXPECT_EQ(cfg.total_steps, 100000);
  EXPECT_EQ(cfg.start_steps, 5000);
  EXPECT_EQ(cfg.warmup, "persistent");
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0}));
}

TEST(RunConfig, TerminationRewardDefaultDependsOnTheEnvironment) {
  EXPECT_EQ(RunConfig::from_key_values({{"env.id", "gather"}}).reward_end, -1.0);
  EXPECT_EQ(RunConfig::from_key_values({{"env.id", "counterexample"}}).reward_end, -10.0);
  EXPECT_EQ(
      RunConfig::from_key_values({{"env.id", "gather"}, {"et.reward_end", "-3"}}).reward_end,
      -3.0);
}

TEST(RunConfig, RoundTripsThroughKeyValues) {
  const KeyValues kv{{"env.id", "maze"},           {"env.level", "3"},
                     {"env.init", "random"},       {"et.mode", "budget"},
                     {"env.budget", "2"},          {"agent.kind", "lagrangian-td3"},
                     {"agent.hidden_units", "64"}, {"agent.tau", "0.01"},
                     {"train.seeds", "4,5,9"},     {"train.warmup", "uniform"},
                     {"output.dir", "out/x"}};
  const RunConfig a = RunConfig::from_key_values(kv);
  EXPECT_EQ(a.seeds, (std::vector<std::uint64_t>{4, 5, 9}));
  EXPECT_EQ(a.agent.hidden_units, 64);
  const KeyValues out = a.to_key_values();
  EXPECT_EQ(out.count("code.version"), 0u);
  const RunConfig b = RunConfig::from_key_values(out);
  EXPECT_EQ(b.to_key_values(), out);
  for (const auto& [k, v] : out) {
    EXPECT_TRUE(std::binary_search(config_keys().begin(), config_keys().end(), k)) << k;
  }
}

TEST(RunConfig, UnknownKeyIsAnError) {
  EXPECT_NE(config_error({{"agent.hiden_units", "3"}}).find("agent.hiden_units"),
            std::string::npos);
}

TEST(RunConfig, UnknownAgentKindListsTheValidOnes) {
  EXPECT_EQ(config_error({{"agent.kind", "cpo"}}),
            "agent.kind: unknown kind 'cpo' (valid: td3, context-td3, lagrangian-td3)");
}

TEST(RunConfig, BadValuesNameTheirKey) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"env.level", "7"},          {"env.level", "one"},      {"env.init", "sometimes"},
      {"et.mode", "soft"},         {"et.reward_end", "nan"},  {"train.total_steps", "0"},
      {"train.seeds", "1,1"},      {"train.seeds", "-2"},     {"train.warmup", "greedy"},
      {"train.workers", "0"},      {"agent.gamma", "2"},      {"agent.batch_size", "0"},
      {"env.budget", "-1"},        {"env.id", "mujoco"},      {"code.version", "etmdp 0.1"}};
  for (const auto& [k, v] : cases) {
    const std::string msg = config_error({{k, v}});
    EXPECT_NE(msg.find(k), std::string::npos) << k << "=" << v << " gave '" << msg << "'";
  }
}

TEST(RunConfig, DefaultSeedFillsAbsentSeeds) {
  EXPECT_EQ(RunConfig::from_key_values({}, 17).seeds, (std::vector<std::uint64_t>{17}));
  EXPECT_EQ(RunConfig::from_key_values({{"train.seeds", "3"}}, 17).seeds,
            (std::vector<std::uint64_t>{3}));
}

TEST(RunConfig, SeedFromEnvironment) {
  ::setenv("ETMDP_SEED", "23", 1);
  EXPECT_EQ(default_seed_from_env(), 23u);
  ::setenv("ETMDP_SEED", "x1", 1);
  EXPECT_THROW(default_seed_from_env(), etmdp::ConfigError);
  ::unsetenv("ETMDP_SEED");
  EXPECT_EQ(default_seed_from_env(), 0u);
}

TEST(MakeEnv, WrapsPerMode) {
  RunConfig cfg = RunConfig::from_key_values({});
  EXPECT_EQ(make_env(cfg)->observation_dim(), 2);
  EXPECT_EQ(make_base_env(cfg)->observation_dim(), 2);
  cfg = RunConfig::from_key_values({{"et.mode", "budget"}, {"env.budget", "1"}});
  EXPECT_EQ(make_env(cfg)->observation_dim(), 4);
  cfg = RunConfig::from_key_values({{"et.mode", "none"}});
  EXPECT_EQ(make_env(cfg)->name(), make_base_env(cfg)->name());
  cfg = RunConfig::from_key_values({{"env.id", "gather"}, {"env.budget", "3"}});
  EXPECT_NE(make_env(cfg)->name(), make_base_env(cfg)->name());
  EXPECT_EQ(make_base_env(cfg)->spec().budget, 3.0);
}

}  // namespace
