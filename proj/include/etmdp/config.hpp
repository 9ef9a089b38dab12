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

#ifndef ETMDP_CONFIG_HPP
#define ETMDP_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etmdp/agents.hpp"
#include "etmdp/early_termination.hpp"
#include "etmdp/envs.hpp"

namespace etmdp::cli {

inline constexpr const char* kCodeVersion = "etmdp 1.0.0";

using KeyValues = std::map<std::string, std::string>;

// `key = value` lines with dotted keys; `#` comments. Later lines win.
// Throws etmdp::ConfigError with the line number on malformed input.
KeyValues parse_key_values(std::istream& in, const std::string& source = "config");
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& kv);

// Every key RunConfig understands, sorted.
const std::vector<std::string>& config_keys();

struct RunConfig {
  std::string env_id = "maze";  // maze | gather | counterexample
  int level = 1;
  envs::InitMode init = envs::InitMode::Fixed;
  // Base budget override for gather / counterexample.
  std::optional<double> budget;
  // nullopt runs the unwrapped CMDP.
  std::optional<EtMode> et_mode = EtMode::Binary;
  double reward_end = -10.0;
  agents::AgentKind agent_kind = agents::AgentKind::ContextTd3;
  agents::AgentConfig agent;
  long total_steps = 100'000;
  long start_steps = 5'000;
  // Action source before start_steps: "persistent" holds one uniform action
  // per episode with Gaussian jitter of agent.expl_noise, "uniform" draws a
  // fresh uniform action every step.
  std::string warmup = "persistent";
  long eval_interval = 5'000;
  int eval_episodes = 5;
  long log_interval = 1'000;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs/default";
  int workers = 1;

  // Unknown keys, bad values and unresolved ids raise etmdp::ConfigError.
  // `default_seed` fills train.seeds when absent; r_e defaults to -10 on
  // mazes and -1 elsewhere.
  static RunConfig from_key_values(const KeyValues& kv,
                                   std::uint64_t default_seed = 0);
  KeyValues to_key_values() const;
  void validate() const;
};

// Reads ETMDP_SEED, 0 when unset. Throws ConfigError when malformed.
std::uint64_t default_seed_from_env();

std::unique_ptr<Environment> make_base_env(const RunConfig& cfg);
// Base env wrapped per et.mode.
std::unique_ptr<Environment> make_env(const RunConfig& cfg);

}  // namespace etmdp::cli

#endif  // ETMDP_CONFIG_HPP
