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

#include "etmdp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "etmdp/error.hpp"

namespace etmdp::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& key, const std::string& text) {
  long v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const long v = parse_long(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": value out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) seeds.push_back(parse_u64(key, trim(item)));
  return seeds;
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::string valid_kinds() {
  using agents::AgentKind;
  std::string out;
  for (AgentKind k : {AgentKind::Td3, AgentKind::ContextTd3, AgentKind::LagrangianTd3}) {
    if (!out.empty()) out += ", ";
    out += agents::to_string(k);
  }
  return out;
}

bool is_maze(const std::string& id) { return id == "maze" || id == "counterexample"; }

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_key_values(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_key_values(in, "config");
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{
        "agent.actor_lr",     "agent.batch_size",     "agent.buffer_capacity",
        "agent.context_hidden", "agent.context_len",  "agent.context_lr",
        "agent.critic_lr",    "agent.expl_noise",     "agent.gamma",
        "agent.grad_clip",    "agent.hidden_layers",  "agent.hidden_units",
        "agent.kind",         "agent.lambda_init",    "agent.lambda_lr",
        "agent.noise_clip",   "agent.policy_delay",   "agent.target_noise",
        "agent.tau",          "code.version",         "env.budget",
        "env.id",             "env.init",             "env.level",
        "et.mode",            "et.reward_end",        "output.dir",
        "train.eval_episodes", "train.eval_interval", "train.log_interval",
        "train.seeds",        "train.start_steps",    "train.total_steps",
        "train.warmup",       "train.workers"};
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

RunConfig RunConfig::from_key_values(const KeyValues& kv, std::uint64_t default_seed) {
  const auto& keys = config_keys();
  for (const auto& [k, v] : kv) {
    if (!std::binary_search(keys.begin(), keys.end(), k)) {
      throw ConfigError("unknown configuration key '" + k + "'");
    }
  }
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  cfg.seeds = {default_seed};
  if (auto v = get("env.id")) {
    if (*v != "maze" && *v != "gather" && *v != "counterexample") {
      throw ConfigError("env.id: unknown environment '" + *v +
                        "' (valid: maze, gather, counterexample)");
    }
    cfg.env_id = *v;
  }
  if (auto v = get("env.level")) cfg.level = parse_int("env.level", *v);
  if (auto v = get("env.init")) {
    if (*v == "fixed") {
      cfg.init = envs::InitMode::Fixed;
    } else if (*v == "random") {
      cfg.init = envs::InitMode::RandomUniform;
    } else {
      throw ConfigError("env.init: expected fixed or random, got '" + *v + "'");
    }
  }
  if (auto v = get("env.budget")) cfg.budget = parse_double("env.budget", *v);
  if (auto v = get("et.mode")) {
    if (*v == "none") {
      cfg.et_mode.reset();
    } else if (auto m = parse_et_mode(*v)) {
      cfg.et_mode = *m;
    } else {
      throw ConfigError("et.mode: expected binary, budget, tightened or none, got '" + *v + "'");
    }
  }
  cfg.reward_end = is_maze(cfg.env_id) ? -10.0 : -1.0;
  if (auto v = get("et.reward_end")) cfg.reward_end = parse_double("et.reward_end", *v);
  if (auto v = get("agent.kind")) {
    auto k = agents::parse_agent_kind(*v);
    if (!k) throw ConfigError("agent.kind: unknown kind '" + *v + "' (valid: " + valid_kinds() + ")");
    cfg.agent_kind = *k;
  }

  agents::AgentConfig& a = cfg.agent;
  auto dbl = [&](const char* k, double& out) {
    if (auto v = get(k)) out = parse_double(k, *v);
  };
  auto num = [&](const char* k, int& out) {
    if (auto v = get(k)) out = parse_int(k, *v);
  };
  dbl("agent.gamma", a.gamma);
  dbl("agent.tau", a.tau);
  num("agent.policy_delay", a.policy_delay);
  dbl("agent.expl_noise", a.expl_noise);
  dbl("agent.target_noise", a.target_noise);
  dbl("agent.noise_clip", a.noise_clip);
  num("agent.batch_size", a.batch_size);
  if (auto v = get("agent.buffer_capacity")) {
    a.buffer_capacity = static_cast<std::size_t>(parse_u64("agent.buffer_capacity", *v));
  }
  num("agent.hidden_layers", a.hidden_layers);
  num("agent.hidden_units", a.hidden_units);
  num("agent.context_hidden", a.context_hidden);
  num("agent.context_len", a.context_len);
  dbl("agent.actor_lr", a.actor_lr);
  dbl("agent.critic_lr", a.critic_lr);
  dbl("agent.context_lr", a.context_lr);
  dbl("agent.lambda_init", a.lambda_init);
  dbl("agent.lambda_lr", a.lambda_lr);
  dbl("agent.grad_clip", a.grad_clip);
  a.reward_end = cfg.reward_end;
  a.budget = cfg.budget.value_or(cfg.env_id == "maze" ? 0.0 : 1.0);

  if (auto v = get("train.total_steps")) cfg.total_steps = parse_long("train.total_steps", *v);
  if (auto v = get("train.start_steps")) cfg.start_steps = parse_long("train.start_steps", *v);
  if (auto v = get("train.eval_interval")) {
    cfg.eval_interval = parse_long("train.eval_interval", *v);
  }
  if (auto v = get("train.eval_episodes")) {
    cfg.eval_episodes = parse_int("train.eval_episodes", *v);
  }
  if (auto v = get("train.log_interval")) cfg.log_interval = parse_long("train.log_interval", *v);
  if (auto v = get("train.warmup")) cfg.warmup = *v;
  if (auto v = get("train.seeds")) cfg.seeds = parse_seeds("train.seeds", *v);
  if (auto v = get("train.workers")) cfg.workers = parse_int("train.workers", *v);
  if (auto v = get("output.dir")) cfg.output_dir = *v;
  if (auto v = get("code.version"); v && *v != kCodeVersion) {
    throw ConfigError("code.version: manifest was written by '" + *v + "', this is '" +
                      std::string(kCodeVersion) + "'");
  }
  cfg.validate();
  return cfg;
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  kv["env.id"] = env_id;
  kv["env.level"] = std::to_string(level);
  kv["env.init"] = init == envs::InitMode::Fixed ? "fixed" : "random";
  if (budget) kv["env.budget"] = format_double(*budget);
  kv["et.mode"] = et_mode ? std::string(to_string(*et_mode)) : "none";
  kv["et.reward_end"] = format_double(reward_end);
  kv["agent.kind"] = std::string(agents::to_string(agent_kind));
  kv["agent.gamma"] = format_double(agent.gamma);
  kv["agent.tau"] = format_double(agent.tau);
  kv["agent.policy_delay"] = std::to_string(agent.policy_delay);
  kv["agent.expl_noise"] = format_double(agent.expl_noise);
  kv["agent.target_noise"] = format_double(agent.target_noise);
  kv["agent.noise_clip"] = format_double(agent.noise_clip);
  kv["agent.batch_size"] = std::to_string(agent.batch_size);
  kv["agent.buffer_capacity"] = std::to_string(agent.buffer_capacity);
  kv["agent.hidden_layers"] = std::to_string(agent.hidden_layers);
  kv["agent.hidden_units"] = std::to_string(agent.hidden_units);
  kv["agent.context_hidden"] = std::to_string(agent.context_hidden);
  kv["agent.context_len"] = std::to_string(agent.context_len);
  kv["agent.actor_lr"] = format_double(agent.actor_lr);
  kv["agent.critic_lr"] = format_double(agent.critic_lr);
  kv["agent.context_lr"] = format_double(agent.context_lr);
  kv["agent.lambda_init"] = format_double(agent.lambda_init);
  kv["agent.lambda_lr"] = format_double(agent.lambda_lr);
  kv["agent.grad_clip"] = format_double(agent.grad_clip);
  kv["train.total_steps"] = std::to_string(total_steps);
  kv["train.start_steps"] = std::to_string(start_steps);
  kv["train.eval_interval"] = std::to_string(eval_interval);
  kv["train.eval_episodes"] = std::to_string(eval_episodes);
  kv["train.log_interval"] = std::to_string(log_interval);
  kv["train.warmup"] = warmup;
  kv["train.seeds"] = join_seeds(seeds);
  kv["train.workers"] = std::to_string(workers);
  kv["output.dir"] = output_dir;
  return kv;
}

void RunConfig::validate() const {
  if (env_id != "maze" && env_id != "gather" && env_id != "counterexample") {
    throw ConfigError("env.id: unknown environment '" + env_id + "'");
  }
  if (env_id == "maze" && (level < 1 || level > 4)) {
    throw ConfigError("env.level: maze levels are 1..4, got " + std::to_string(level));
  }
  if (budget && !(*budget >= 0.0)) throw ConfigError("env.budget: must be >= 0");
  if (!std::isfinite(reward_end)) throw ConfigError("et.reward_end: must be finite");
  if (total_steps < 1) throw ConfigError("train.total_steps: must be >= 1");
  if (start_steps < 0) throw ConfigError("train.start_steps: must be >= 0");
  if (eval_interval < 1) throw ConfigError("train.eval_interval: must be >= 1");
  if (eval_episodes < 1) throw ConfigError("train.eval_episodes: must be >= 1");
  if (log_interval < 1) throw ConfigError("train.log_interval: must be >= 1");
  if (warmup != "persistent" && warmup != "uniform") {
    throw ConfigError("train.warmup: expected persistent or uniform, got '" + warmup + "'");
  }
  if (workers < 1) throw ConfigError("train.workers: must be >= 1");
  if (seeds.empty()) throw ConfigError("train.seeds: at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("train.seeds: seeds must be distinct");
  }
  if (output_dir.empty()) throw ConfigError("output.dir: must not be empty");
  agent.validate();
}

std::uint64_t default_seed_from_env() {
  const char* text = std::getenv("ETMDP_SEED");
  if (text == nullptr || *text == '\0') return 0;
  return parse_u64("ETMDP_SEED", text);
}

std::unique_ptr<Environment> make_base_env(const RunConfig& cfg) {
  if (cfg.env_id == "maze") {
    envs::MazeSpec spec = envs::maze_level(cfg.level, cfg.init);
    if (cfg.budget) spec.budget = *cfg.budget;
    return std::make_unique<envs::MazeEnv>(std::move(spec));
  }
  if (cfg.env_id == "counterexample") {
    return envs::counterexample_env(cfg.budget.value_or(1.0));
  }
  if (cfg.env_id == "gather") {
    envs::GatherSpec spec;
    if (cfg.budget) spec.budget = *cfg.budget;
    return std::make_unique<envs::GatherEnv>(spec);
  }
  throw ConfigError("env.id: unknown environment '" + cfg.env_id + "'");
}

std::unique_ptr<Environment> make_env(const RunConfig& cfg) {
  std::unique_ptr<Environment> base = make_base_env(cfg);
  if (!cfg.et_mode) return base;
  return wrap(std::move(base), *cfg.et_mode, cfg.reward_end);
}

}  // namespace etmdp::cli
