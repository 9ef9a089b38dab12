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
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "etmdp/core.hpp"
#include "etmdp/envs.hpp"
#include "etmdp/error.hpp"
#include "scripted_env.hpp"

namespace {

using etmdp::Vec;
using etmdp::envs::MazeEnv;
using etmdp::envs::maze_level;

TEST(CmdpSpec, RejectsBrokenInvariants) {
  etmdp::CmdpSpec spec;
  EXPECT_NO_THROW(spec.validate());
  spec.horizon = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.horizon = 4;
  spec.budget = -1.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.budget = 0.0;
  spec.reward_min = 2.0;
  spec.reward_max = 1.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Rollout, ZeroActionInMazeCollectsOnlyStepPenalty) {
  MazeEnv env(maze_level(1));
  etmdp::ConstantPolicy still({0.0, 0.0});
  const etmdp::Trajectory traj = etmdp::rollout(still, env, 32, 0);
  const etmdp::EpisodeStats stats = etmdp::episodic_stats(traj);
  EXPECT_EQ(stats.length, 32u);
  EXPECT_NEAR(stats.episodic_return, -3.2, 1e-12);
  EXPECT_EQ(stats.episodic_cost, 0.0);
  EXPECT_TRUE(traj.terminal);
  EXPECT_EQ(traj.steps.front().state, (Vec{8.0, 8.0}));
}

TEST(Rollout, ZeroHorizonGivesEmptyTrajectory) {
  testenv::ScriptedEnv env({}, {}, 0);
  etmdp::ConstantPolicy policy({0.0});
  const etmdp::Trajectory traj = etmdp::rollout(policy, env, 0, 3);
  EXPECT_TRUE(traj.empty());
  const etmdp::EpisodeStats stats = etmdp::episodic_stats(traj);
  EXPECT_EQ(stats.episodic_return, 0.0);
  EXPECT_EQ(stats.episodic_cost, 0.0);
  EXPECT_EQ(stats.length, 0u);
}

TEST(Rollout, SeededRunsAreBitIdentical) {
  MazeEnv env(maze_level(2, etmdp::envs::InitMode::RandomUniform));
  etmdp::UniformRandomPolicy p1(2, 99), p2(2, 99);
  const auto a = etmdp::rollout(p1, env, 32, 5);
  const auto b = etmdp::rollout(p2, env, 32, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a.steps[t].state, b.steps[t].state);
    EXPECT_EQ(a.steps[t].action, b.steps[t].action);
    EXPECT_EQ(a.steps[t].reward, b.steps[t].reward);
    EXPECT_EQ(a.steps[t].cost, b.steps[t].cost);
  }
  std::ostringstream ca, cb;
  etmdp::write_trajectory_csv(ca, a);
  etmdp::write_trajectory_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Rollout, MaxStepsAboveHorizonIsRejected) {
  MazeEnv env(maze_level(1));
  etmdp::ConstantPolicy still({0.0, 0.0});
  EXPECT_THROW(etmdp::rollout(still, env, 33, 0), std::invalid_argument);
}

TEST(Rollout, NonFiniteActionNamesTheStep) {
  MazeEnv env(maze_level(1));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  testenv::ScriptPolicy policy({{0.0, 0.0}, {0.1, 0.0}, {0.1, 0.0}, {nan, 0.0}});
  try {
    etmdp::rollout(policy, env, 32, 0);
    FAIL() << "expected etmdp::Error";
  } catch (const etmdp::Error& e) {
    EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
  }
}

TEST(EpisodicStats, SumsRewardsAndCosts) {
  etmdp::Trajectory traj;
  const double rewards[] = {1, 2, 3};
  const double costs[] = {0, 1, 0};
  for (int i = 0; i < 3; ++i) traj.steps.push_back({{0.0}, {0.0}, rewards[i], costs[i]});
  const etmdp::EpisodeStats stats = etmdp::episodic_stats(traj);
  EXPECT_EQ(stats.episodic_return, 6.0);
  EXPECT_EQ(stats.episodic_cost, 1.0);
  EXPECT_EQ(stats.length, 3u);
}

TEST(EpisodicStats, GoalReachedOnLastTwoSteps) {
  // 24 still steps, 7 unit steps east, 1 still step: inside the goal only
  // after steps 31 and 32.
  std::vector<Vec> actions(24, Vec{0.0, 0.0});
  for (int i = 0; i < 7; ++i) actions.push_back({1.0, 0.0});
  actions.push_back({0.0, 0.0});
  testenv::ScriptPolicy policy(actions);
  MazeEnv env(maze_level(1));
  const etmdp::Trajectory traj = etmdp::rollout(policy, env, 32, 0);
  ASSERT_EQ(traj.size(), 32u);

  // Replay independently through the reward rule.
  const auto& maze = env.maze();
  double x = maze.start.x, y = maze.start.y, expected = 0.0;
  int goal_steps = 0;
  for (const Vec& a : actions) {
    x = std::clamp(x + a[0], 0.0, maze.size);
    y = std::clamp(y + a[1], 0.0, maze.size);
    const bool goal =
        std::hypot(x - maze.goal_center.x, y - maze.goal_center.y) <= maze.goal_radius;
    goal_steps += goal ? 1 : 0;
    expected += goal ? 30.0 : -0.1;
  }
  ASSERT_EQ(goal_steps, 2);
  const etmdp::EpisodeStats stats = etmdp::episodic_stats(traj);
  EXPECT_NEAR(expected, 57.0, 1e-9);
  EXPECT_NEAR(stats.episodic_return, expected, 1e-9);
  EXPECT_EQ(stats.episodic_cost, 0.0);
}

TEST(Trajectory, CsvHeaderAndRows) {
  MazeEnv env(maze_level(1));
  etmdp::ConstantPolicy policy({0.5, -0.25});
  const auto traj = etmdp::rollout(policy, env, 3, 0);
  std::ostringstream out;
  etmdp::write_trajectory_csv(out, traj);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,s0,s1,a0,a1,reward,cost");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

// Property: for random policies on every level, cost is non-negative and the
// length never exceeds the horizon.
TEST(RolloutProperty, CostNonNegativeAndLengthBounded) {
  for (int level = 1; level <= 4; ++level) {
    MazeEnv env(maze_level(level, etmdp::envs::InitMode::RandomUniform));
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      etmdp::UniformRandomPolicy policy(2, seed * 31 + level);
      const auto traj = etmdp::rollout(policy, env, env.spec().horizon, seed);
      EXPECT_LE(traj.size(), static_cast<std::size_t>(env.spec().horizon));
      for (const auto& step : traj.steps) {
        EXPECT_GE(step.cost, 0.0);
        EXPECT_GE(step.reward, env.spec().reward_min);
        EXPECT_LE(step.reward, env.spec().reward_max);
      }
    }
  }
}

TEST(MixSeed, DistinctStreams) {
  EXPECT_NE(etmdp::mix_seed(0, 0), etmdp::mix_seed(0, 1));
  EXPECT_NE(etmdp::mix_seed(0, 1), etmdp::mix_seed(1, 1));
  EXPECT_EQ(etmdp::mix_seed(7, 3), etmdp::mix_seed(7, 3));
}

}  // namespace
