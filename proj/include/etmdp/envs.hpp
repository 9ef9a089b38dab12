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

#ifndef ETMDP_ENVS_HPP
#define ETMDP_ENVS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "etmdp/core.hpp"
#include "etmdp/geometry.hpp"

namespace etmdp::envs {

enum class InitMode { Fixed, RandomUniform };

struct MazeSpec {
  double size = 16.0;
  int episode_len = 32;
  Point start{8.0, 8.0};
  Point goal_center{15.5, 8.0};
  double goal_radius = 0.75;
  double goal_reward = 30.0;
  double step_reward = -0.1;
  // Only used by budget-aware wrappers; the maze itself never terminates on
  // cost.
  double budget = 0.0;
  std::vector<Segment> lava;
  // 1..4 for the canonical levels, 0 for custom layouts.
  int level = 0;
  InitMode init_mode = InitMode::Fixed;
  // Outer boundary of the lava ring enclosing the start, when there is one.
  std::optional<Box> enclosure;

  Box arena() const { return Box{{0.0, 0.0}, {size, size}}; }
  // Throws std::invalid_argument when geometry leaves the arena.
  void validate() const;
};

// Canonical level layouts (1..4), shipped as data files and compiled in.
MazeSpec maze_level(int level, InitMode init = InitMode::Fixed);
// Closed lava rectangle around the start; the goal can only be reached by
// crossing it once.
MazeSpec counterexample_maze(double budget = 1.0);
// Raw text of a built-in layout: "level1".."level4", "counterexample".
const std::string& builtin_layout_text(const std::string& id);

// Point-mass navigation in a square arena with lava segments. A step costs 1
// when its motion segment touches any lava segment.
class MazeEnv : public Environment {
 public:
  explicit MazeEnv(MazeSpec spec);

  const CmdpSpec& spec() const override { return cmdp_; }
  Vec reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override;

  const MazeSpec& maze() const { return maze_; }
  Point position() const { return pos_; }
  int elapsed_steps() const { return t_; }
  bool in_goal(Point p) const;
  bool crosses_lava(Point from, Point to) const;
  // Places the agent directly; the step counter is left untouched.
  void set_position(Point p);

 private:
  MazeSpec maze_;
  CmdpSpec cmdp_;
  Point pos_;
  int t_ = 0;
  double cost_so_far_ = 0.0;
  std::mt19937_64 rng_;
};

std::unique_ptr<Environment> counterexample_env(double budget = 1.0);

struct GatherSpec {
  double half_width = 8.0;
  int n_apples = 8;
  int n_bombs = 8;
  double contact_radius = 0.6;
  double apple_reward = 10.0;
  double bomb_cost = 1.0;
  int horizon = 64;
  double budget = 1.0;
  // Number of nearest apples and bombs reported in the observation.
  int observed = 4;
};

// Point gather: collect apples (+10, removed) while avoiding bombs (cost 1
// per step in contact, bombs persist). Observation is the agent position
// followed by relative vectors to the nearest apples then nearest bombs,
// zero-padded.
class GatherEnv : public Environment {
 public:
  explicit GatherEnv(GatherSpec spec = {});

  const CmdpSpec& spec() const override { return cmdp_; }
  Vec reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override;
  std::string name() const override { return "gather"; }

  const GatherSpec& gather() const { return gather_; }
  Point position() const { return pos_; }
  const std::vector<Point>& apples() const { return apples_; }
  const std::vector<Point>& bombs() const { return bombs_; }
  // Test hook: replace the layout after reset().
  void set_layout(Point agent, std::vector<Point> apples,
                  std::vector<Point> bombs);

 private:
  Vec observe() const;

  GatherSpec gather_;
  CmdpSpec cmdp_;
  Point pos_;
  std::vector<Point> apples_;
  std::vector<Point> bombs_;
  int t_ = 0;
  double cost_so_far_ = 0.0;
};

}  // namespace etmdp::envs

#endif  // ETMDP_ENVS_HPP
