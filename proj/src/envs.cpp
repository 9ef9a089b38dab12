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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "etmdp/envs.hpp"
#include "etmdp/error.hpp"

namespace etmdp::envs {
namespace detail {
const std::map<std::string, std::string>& builtin_layouts();
}  // namespace detail

namespace {

Vec to_vec(Point p) { return {p.x, p.y}; }

Point read_action(std::span<const double> action) {
  if (action.size() != 2) {
    throw std::invalid_argument("maze: expected a 2-D action, got " +
                                std::to_string(action.size()) + " components");
  }
  if (!std::isfinite(action[0]) || !std::isfinite(action[1])) {
    throw std::invalid_argument("maze: non-finite action");
  }
  return {std::clamp(action[0], -1.0, 1.0), std::clamp(action[1], -1.0, 1.0)};
}

}  // namespace

void MazeSpec::validate() const {
  if (!(size > 0.0)) throw std::invalid_argument("MazeSpec: size must be positive");
  if (episode_len < 1) throw std::invalid_argument("MazeSpec: episode_len must be >= 1");
  const Box box = arena();
  if (!box.contains(start) || !box.contains(goal_center)) {
    throw std::invalid_argument("MazeSpec: start and goal must lie inside the arena");
  }
  for (const Segment& s : lava) {
    if (!box.contains(s.a) || !box.contains(s.b)) {
      throw std::invalid_argument("MazeSpec: lava segment leaves the arena");
    }
  }
}

const std::string& builtin_layout_text(const std::string& id) {
  const auto& layouts = detail::builtin_layouts();
  auto it = layouts.find(id);
  if (it == layouts.end()) throw std::invalid_argument("unknown maze layout: " + id);
  return it->second;
}

namespace {

std::vector<Segment> builtin_lava(const std::string& id, const Box& arena) {
  std::istringstream in(builtin_layout_text(id));
  return parse_layout(in, arena, id);
}

}  // namespace

MazeSpec maze_level(int level, InitMode init) {
  if (level < 1 || level > 4) {
    throw std::invalid_argument("maze level must be 1..4, got " + std::to_string(level));
  }
  MazeSpec spec;
  spec.level = level;
  spec.init_mode = init;
  spec.lava = builtin_lava("level" + std::to_string(level), spec.arena());
  if (level == 2 || level == 3) spec.enclosure = Box{{5.0, 5.0}, {11.0, 11.0}};
  if (level == 4) spec.enclosure = Box{{3.5, 3.5}, {12.5, 12.5}};
  return spec;
}

MazeSpec counterexample_maze(double budget) {
  MazeSpec spec;
  spec.budget = budget;
  spec.lava = builtin_lava("counterexample", spec.arena());
  spec.enclosure = Box{{5.5, 5.5}, {10.5, 10.5}};
  return spec;
}

MazeEnv::MazeEnv(MazeSpec spec) : maze_(std::move(spec)) {
  maze_.validate();
  cmdp_.state_dim = 2;
  cmdp_.action_dim = 2;
  cmdp_.horizon = maze_.episode_len;
  cmdp_.budget = maze_.budget;
  cmdp_.reward_min = std::min(maze_.step_reward, maze_.goal_reward);
  cmdp_.reward_max = std::max(maze_.step_reward, maze_.goal_reward);
  cmdp_.deterministic = maze_.init_mode == InitMode::Fixed;
  pos_ = maze_.start;
}

Vec MazeEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  t_ = 0;
  cost_so_far_ = 0.0;
  if (maze_.init_mode == InitMode::Fixed) {
    pos_ = maze_.start;
  } else {
    std::uniform_real_distribution<double> coord(0.0, maze_.size);
    do {
      pos_ = {coord(rng_), coord(rng_)};
    } while (in_goal(pos_));
  }
  return to_vec(pos_);
}

bool MazeEnv::in_goal(Point p) const {
  return distance(p, maze_.goal_center) <= maze_.goal_radius;
}

bool MazeEnv::crosses_lava(Point from, Point to) const {
  const Segment motion{from, to};
  return std::any_of(maze_.lava.begin(), maze_.lava.end(),
                     [&](const Segment& s) { return segments_intersect(motion, s); });
}

void MazeEnv::set_position(Point p) {
  if (!maze_.arena().contains(p)) throw std::invalid_argument("maze: position outside arena");
  pos_ = p;
}

StepResult MazeEnv::step(std::span<const double> action) {
  if (t_ >= maze_.episode_len) throw Error("maze: step after the episode ended");
  const Point a = read_action(action);
  const Point next{std::clamp(pos_.x + a.x, 0.0, maze_.size),
                   std::clamp(pos_.y + a.y, 0.0, maze_.size)};
  StepResult res;
  res.cost = crosses_lava(pos_, next) ? 1.0 : 0.0;
  res.reward = in_goal(next) ? maze_.goal_reward : maze_.step_reward;
  const bool was_within = cost_so_far_ <= maze_.budget;
  cost_so_far_ += res.cost;
  res.violated = was_within && cost_so_far_ > maze_.budget;
  ++t_;
  res.done = t_ >= maze_.episode_len;
  pos_ = next;
  res.next_state = to_vec(pos_);
  return res;
}

std::unique_ptr<Environment> MazeEnv::clone() const {
  return std::make_unique<MazeEnv>(*this);
}

std::string MazeEnv::name() const {
  std::string base = maze_.level > 0 ? "maze-l" + std::to_string(maze_.level) : "maze";
  return maze_.init_mode == InitMode::Fixed ? base : base + "-random-init";
}

std::unique_ptr<Environment> counterexample_env(double budget) {
  return std::make_unique<MazeEnv>(counterexample_maze(budget));
}

// ---------------------------------------------------------------------------

GatherEnv::GatherEnv(GatherSpec spec) : gather_(spec) {
  if (gather_.n_apples < 0 || gather_.n_bombs < 0 || gather_.observed < 0 ||
      !(gather_.half_width > 0.0) || !(gather_.contact_radius > 0.0) ||
      gather_.horizon < 1) {
    throw std::invalid_argument("GatherSpec: invalid geometry");
  }
  cmdp_.state_dim = 2 + 4 * gather_.observed;
  cmdp_.action_dim = 2;
  cmdp_.horizon = gather_.horizon;
  cmdp_.budget = gather_.budget;
  cmdp_.reward_min = 0.0;
  cmdp_.reward_max = gather_.apple_reward;
  cmdp_.deterministic = true;
}

Vec GatherEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double margin = gather_.contact_radius;
  std::uniform_real_distribution<double> coord(-gather_.half_width + margin,
                                               gather_.half_width - margin);
  const double min_sep = 2.0 * gather_.contact_radius;
  pos_ = {0.0, 0.0};
  apples_.clear();
  bombs_.clear();
  std::vector<Point> placed{pos_};
  auto spawn = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Point p{coord(rng), coord(rng)};
      bool clear = std::all_of(placed.begin(), placed.end(),
                               [&](Point q) { return distance(p, q) > min_sep; });
      if (clear) {
        placed.push_back(p);
        return p;
      }
    }
    throw Error("gather: could not place objects disjointly");
  };
  for (int i = 0; i < gather_.n_apples; ++i) apples_.push_back(spawn());
  for (int i = 0; i < gather_.n_bombs; ++i) bombs_.push_back(spawn());
  t_ = 0;
  cost_so_far_ = 0.0;
  return observe();
}

void GatherEnv::set_layout(Point agent, std::vector<Point> apples,
                           std::vector<Point> bombs) {
  pos_ = agent;
  apples_ = std::move(apples);
  bombs_ = std::move(bombs);
}

Vec GatherEnv::observe() const {
  Vec obs{pos_.x, pos_.y};
  auto nearest = [&](std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [&](Point a, Point b) {
      return distance(a, pos_) < distance(b, pos_);
    });
    for (int i = 0; i < gather_.observed; ++i) {
      if (i < static_cast<int>(pts.size())) {
        obs.push_back(pts[i].x - pos_.x);
        obs.push_back(pts[i].y - pos_.y);
      } else {
        obs.push_back(0.0);
        obs.push_back(0.0);
      }
    }
  };
  nearest(apples_);
  nearest(bombs_);
  return obs;
}

StepResult GatherEnv::step(std::span<const double> action) {
  if (t_ >= gather_.horizon) throw Error("gather: step after the episode ended");
  const Point a = read_action(action);
  const double hw = gather_.half_width;
  pos_ = {std::clamp(pos_.x + a.x, -hw, hw), std::clamp(pos_.y + a.y, -hw, hw)};

  StepResult res;
  const auto before = apples_.size();
  std::erase_if(apples_, [&](Point p) { return distance(p, pos_) <= gather_.contact_radius; });
  res.reward = gather_.apple_reward * static_cast<double>(before - apples_.size());
  const bool touching = std::any_of(bombs_.begin(), bombs_.end(), [&](Point p) {
    return distance(p, pos_) <= gather_.contact_radius;
  });
  res.cost = touching ? gather_.bomb_cost : 0.0;
  const bool was_within = cost_so_far_ <= gather_.budget;
  cost_so_far_ += res.cost;
  res.violated = was_within && cost_so_far_ > gather_.budget;
  ++t_;
  res.done = t_ >= gather_.horizon;
  res.next_state = observe();
  return res;
}

std::unique_ptr<Environment> GatherEnv::clone() const {
  return std::make_unique<GatherEnv>(*this);
}

}  // namespace etmdp::envs
