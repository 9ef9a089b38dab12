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

#ifndef ETMDP_ANALYSIS_HPP
#define ETMDP_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "etmdp/core.hpp"
#include "etmdp/envs.hpp"

namespace etmdp::analysis {

// Per-cell visit counts over a square arena.
class VisitationHistogram {
 public:
  explicit VisitationHistogram(envs::Box arena, int resolution = 64);

  // States outside the arena land in the nearest border cell and are counted
  // in out_of_range().
  void record(envs::Point p);

  int resolution() const { return resolution_; }
  const envs::Box& arena() const { return arena_; }
  long count(int ix, int iy) const { return counts_[index(ix, iy)]; }
  long total() const { return total_; }
  long out_of_range() const { return out_of_range_; }
  double frequency(int ix, int iy) const;
  long max_count() const;
  envs::Point cell_center(int ix, int iy) const;
  // Fraction of recorded steps in cells whose center satisfies `region`.
  double mass_fraction(const std::function<bool(envs::Point)>& region) const;

  // `ix,iy,count` for every cell.
  void write_csv(std::ostream& out) const;

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution_) +
           static_cast<std::size_t>(ix);
  }

  envs::Box arena_;
  int resolution_;
  std::vector<long> counts_;
  long total_ = 0;
  long out_of_range_ = 0;
};

// Records the first two coordinates of every step's state.
VisitationHistogram record_visitation(const std::vector<Trajectory>& trajectories,
                                      const envs::Box& arena, int resolution = 64);

// Uniform-random agent on a maze for a fixed number of environment steps,
// optionally through the Binary early-termination wrapper. Episodes restart
// whenever they end.
VisitationHistogram random_visitation(const envs::MazeSpec& maze,
                                      bool early_terminated, long steps,
                                      std::uint64_t seed, int resolution = 64);

// Fraction of visitation mass strictly outside `box`.
double mass_outside(const VisitationHistogram& hist, const envs::Box& box);

// Success: the goal is reached at least once with zero episodic cost.
// Episodes are seeded seed, seed + 1, ...
double success_rate(Policy& policy, const envs::MazeSpec& maze,
                    int n_episodes = 10, std::uint64_t seed = 0);

struct CurvePoint {
  long step = 0;
  double episodic_return = 0.0;
  double episodic_cost = 0.0;
};

struct CurveRun {
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
};

// Median and interquartile band on the step grid shared by every run.
struct CurveBundle {
  std::vector<long> steps;
  std::vector<double> return_median, return_q25, return_q75;
  std::vector<double> cost_median, cost_q25, cost_q75;
  std::size_t n_runs = 0;
};

// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Throws std::invalid_argument naming the first run off the shared grid.
CurveBundle aggregate_curves(const std::vector<CurveRun>& runs);

// `step,seed,return,cost`.
void write_curves_csv(std::ostream& out, const std::vector<CurveRun>& runs);
std::vector<CurveRun> read_curves_csv(std::istream& in);

// Two panels (return, cost), one median path and one IQR band each.
std::string render_curves_svg(const CurveBundle& bundle, const std::string& title);
// Grayscale-to-orange ramp over normalized frequency, lava overlaid, legend.
std::string render_heatmap_svg(const VisitationHistogram& hist,
                               const std::vector<envs::Segment>& lava,
                               const std::string& title);

}  // namespace etmdp::analysis

#endif  // ETMDP_ANALYSIS_HPP
