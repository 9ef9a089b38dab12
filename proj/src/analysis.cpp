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

#include "etmdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "etmdp/early_termination.hpp"
#include "etmdp/error.hpp"

namespace etmdp::analysis {

using envs::Box;
using envs::Point;

VisitationHistogram::VisitationHistogram(Box arena, int resolution)
    : arena_(arena), resolution_(resolution) {
  if (resolution < 1) throw std::invalid_argument("histogram resolution must be >= 1");
  if (!(arena.hi.x > arena.lo.x && arena.hi.y > arena.lo.y)) {
    throw std::invalid_argument("histogram arena must have positive extent");
  }
  counts_.assign(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution), 0);
}

void VisitationHistogram::record(Point p) {
  if (!arena_.contains(p)) ++out_of_range_;
  auto cell = [&](double v, double lo, double hi) {
    const double u = (v - lo) / (hi - lo) * resolution_;
    return std::clamp(static_cast<int>(std::floor(u)), 0, resolution_ - 1);
  };
  ++counts_[index(cell(p.x, arena_.lo.x, arena_.hi.x), cell(p.y, arena_.lo.y, arena_.hi.y))];
  ++total_;
}

double VisitationHistogram::frequency(int ix, int iy) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(ix, iy)) / static_cast<double>(total_);
}

long VisitationHistogram::max_count() const {
  return *std::max_element(counts_.begin(), counts_.end());
}

Point VisitationHistogram::cell_center(int ix, int iy) const {
  const double wx = (arena_.hi.x - arena_.lo.x) / resolution_;
  const double wy = (arena_.hi.y - arena_.lo.y) / resolution_;
  return {arena_.lo.x + (ix + 0.5) * wx, arena_.lo.y + (iy + 0.5) * wy};
}

double VisitationHistogram::mass_fraction(const std::function<bool(Point)>& region) const {
  if (total_ == 0) return 0.0;
  long inside = 0;
  for (int iy = 0; iy < resolution_; ++iy) {
    for (int ix = 0; ix < resolution_; ++ix) {
      if (region(cell_center(ix, iy))) inside += count(ix, iy);
    }
  }
  return static_cast<double>(inside) / static_cast<double>(total_);
}

void VisitationHistogram::write_csv(std::ostream& out) const {
  out << "ix,iy,count\n";
  for (int iy = 0; iy < resolution_; ++iy) {
    for (int ix = 0; ix < resolution_; ++ix) out << ix << ',' << iy << ',' << count(ix, iy) << '\n';
  }
}

VisitationHistogram record_visitation(const std::vector<Trajectory>& trajectories,
                                      const Box& arena, int resolution) {
  VisitationHistogram hist(arena, resolution);
  for (const Trajectory& traj : trajectories) {
    for (const Transition& step : traj.steps) {
      if (step.state.size() < 2) throw std::invalid_argument("visitation needs 2-D positions");
      hist.record({step.state[0], step.state[1]});
    }
  }
  return hist;
}

VisitationHistogram random_visitation(const envs::MazeSpec& maze, bool early_terminated,
                                      long steps, std::uint64_t seed, int resolution) {
  if (steps < 0) throw std::invalid_argument("random_visitation: negative step count");
  std::unique_ptr<Environment> env = std::make_unique<envs::MazeEnv>(maze);
  if (early_terminated) env = wrap(std::move(env), EtMode::Binary, 0.0);
  UniformRandomPolicy policy(env->spec().action_dim, seed);
  VisitationHistogram hist(maze.arena(), resolution);
  std::uint64_t episode = 0;
  Vec obs = env->reset(mix_seed(seed, episode));
  for (long n = 0; n < steps; ++n) {
    hist.record({obs[0], obs[1]});
    StepResult res = env->step(policy.act(obs));
    if (res.done) {
      obs = env->reset(mix_seed(seed, ++episode));
    } else {
      obs = std::move(res.next_state);
    }
  }
  return hist;
}

double mass_outside(const VisitationHistogram& hist, const Box& box) {
  return hist.mass_fraction([&](Point p) { return !box.contains(p); });
}

double success_rate(Policy& policy, const envs::MazeSpec& maze, int n_episodes,
                    std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("success_rate: need at least one episode");
  envs::MazeEnv env(maze);
  int successes = 0;
  for (int k = 0; k < n_episodes; ++k) {
    Trajectory traj = rollout(policy, env, env.spec().horizon, seed + static_cast<std::uint64_t>(k));
    bool reached = false;
    double cost = 0.0;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      const Vec& next = i + 1 < traj.steps.size() ? traj.steps[i + 1].state : traj.final_state;
      reached = reached || env.in_goal({next[0], next[1]});
      cost += traj.steps[i].cost;
    }
    if (reached && cost == 0.0) ++successes;
  }
  return static_cast<double>(successes) / n_episodes;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CurveBundle aggregate_curves(const std::vector<CurveRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_curves: no runs");
  CurveBundle out;
  out.n_runs = runs.size();
  for (const CurvePoint& p : runs.front().points) out.steps.push_back(p.step);
  for (const CurveRun& run : runs) {
    bool same = run.points.size() == out.steps.size();
    for (std::size_t i = 0; same && i < run.points.size(); ++i) {
      same = run.points[i].step == out.steps[i];
    }
    if (!same) {
      throw std::invalid_argument("aggregate_curves: run with seed " + std::to_string(run.seed) +
                                  " does not share the step grid of seed " +
                                  std::to_string(runs.front().seed));
    }
  }
  std::vector<double> ret(runs.size()), cost(runs.size());
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      ret[r] = runs[r].points[i].episodic_return;
      cost[r] = runs[r].points[i].episodic_cost;
    }
    out.return_median.push_back(quantile(ret, 0.5));
    out.return_q25.push_back(quantile(ret, 0.25));
    out.return_q75.push_back(quantile(ret, 0.75));
    out.cost_median.push_back(quantile(cost, 0.5));
    out.cost_q25.push_back(quantile(cost, 0.25));
    out.cost_q75.push_back(quantile(cost, 0.75));
  }
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveRun>& runs) {
  out << "step,seed,return,cost\n";
  out.precision(17);
  for (const CurveRun& run : runs) {
    for (const CurvePoint& p : run.points) {
      out << p.step << ',' << run.seed << ',' << p.episodic_return << ',' << p.episodic_cost
          << '\n';
    }
  }
}

std::vector<CurveRun> read_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,seed,return,cost") {
    throw IoError("curves csv: expected header step,seed,return,cost");
  }
  std::vector<CurveRun> runs;
  std::map<std::uint64_t, std::size_t> slot;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    CurvePoint p;
    std::uint64_t seed = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> p.step >> c1 >> seed >> c2 >> p.episodic_return >> c3 >> p.episodic_cost) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw IoError("curves csv: malformed line " + std::to_string(line_no));
    }
    auto [it, fresh] = slot.try_emplace(seed, runs.size());
    if (fresh) runs.push_back({seed, {}});
    runs[it->second].points.push_back(p);
  }
  return runs;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Panel {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return x0 + (xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5) * w; }
  double py(double y) const {
    return y0 + h - (ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5) * h;
  }
};

void draw_panel(std::ostream& svg, const Panel& p, const std::vector<long>& steps,
                const std::vector<double>& median, const std::vector<double>& lo,
                const std::vector<double>& hi, const std::string& name, const char* color) {
  svg << "<g class=\"panel\">\n";
  svg << "<rect x=\"" << num(p.x0) << "\" y=\"" << num(p.y0) << "\" width=\"" << num(p.w)
      << "\" height=\"" << num(p.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg << "<text x=\"" << num(p.x0 + p.w / 2) << "\" y=\"" << num(p.y0 - 8)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(name) << "</text>\n";
  svg << "<text x=\"" << num(p.x0 - 6) << "\" y=\"" << num(p.y0 + 4)
      << "\" text-anchor=\"end\" font-size=\"10\">" << label(p.ymax) << "</text>\n";
  svg << "<text x=\"" << num(p.x0 - 6) << "\" y=\"" << num(p.y0 + p.h)
      << "\" text-anchor=\"end\" font-size=\"10\">" << label(p.ymin) << "</text>\n";
  svg << "<text x=\"" << num(p.x0) << "\" y=\"" << num(p.y0 + p.h + 14)
      << "\" font-size=\"10\">" << label(p.xmin) << "</text>\n";
  svg << "<text x=\"" << num(p.x0 + p.w) << "\" y=\"" << num(p.y0 + p.h + 14)
      << "\" text-anchor=\"end\" font-size=\"10\">" << label(p.xmax) << "</text>\n";
  if (!steps.empty()) {
    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.25\" points=\"";
    for (std::size_t i = 0; i < steps.size(); ++i) {
      svg << num(p.px(static_cast<double>(steps[i]))) << ',' << num(p.py(hi[i])) << ' ';
    }
    for (std::size_t i = steps.size(); i-- > 0;) {
      svg << num(p.px(static_cast<double>(steps[i]))) << ',' << num(p.py(lo[i]))
          << (i > 0 ? " " : "");
    }
    svg << "\"/>\n";
    svg << "<path class=\"median\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < steps.size(); ++i) {
      svg << (i == 0 ? "M" : " L") << num(p.px(static_cast<double>(steps[i]))) << ' '
          << num(p.py(median[i]));
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n";
}

Panel make_panel(double x0, const std::vector<long>& steps, const std::vector<double>& lo,
                 const std::vector<double>& hi) {
  Panel p{x0, 50.0, 330.0, 250.0, 0.0, 1.0, 0.0, 1.0};
  if (!steps.empty()) {
    p.xmin = static_cast<double>(steps.front());
    p.xmax = static_cast<double>(steps.back());
    p.ymin = *std::min_element(lo.begin(), lo.end());
    p.ymax = *std::max_element(hi.begin(), hi.end());
    if (p.ymax == p.ymin) {
      p.ymin -= 1.0;
      p.ymax += 1.0;
    }
  }
  return p;
}

}  // namespace

std::string render_curves_svg(const CurveBundle& b, const std::string& title) {
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"340\" "
         "viewBox=\"0 0 820 340\">\n"
      << "<rect width=\"820\" height=\"340\" fill=\"white\"/>\n"
      << "<text x=\"410\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << " (n=" << b.n_runs << ")</text>\n";
  draw_panel(svg, make_panel(60.0, b.steps, b.return_q25, b.return_q75), b.steps,
             b.return_median, b.return_q25, b.return_q75, "episodic return", "#1f77b4");
  draw_panel(svg, make_panel(470.0, b.steps, b.cost_q25, b.cost_q75), b.steps, b.cost_median,
             b.cost_q25, b.cost_q75, "episodic cost", "#d62728");
  svg << "<text x=\"410\" y=\"330\" text-anchor=\"middle\" font-size=\"11\">environment steps"
         "</text>\n</svg>\n";
  return svg.str();
}

std::string render_heatmap_svg(const VisitationHistogram& hist,
                               const std::vector<envs::Segment>& lava,
                               const std::string& title) {
  const int n = hist.resolution();
  const double side = 512.0;
  const double cell = side / n;
  const double ox = 20.0, oy = 40.0;
  const Box& arena = hist.arena();
  auto sx = [&](double x) { return ox + (x - arena.lo.x) / (arena.hi.x - arena.lo.x) * side; };
  auto sy = [&](double y) { return oy + side - (y - arena.lo.y) / (arena.hi.y - arena.lo.y) * side; };
  const double peak = static_cast<double>(hist.max_count());
  auto color = [](double u) {
    const int r = static_cast<int>(std::lround(235 + u * (230 - 235)));
    const int g = static_cast<int>(std::lround(235 + u * (85 - 235)));
    const int b = static_cast<int>(std::lround(235 + u * (13 - 235)));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"580\" "
         "viewBox=\"0 0 640 580\">\n"
      << "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
      << "<stop offset=\"0\" stop-color=\"" << color(0.0) << "\"/>"
      << "<stop offset=\"1\" stop-color=\"" << color(1.0) << "\"/>"
      << "</linearGradient></defs>\n"
      << "<rect width=\"640\" height=\"580\" fill=\"white\"/>\n"
      << "<text x=\"" << num(ox + side / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"15\">" << escape(title) << "</text>\n<g class=\"cells\">\n";
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double u = peak > 0 ? static_cast<double>(hist.count(ix, iy)) / peak : 0.0;
      svg << "<rect x=\"" << num(ox + ix * cell) << "\" y=\"" << num(oy + side - (iy + 1) * cell)
          << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\""
          << color(u) << "\"/>\n";
    }
  }
  svg << "</g>\n<g class=\"lava\" stroke=\"#b00000\" stroke-width=\"3\">\n";
  for (const envs::Segment& s : lava) {
    svg << "<line x1=\"" << num(sx(s.a.x)) << "\" y1=\"" << num(sy(s.a.y)) << "\" x2=\""
        << num(sx(s.b.x)) << "\" y2=\"" << num(sy(s.b.y)) << "\"/>\n";
  }
  svg << "</g>\n"
      << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(side)
      << "\" height=\"" << num(side) << "\" fill=\"none\" stroke=\"#444\"/>\n"
      << "<g class=\"legend\">\n"
      << "<rect x=\"560\" y=\"" << num(oy) << "\" width=\"20\" height=\"200\" fill=\"url(#ramp)\" "
         "stroke=\"#444\"/>\n"
      << "<text x=\"586\" y=\"" << num(oy + 8) << "\" font-size=\"10\">"
      << label(hist.total() > 0 ? peak / static_cast<double>(hist.total()) : 0.0) << "</text>\n"
      << "<text x=\"586\" y=\"" << num(oy + 200) << "\" font-size=\"10\">0</text>\n"
      << "<text x=\"560\" y=\"" << num(oy + 220) << "\" font-size=\"10\">visit freq.</text>\n"
      << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace etmdp::analysis
