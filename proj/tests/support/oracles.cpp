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

#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace oracle {

using etmdp::envs::Point;
using etmdp::envs::Segment;

bool segments_cross(const Segment& p, const Segment& q) {
  const double rx = p.b.x - p.a.x, ry = p.b.y - p.a.y;
  const double sx = q.b.x - q.a.x, sy = q.b.y - q.a.y;
  const double qpx = q.a.x - p.a.x, qpy = q.a.y - p.a.y;
  const double denom = rx * sy - ry * sx;
  const double scale = std::max({std::abs(rx), std::abs(ry), std::abs(sx), std::abs(sy), 1.0});
  const double eps = 1e-12 * scale * scale;
  if (std::abs(denom) > eps) {
    const double t = (qpx * sy - qpy * sx) / denom;
    const double u = (qpx * ry - qpy * rx) / denom;
    return t >= -1e-12 && t <= 1 + 1e-12 && u >= -1e-12 && u <= 1 + 1e-12;
  }
  // Parallel: must be collinear, then intervals along p must overlap.
  if (std::abs(qpx * ry - qpy * rx) > eps) return false;
  const double rr = rx * rx + ry * ry;
  if (rr == 0.0) {
    // p is a point.
    const double ss = sx * sx + sy * sy;
    if (ss == 0.0) return qpx == 0.0 && qpy == 0.0;
    if (std::abs(qpx * sy - qpy * sx) > eps) return false;
    const double u = (-qpx * sx - qpy * sy) / ss;
    return u >= 0.0 && u <= 1.0;
  }
  const double t0 = (qpx * rx + qpy * ry) / rr;
  const double t1 = t0 + (sx * rx + sy * ry) / rr;
  return std::max(t0, t1) >= 0.0 && std::min(t0, t1) <= 1.0;
}

namespace {

template <class Visit>
void enumerate(int n_actions, int horizon, Visit&& visit) {
  std::vector<int> seq(static_cast<std::size_t>(horizon), 0);
  while (true) {
    visit(seq);
    int i = horizon - 1;
    while (i >= 0 && seq[i] == n_actions - 1) seq[i--] = 0;
    if (i < 0) return;
    ++seq[i];
  }
}

}  // namespace

PathValue brute_force_constrained(const etmdp::tabular::TabularMdp& mdp, int budget,
                                  int horizon) {
  double best_ok = -std::numeric_limits<double>::infinity();
  double best_bad = -std::numeric_limits<double>::infinity();
  enumerate(mdp.n_actions, horizon, [&](const std::vector<int>& seq) {
    int s = mdp.start;
    int b = 0;
    double ret = 0.0;
    for (int a : seq) {
      const int sp = mdp.next[static_cast<std::size_t>(s * mdp.n_actions + a)];
      ret += mdp.reward[static_cast<std::size_t>(s * mdp.n_actions + a)];
      b += mdp.invalid[sp] ? 1 : 0;
      s = sp;
      if (b > budget) {
        best_bad = std::max(best_bad, ret);
        return;
      }
    }
    best_ok = std::max(best_ok, ret);
  });
  if (best_ok > -std::numeric_limits<double>::infinity()) return {best_ok, true};
  return {best_bad, false};
}

double brute_force_et(const etmdp::tabular::TabularMdp& mdp, int budget, double reward_end,
                      int horizon, etmdp::TerminationReward rule) {
  double best = -std::numeric_limits<double>::infinity();
  if (horizon == 0) return 0.0;
  enumerate(mdp.n_actions, horizon, [&](const std::vector<int>& seq) {
    int s = mdp.start;
    int b = 0;
    double ret = 0.0;
    for (int a : seq) {
      const int sp = mdp.next[static_cast<std::size_t>(s * mdp.n_actions + a)];
      const double r = mdp.reward[static_cast<std::size_t>(s * mdp.n_actions + a)];
      b += mdp.invalid[sp] ? 1 : 0;
      if (b > budget) {
        ret += rule == etmdp::TerminationReward::Additive ? r + reward_end : reward_end;
        break;
      }
      ret += r;
      s = sp;
    }
    best = std::max(best, ret);
  });
  return best;
}

GoalSearch search_goal(const etmdp::Environment& et_maze, const Point& goal, double goal_radius) {
  struct Node {
    std::unique_ptr<etmdp::Environment> env;
    double cost;
  };
  GoalSearch out;
  std::vector<Node> frontier;
  {
    auto root = et_maze.clone();
    root->reset(0);
    frontier.push_back({std::move(root), 0.0});
  }
  const int depth = et_maze.spec().horizon;
  for (int t = 0; t < depth && !frontier.empty(); ++t) {
    std::vector<Node> next;
    std::set<std::tuple<double, double, double>> seen;
    for (Node& node : frontier) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          auto env = node.env->clone();
          const double action[2] = {static_cast<double>(dx), static_cast<double>(dy)};
          const etmdp::StepResult res = env->step(action);
          ++out.states_expanded;
          if (res.violated) continue;  // absorbed: the goal can no longer count
          const double cost = node.cost + res.cost;
          const Point p{res.next_state[0], res.next_state[1]};
          if (std::hypot(p.x - goal.x, p.y - goal.y) <= goal_radius) {
            out.min_cost = out.goal_reached ? std::min(out.min_cost, cost) : cost;
            out.goal_reached = true;
          }
          if (res.done) continue;
          if (seen.insert({p.x, p.y, cost}).second) next.push_back({std::move(env), cost});
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

XmlReport check_xml(const std::string& text) {
  XmlReport rep;
  std::vector<std::string> stack;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    rep.well_formed = false;
    rep.error = why + " at offset " + std::to_string(i);
    return rep;
  };
  auto name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
           c == '.';
  };
  bool seen_root = false;
  while (i < text.size()) {
    if (text[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(text[i]))) {
        return fail("text outside the root element");
      }
      if (text[i] == '&') {
        const auto semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 8) return fail("bad entity");
      }
      ++i;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const auto end = text.find("-->", i + 4);
      if (end == std::string::npos) return fail("unterminated comment");
      i = end + 3;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      const auto end = text.find("?>", i + 2);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    const bool closing = i + 1 < text.size() && text[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < text.size() && name_char(text[j])) ++j;
    const std::string name = text.substr(name_start, j - name_start);
    if (name.empty()) return fail("empty tag name");
    if (closing) {
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j >= text.size() || text[j] != '>') return fail("malformed closing tag");
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      i = j + 1;
      continue;
    }
    // Attributes.
    bool self_close = false;
    std::set<std::string> attrs;
    while (true) {
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j >= text.size()) return fail("unterminated tag");
      if (text[j] == '>') {
        ++j;
        break;
      }
      if (text.compare(j, 2, "/>") == 0) {
        self_close = true;
        j += 2;
        break;
      }
      const std::size_t a0 = j;
      while (j < text.size() && name_char(text[j])) ++j;
      const std::string attr = text.substr(a0, j - a0);
      if (attr.empty()) return fail("bad attribute in <" + name + ">");
      if (!attrs.insert(attr).second) return fail("duplicate attribute " + attr);
      if (j >= text.size() || text[j] != '=') return fail("attribute without value");
      ++j;
      if (j >= text.size() || (text[j] != '"' && text[j] != '\'')) return fail("unquoted attribute");
      const char quote = text[j];
      const auto end = text.find(quote, j + 1);
      if (end == std::string::npos) return fail("unterminated attribute value");
      if (text.substr(j + 1, end - j - 1).find('<') != std::string::npos) {
        return fail("'<' inside attribute value");
      }
      j = end + 1;
    }
    if (stack.empty()) {
      if (seen_root) return fail("second root element");
      seen_root = true;
      rep.root = name;
    }
    ++rep.element_counts[name];
    if (!self_close) stack.push_back(name);
    i = j;
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (!seen_root) return fail("no root element");
  rep.well_formed = true;
  return rep;
}

}  // namespace oracle
