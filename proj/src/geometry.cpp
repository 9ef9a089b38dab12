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

#include "etmdp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "etmdp/error.hpp"

namespace etmdp::envs {
namespace {

// Sign of the cross product (q - p) x (r - p).
int orientation(Point p, Point q, Point r) {
  const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

// r is collinear with p-q; is it within their bounding box?
bool on_segment(Point p, Point q, Point r) {
  return r.x >= std::min(p.x, q.x) && r.x <= std::max(p.x, q.x) &&
         r.y >= std::min(p.y, q.y) && r.y <= std::max(p.y, q.y);
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

double distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

std::vector<Segment> parse_layout(std::istream& in, const Box& bounds,
                                  const std::string& source_name) {
  std::vector<Segment> segments;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double v[4];
    std::string rest;
    if (!(fields >> v[0] >> v[1] >> v[2] >> v[3]) || (fields >> rest)) {
      throw IoError(source_name + ":" + std::to_string(line_no) +
                    ": expected `x1 y1 x2 y2`");
    }
    Segment seg{{v[0], v[1]}, {v[2], v[3]}};
    for (Point p : {seg.a, seg.b}) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !bounds.contains(p)) {
        throw IoError(source_name + ":" + std::to_string(line_no) +
                      ": endpoint outside the arena");
      }
    }
    segments.push_back(seg);
  }
  return segments;
}

std::vector<Segment> load_layout(const std::string& path, const Box& bounds) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open layout file " + path);
  return parse_layout(in, bounds, path);
}

}  // namespace etmdp::envs
