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

#ifndef ETMDP_GEOMETRY_HPP
#define ETMDP_GEOMETRY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace etmdp::envs {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Segment {
  Point a;
  Point b;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Axis-aligned box [lo.x, hi.x] x [lo.y, hi.y].
struct Box {
  Point lo;
  Point hi;

  bool contains(Point p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
};

// Closed-segment intersection: touching endpoints and collinear overlap
// both count.
bool segments_intersect(const Segment& s, const Segment& t);

double distance(Point p, Point q);

// Parses `x1 y1 x2 y2` lines; `#` starts a comment, blank lines are skipped.
// Every endpoint must lie inside `bounds`. Throws etmdp::IoError with the
// offending line number otherwise.
std::vector<Segment> parse_layout(std::istream& in, const Box& bounds,
                                  const std::string& source_name = "layout");
std::vector<Segment> load_layout(const std::string& path, const Box& bounds);

}  // namespace etmdp::envs

#endif  // ETMDP_GEOMETRY_HPP
