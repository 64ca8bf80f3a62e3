#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "swarm/geometry.hpp"

namespace test {

using swarm::geom::Point;
using swarm::geom::PointList;

inline Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

inline Point pt(double x, double y, double z) {
  Point p(3);
  p << x, y, z;
  return p;
}

/// Axis-aligned square with lower-left corner (x, y), counterclockwise.
inline PointList square(double x, double y, double side) {
  return {pt(x, y), pt(x + side, y), pt(x + side, y + side), pt(x, y + side)};
}

inline PointList rect(double x0, double y0, double x1, double y1) {
  return {pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)};
}

/// Convex polygon with 3-8 vertices on a circle of the given radius, counterclockwise.
inline PointList random_polygon(std::mt19937_64& rng, const Point& centre, double radius) {
  std::uniform_int_distribution<int> count(3, 8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (;;) {
    std::vector<double> a(static_cast<std::size_t>(count(rng)));
    for (auto& x : a) x = angle(rng);
    std::sort(a.begin(), a.end());
    double widest = a.front() + 2.0 * std::numbers::pi - a.back();
    double narrowest = widest;
    for (std::size_t i = 1; i < a.size(); ++i) {
      widest = std::max(widest, a[i] - a[i - 1]);
      narrowest = std::min(narrowest, a[i] - a[i - 1]);
    }
    if (widest >= 0.9 * std::numbers::pi || narrowest < 0.05) continue;
    PointList out;
    for (double t : a) out.push_back(centre + radius * pt(std::cos(t), std::sin(t)));
    return out;
  }
}

/// Random 2D vector with length in [lo, hi].
inline Point random_offset(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> len(lo, hi);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double r = len(rng);
  const double t = angle(rng);
  return pt(r * std::cos(t), r * std::sin(t));
}

}  // namespace test
