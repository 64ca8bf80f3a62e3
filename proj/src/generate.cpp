#include "swarm/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace swarm::gen {

namespace {

using geom::Point;

Point xy(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

/// Random convex polygon: sorted angles on a circle, so every vertex is on the hull.
geom::ConvexObstacle random_polygon(std::mt19937_64& rng, const Point& centre, double radius, int min_v, int max_v) {
  std::uniform_int_distribution<int> count(min_v, max_v);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const int k = count(rng);
  std::vector<double> angles(static_cast<std::size_t>(k));
  for (;;) {
    for (auto& a : angles) a = angle(rng);
    std::sort(angles.begin(), angles.end());
    // Reject slivers: a wide angular gap leaves a thin polygon off to one side of the centre.
    double widest = angles.front() + 2.0 * std::numbers::pi - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i) widest = std::max(widest, angles[i] - angles[i - 1]);
    if (widest < 0.8 * std::numbers::pi) break;
  }
  geom::PointList pts;
  for (double a : angles) pts.push_back(centre + radius * xy(std::cos(a), std::sin(a)));
  return geom::ConvexObstacle(geom::convex_hull(pts).vertices);
}

/// Places obstacles by rejection sampling. `keep_clear` holds points that need the given
/// clearance; obstacles stay `gap` apart from one another.
std::vector<geom::ConvexObstacle> scatter(std::mt19937_64& rng, int count, const geom::PointList& keep_clear,
                                          double clear, double gap, auto&& sample_centre, double min_size,
                                          double max_size, int min_v, int max_v) {
  std::uniform_real_distribution<double> size(min_size, max_size);
  std::vector<geom::ConvexObstacle> out;
  for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 5000; ++attempt) {
    const Point c = sample_centre();
    geom::ConvexObstacle cand = random_polygon(rng, c, size(rng), min_v, max_v);
    const std::span<const geom::ConvexObstacle> one(&cand, 1);
    const bool blocks = std::any_of(keep_clear.begin(), keep_clear.end(),
                                    [&](const Point& p) { return geom::clearance_of(p, one) < clear; });
    if (blocks) continue;
    const bool crowded = std::any_of(out.begin(), out.end(), [&](const geom::ConvexObstacle& o) {
      return geom::hull_distance(o.vertices(), cand.vertices()) < gap;
    });
    if (crowded) continue;
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace

sim::Scenario random_scenario(std::uint64_t seed, const RandomOptions& opt) {
  std::mt19937_64 rng(seed);
  sim::Scenario sc;
  sc.name = "random-" + std::to_string(seed);
  sc.time_cap = opt.time_cap;
  const double clear = sc.params.clearance(2);

  const int n = std::uniform_int_distribution<int>(opt.min_robots, opt.max_robots)(rng);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  const double step = 2.0 * std::numbers::pi / n;
  geom::PointList anchors;
  for (int i = 0; i < n; ++i) {
    const double a = step * (i + jitter(rng));
    const Point s = opt.ring_radius * xy(std::cos(a), std::sin(a));
    sc.robots.push_back({s, -s});
    anchors.push_back(s);
    anchors.push_back(-s);
  }

  const int m = std::uniform_int_distribution<int>(opt.min_obstacles, opt.max_obstacles)(rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto centre = [&] {
    for (;;) {
      const Point c = xy(unit(rng), unit(rng));
      if (c.norm() <= 1.0) return Point(opt.field_radius * c);
    }
  };
  sc.obstacles = scatter(rng, m, anchors, clear + 0.2, 2.0 * clear + 0.2, centre, opt.min_obstacle_size,
                         opt.max_obstacle_size, 4, 7);
  return sc;
}

sim::Scenario forest_scenario(std::uint64_t seed, const ForestOptions& opt) {
  std::mt19937_64 rng(seed);
  sim::Scenario sc;
  sc.name = "forest";
  sc.time_cap = opt.time_cap;
  const double clear = sc.params.clearance(2);

  // Lanes alternate between the two columns, so opposing robots are offset sideways
  // rather than meeting exactly head-on.
  const int per_side = (opt.robots + 1) / 2;
  const double spacing = 2.0 * opt.half_width / opt.robots;
  geom::PointList anchors;
  for (int i = 0; i < opt.robots; ++i) {
    const bool left = i < per_side;
    const int lane = left ? 2 * i : 2 * (i - per_side) + 1;
    const double y = -opt.half_width + spacing * (lane + 0.5);
    const double x = left ? -opt.standoff : opt.standoff;
    sc.robots.push_back({xy(x, y), xy(-x, y)});
    anchors.push_back(xy(x, y));
    anchors.push_back(xy(-x, y));
  }

  std::uniform_real_distribution<double> u(-opt.half_width, opt.half_width);
  auto centre = [&] { return xy(u(rng), u(rng)); };
  sc.obstacles = scatter(rng, opt.trees, anchors, clear + 0.2, opt.min_gap, centre, 0.25, 0.55, 5, 8);
  return sc;
}

}  // namespace swarm::gen
