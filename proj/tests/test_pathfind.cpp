#include <doctest.h>

#include <numeric>
#include <queue>

#include "support.hpp"
#include "swarm/pathfind.hpp"

using namespace swarm;
using namespace swarm::path;
using test::pt;

namespace {

/// Every segment of the path keeps the clearance, checked at 1 cm spacing.
void check_clearance(const Path& p, std::span<const ConvexObstacle> obstacles, double clearance) {
  for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i) {
    const Point& a = p.waypoints[i];
    const Point& b = p.waypoints[i + 1];
    const int n = std::max(1, static_cast<int>((b - a).norm() / 0.01));
    for (int k = 0; k <= n; ++k) {
      CHECK(geom::clearance_of(a + (b - a) * (double(k) / n), obstacles) >= clearance - 1e-9);
    }
  }
}

/// Shortest grid path length with the 32 primitive moves of a 7x7 stencil, a
/// near-any-angle oracle (at most about 1% above the true length).
double grid_length(const Point& s, const Point& g, std::span<const ConvexObstacle> obs, double clearance, double step) {
  const double lo = -6, hi = 6;
  const int n = static_cast<int>((hi - lo) / step) + 1;
  auto at = [&](int i, int j) { return pt(lo + i * step, lo + j * step); };
  auto idx = [&](int i, int j) { return i * n + j; };
  std::vector<char> free(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) free[static_cast<std::size_t>(idx(i, j))] = geom::clearance_of(at(i, j), obs) >= clearance;
  std::vector<std::pair<int, int>> moves;
  for (int di = -3; di <= 3; ++di)
    for (int dj = -3; dj <= 3; ++dj)
      if (std::gcd(std::abs(di), std::abs(dj)) == 1) moves.emplace_back(di, dj);
  std::vector<double> dist(static_cast<std::size_t>(n * n), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const int si = static_cast<int>(std::lround((s.x() - lo) / step)), sj = static_cast<int>(std::lround((s.y() - lo) / step));
  const int gi = static_cast<int>(std::lround((g.x() - lo) / step)), gj = static_cast<int>(std::lround((g.y() - lo) / step));
  dist[static_cast<std::size_t>(idx(si, sj))] = 0;
  open.push({0, idx(si, sj)});
  while (!open.empty()) {
    const auto [d, c] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(c)]) continue;
    const int i = c / n, j = c % n;
    if (i == gi && j == gj) return d;
    for (const auto& [di, dj] : moves) {
      const int a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= n || b >= n || !free[static_cast<std::size_t>(idx(a, b))]) continue;
      if (std::max(std::abs(di), std::abs(dj)) > 1 && !path::segment_clear(at(i, j), at(a, b), obs, clearance)) continue;
      const double nd = d + step * std::hypot(di, dj);
      if (nd < dist[static_cast<std::size_t>(idx(a, b))]) {
        dist[static_cast<std::size_t>(idx(a, b))] = nd;
        open.push({nd, idx(a, b)});
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

TEST_SUITE("pathfind") {

TEST_CASE("free space gives a straight line") {
  const Path p = plan_path(pt(0, 0), pt(3, 4), {}, 0.3);
  REQUIRE(p.waypoints.size() == 2);
  CHECK(p.length() == doctest::Approx(5.0));
}

TEST_CASE("a single square forces a detour close to the grid oracle") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::square(-0.5, -0.5, 1.0))};
  const Path p = plan_path(pt(-3, 0), pt(3, 0), obs, 0.3);
  CHECK(p.waypoints.size() > 2);
  CHECK(p.length() >= 6.0);
  check_clearance(p, obs, 0.3);
  const double oracle = grid_length(pt(-3, 0), pt(3, 0), obs, 0.3, 0.05);
  // Both sides over-estimate slightly: the oracle through its finite move set, the
  // planner through straight cuts around the rounded clearance corners.
  CHECK(std::abs(p.length() - oracle) <= 0.02 * oracle);
}

TEST_CASE("a sealed goal is unreachable") {
  const std::vector<ConvexObstacle> walls{
      ConvexObstacle(test::rect(-2, -2, 2, -1.5)), ConvexObstacle(test::rect(-2, 1.5, 2, 2)),
      ConvexObstacle(test::rect(-2, -1.5, -1.5, 1.5)), ConvexObstacle(test::rect(1.5, -1.5, 2, 1.5))};
  CHECK_THROWS_AS(plan_path(pt(-5, 0), pt(0, 0), walls, 0.3), Unreachable);
}

TEST_CASE("paths keep their clearance in a cluttered field") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::square(-2, -1, 1.2)),
                                        ConvexObstacle(test::square(0, 0.2, 1.0)),
                                        ConvexObstacle(PointList{pt(1.5, -2), pt(3, -1.5), pt(2, -0.3)})};
  const Path p = plan_path(pt(-4, 0), pt(4, 0.5), obs, 0.3);
  CHECK(p.waypoints.front() == pt(-4, 0));
  CHECK(p.waypoints.back() == pt(4, 0.5));
  check_clearance(p, obs, 0.3);
}

TEST_CASE("3D grid planner routes around a block") {
  PointList block;
  for (int i = 0; i < 8; ++i) block.push_back(pt(-0.5 + (i & 1), -0.5 + ((i >> 1) & 1), -0.5 + ((i >> 2) & 1)));
  const std::vector<ConvexObstacle> obs{ConvexObstacle(block)};
  const Path p = plan_path(pt(-2, 0, 0), pt(2, 0, 0), obs, 0.2);
  CHECK(p.length() > 4.0);
  CHECK(p.length() < 5.5);
  check_clearance(p, obs, 0.2 - 1e-6);
}

TEST_CASE("tractive point: direct visibility gives the goal") {
  const Path p = plan_path(pt(0, 0), pt(5, 0), {}, 0.3);
  const auto t = select_tractive_point(p, pt(0, 0), {}, 0.3);
  REQUIRE(t);
  CHECK(t->isApprox(pt(5, 0)));
}

TEST_CASE("tractive point in an L-shaped corridor matches a dense sweep") {
  // Corridor going right then up; the inner corner block sits in the bend.
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::rect(0.8, -1, 4, 2.2)),
                                        ConvexObstacle(test::rect(-1.8, -1, -0.8, 4.8)),
                                        ConvexObstacle(test::rect(-0.8, 3.8, 4, 4.8))};
  const Point start = pt(0, 0), goal = pt(3, 3);
  const Path p = plan_path(start, goal, obs, 0.3);
  const auto t = select_tractive_point(p, start, obs, 0.3);
  REQUIRE(t);
  CHECK(segment_clear(start, *t, obs, 0.3));
  // Oracle: sweep the path from the goal backwards at 1 cm and take the first visible point.
  double total = p.length();
  double best_remaining = std::numeric_limits<double>::infinity();
  double along = 0;
  for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i) {
    const Point& a = p.waypoints[i];
    const Point& b = p.waypoints[i + 1];
    const double len = (b - a).norm();
    for (double s = 0; s <= len; s += 0.01) {
      if (segment_clear(start, a + (b - a) * (s / len), obs, 0.3))
        best_remaining = std::min(best_remaining, total - (along + s));
    }
    along += len;
  }
  // Our candidates are 5 cm apart, so the chosen point may lag the sweep by one spacing.
  double t_remaining = 0;
  {
    double acc = 0;
    for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i) {
      const Point& a = p.waypoints[i];
      const Point& b = p.waypoints[i + 1];
      const double len = (b - a).norm();
      if (geom::point_segment_distance(*t, a, b) < 1e-9) {
        t_remaining = total - (acc + (*t - a).norm());
        break;
      }
      acc += len;
    }
  }
  CHECK(t_remaining >= best_remaining - 1e-9);
  CHECK(t_remaining <= best_remaining + kTractiveSpacing + 1e-9);
  CHECK_FALSE(t->isApprox(goal));
}

TEST_CASE("tractive point: no visibility gives none") {
  const Path p{{pt(0, 0), pt(5, 0)}};
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::rect(-1, 1, 6, 2))};
  // Anchor on the far side of a wall spanning the whole path.
  CHECK_FALSE(select_tractive_point(p, pt(2, 3), obs, 0.3).has_value());
}

TEST_CASE("tractive point never moves away when an obstacle is removed") {
  const std::vector<ConvexObstacle> obs{ConvexObstacle(test::square(1.0, -0.2, 1.0)),
                                        ConvexObstacle(test::square(2.8, 0.5, 0.8))};
  const Point start = pt(0, 0), goal = pt(5, 1);
  const Path p = plan_path(start, goal, obs, 0.3);
  const auto both = select_tractive_point(p, start, obs, 0.3);
  const auto fewer = select_tractive_point(p, start, std::span(obs).first(1), 0.3);
  REQUIRE(both);
  REQUIRE(fewer);
  CHECK((*fewer - goal).norm() <= (*both - goal).norm() + 1e-9);
}

TEST_CASE("needs_replan") {
  const Path p = plan_path(pt(0, 0), pt(5, 0), {}, 0.3);
  CHECK(needs_replan(std::nullopt, pt(5, 0), pt(0, 0), {}, 0.3));
  const std::optional<PathCache> cache = PathCache{p, pt(5, 0)};
  CHECK_FALSE(needs_replan(cache, pt(5, 0), pt(0, 0), {}, 0.3));
  CHECK(needs_replan(cache, pt(5, 2), pt(0, 0), {}, 0.3));
}

}  // TEST_SUITE
