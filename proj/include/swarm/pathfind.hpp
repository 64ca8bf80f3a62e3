#pragma once

#include <optional>
#include <span>
#include <stdexcept>

#include "swarm/geometry.hpp"

namespace swarm::path {

using geom::ConvexObstacle;
using geom::Point;
using geom::PointList;

/// Raised when no collision-free path connects start and goal.
class Unreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collision-free polyline from start (front) to goal (back).
struct Path {
  PointList waypoints;

  double length() const;
};

/// Slack allowed on clearance tests to absorb round-off on points that sit exactly at
/// the clearance boundary (e.g. positions produced by the optimizer).
inline constexpr double kClearanceTol = 1e-9;

/// True iff segment [a, b] stays at least `clearance` from every obstacle.
bool segment_clear(const Point& a, const Point& b, std::span<const ConvexObstacle> obstacles, double clearance);

struct PlannerOptions {
  /// Extra outward offset of visibility-graph nodes beyond the clearance.
  double node_margin = 1e-3;
  /// Grid resolution of the 3D planner.
  double grid_step = 0.1;
};

/// Shortest collision-free polyline. 2D: visibility graph over obstacle vertices offset
/// outward by the clearance, searched with Dijkstra. 3D: grid A* plus shortcutting.
/// Throws Unreachable when the goal cannot be reached.
Path plan_path(const Point& start, const Point& goal, std::span<const ConvexObstacle> obstacles, double clearance,
               const PlannerOptions& options = {});

/// Spacing of the arc-length samples used as tractive-point candidates.
inline constexpr double kTractiveSpacing = 0.05;

/// The candidate closest to the goal (by arc length from the goal) whose segment to
/// `anchor` is clear. Candidates are the waypoints plus samples every kTractiveSpacing.
std::optional<Point> select_tractive_point(const Path& path, const Point& anchor,
                                           std::span<const ConvexObstacle> obstacles, double clearance);

/// Path kept between rounds together with the target it was planned for.
struct PathCache {
  Path path;
  Point target;
};

/// True if there is no cached path, the target moved, or the cached path yields no
/// tractive point from `anchor`.
bool needs_replan(const std::optional<PathCache>& cache, const Point& target, const Point& anchor,
                  std::span<const ConvexObstacle> obstacles, double clearance);

}  // namespace swarm::path
