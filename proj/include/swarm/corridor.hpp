#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm::corridor {

using geom::ConvexObstacle;
using geom::HalfSpace;
using geom::Point;
using geom::PointList;

/// Raised when a corridor cannot be built from a trajectory that should be clear.
class CorridorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extended predetermined trajectory.
///
/// points = [anchor?] ++ [p̄_1 .. p̄_K] ++ [tractive?]. The optional anchor is the robot's
/// current position; it joins segment division (so the step from the current position to
/// p_1 is covered) but never receives constraints itself.
struct Ept {
  PointList points;
  bool has_anchor = false;
  bool has_tractive = false;

  /// Number of predetermined points (the horizon K).
  std::size_t horizon() const { return points.size() - (has_anchor ? 1 : 0) - (has_tractive ? 1 : 0); }
  /// EPT index of horizon step k in 1..K.
  std::size_t index_of_step(std::size_t k) const { return has_anchor ? k : k - 1; }
};

Ept build_ept(const PointList& pred, const std::optional<Point>& tractive, bool terminal_overlap,
              const std::optional<Point>& anchor = std::nullopt);

/// Inclusive EPT index range [first, last].
struct Segment {
  std::size_t first = 0;
  std::size_t last = 0;

  bool contains(std::size_t i) const { return i >= first && i <= last; }
  std::size_t size() const { return last - first + 1; }
};

/// Greedy division from the end of the EPT towards its start. Segments are returned in
/// construction order (the segment holding the EPT end comes first); neighbours share one
/// index. Throws CorridorError if two consecutive points cannot share a clear hull.
std::vector<Segment> segment_division(const Ept& ept, std::span<const ConvexObstacle> obstacles, double clearance);

/// Per-horizon obstacle constraints: planes[k-1] holds the half-spaces for step k.
struct Corridor {
  std::vector<std::vector<HalfSpace>> planes;

  std::size_t horizon() const { return planes.size(); }
  std::size_t plane_count() const;
  /// Smallest slack of positions[k-1] against planes[k-1] (infinity if no planes).
  double min_slack(std::span<const Point> positions) const;
};

struct CorridorOptions {
  /// Reach of the robot over the horizon, K * h * v_max.
  double reach = 0.0;
};

/// Separating planes per segment, nearest obstacle first. An obstacle is skipped when it
/// lies farther than reach + clearance from `robot_pos`, or when the region formed so far
/// (a reach-sized box around the robot cut by the segment's planes) already keeps
/// `clearance` from it. Emitted planes are offset by the clearance; step k receives the
/// planes of every segment containing it.
Corridor build_corridor(std::span<const Segment> segments, const Ept& ept, std::span<const ConvexObstacle> obstacles,
                        double clearance, const Point& robot_pos, const CorridorOptions& options);

}  // namespace swarm::corridor
