#include "swarm/corridor.hpp"

#include <algorithm>
#include <limits>

#include "swarm/pathfind.hpp"
#include "swarm/qp.hpp"

namespace swarm::corridor {

namespace {

bool hull_clear(std::span<const Point> pts, std::span<const ConvexObstacle> obstacles, double clearance) {
  const double threshold = std::max(0.0, clearance - path::kClearanceTol);
  return std::all_of(obstacles.begin(), obstacles.end(),
                     [&](const ConvexObstacle& o) { return geom::hull_clear_of(pts, o, threshold); });
}

}  // namespace

Ept build_ept(const PointList& pred, const std::optional<Point>& tractive, bool terminal_overlap,
              const std::optional<Point>& anchor) {
  Ept ept;
  if (anchor) {
    ept.points.push_back(*anchor);
    ept.has_anchor = true;
  }
  ept.points.insert(ept.points.end(), pred.begin(), pred.end());
  if (tractive && !terminal_overlap) {
    ept.points.push_back(*tractive);
    ept.has_tractive = true;
  }
  return ept;
}

std::vector<Segment> segment_division(const Ept& ept, std::span<const ConvexObstacle> obstacles, double clearance) {
  const auto& pts = ept.points;
  if (pts.empty()) throw CorridorError("segment_division: empty EPT");
  std::vector<Segment> segments;
  Segment current{pts.size() - 1, pts.size() - 1};
  if (pts.size() == 1) return {current};

  std::size_t next = pts.size() - 2;
  for (;;) {
    const std::span<const Point> grown(pts.data() + next, current.last - next + 1);
    if (hull_clear(grown, obstacles, clearance)) {
      current.first = next;
      if (next == 0) break;
      --next;
      continue;
    }
    if (current.size() == 1) {
      throw CorridorError("segment_division: consecutive EPT points " + std::to_string(next) + " and " +
                          std::to_string(next + 1) + " are not obstacle-clear");
    }
    segments.push_back(current);
    current = {current.first, current.first};
  }
  segments.push_back(current);
  return segments;
}

std::size_t Corridor::plane_count() const {
  std::size_t n = 0;
  for (const auto& p : planes) n += p.size();
  return n;
}

double Corridor::min_slack(std::span<const Point> positions) const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < planes.size() && k < positions.size(); ++k) {
    for (const auto& h : planes[k]) worst = std::min(worst, h.slack(positions[k]));
  }
  return worst;
}

Corridor build_corridor(std::span<const Segment> segments, const Ept& ept, std::span<const ConvexObstacle> obstacles,
                        double clearance, const Point& robot_pos, const CorridorOptions& options) {
  const std::size_t horizon = ept.horizon();
  const int dim = static_cast<int>(robot_pos.size());
  Corridor corridor;
  corridor.planes.resize(horizon);

  // Obstacles that no reachable position can come within `clearance` of are dropped.
  const PointList robot{robot_pos};
  std::vector<const ConvexObstacle*> nearby;
  for (const auto& o : obstacles) {
    if (geom::hull_distance(robot, o.vertices()) <= options.reach + clearance) nearby.push_back(&o);
  }
  const std::vector<HalfSpace> reach_box = geom::box_halfspaces(robot_pos, options.reach);

  for (const auto& seg : segments) {
    const std::span<const Point> pts(ept.points.data() + seg.first, seg.size());
    std::vector<std::pair<double, const ConvexObstacle*>> order;
    for (const auto* o : nearby) order.emplace_back(geom::hull_distance(pts, o->vertices()), o);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<HalfSpace> region = reach_box;
    std::vector<HalfSpace> seg_planes;
    for (const auto& [dist, o] : order) {
      const PointList corners = geom::halfspace_vertices(region, dim);
      if (corners.empty()) break;
      if (geom::hull_distance(corners, o->vertices()) >= clearance) continue;
      qp::SeparatingPlane sp;
      try {
        sp = qp::separating_plane(pts, *o);
      } catch (const std::invalid_argument& e) {
        throw CorridorError(std::string("build_corridor: ") + e.what());
      }
      const HalfSpace plane{sp.plane.normal, sp.plane.offset + clearance};
      seg_planes.push_back(plane);
      region.push_back(plane);
    }
    for (std::size_t k = 1; k <= horizon; ++k) {
      if (!seg.contains(ept.index_of_step(k))) continue;
      auto& dst = corridor.planes[k - 1];
      dst.insert(dst.end(), seg_planes.begin(), seg_planes.end());
    }
  }
  return corridor;
}

}  // namespace swarm::corridor
