#include "swarm/pathfind.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>
#include <vector>

#include "geometry_detail.hpp"

namespace swarm::path {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Aabb {
  Point lo;
  Point hi;
};

Aabb bounds_of(std::span<const Point> pts) {
  Aabb box{pts.front(), pts.front()};
  for (const auto& p : pts) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

double aabb_gap(const Aabb& a, const Aabb& b) {
  const Point gap = (a.lo - b.hi).cwiseMax(b.lo - a.hi).cwiseMax(Point::Zero(a.lo.size()));
  return gap.norm();
}

double segment_obstacle_distance(const Point& a, const Point& b, const ConvexObstacle& obstacle) {
  PointList seg{a};
  if (a != b) seg.push_back(b);
  if (obstacle.dim() == 2) return geom::detail::polygon_distance_2d(seg, obstacle.vertices());
  return geom::detail::gjk_distance(seg, obstacle.vertices());
}

// Node positions of the visibility graph: vertices pushed out along the bisector of the
// adjacent outward edge normals so both offset edges sit `offset` away from the polygon.
PointList offset_vertices(const ConvexObstacle& obstacle, double offset) {
  const auto& v = obstacle.vertices();
  const std::size_t n = v.size();
  PointList out;
  auto outward = [&](std::size_t i) {
    const Point e = v[(i + 1) % n] - v[i];
    Point normal(2);
    normal << e.y(), -e.x();  // counterclockwise polygon: right-hand normal points out
    return Point(normal.normalized());
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point n1 = outward((i + n - 1) % n);
    const Point n2 = outward(i);
    out.push_back(v[i] + (n1 + n2) * (offset / (1.0 + n1.dot(n2))));
  }
  return out;
}

Path reconstruct(const std::vector<int>& parent, const PointList& nodes, int goal) {
  Path path;
  for (int at = goal; at >= 0; at = parent[static_cast<std::size_t>(at)]) {
    path.waypoints.push_back(nodes[static_cast<std::size_t>(at)]);
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  return path;
}

// A* over the complete visibility graph with lazily checked edges.
Path plan_visibility(const Point& start, const Point& goal, std::span<const ConvexObstacle> obstacles, double clearance,
                     const PlannerOptions& options) {
  PointList nodes{start, goal};
  for (const auto& o : obstacles) {
    for (const auto& p : offset_vertices(o, clearance + options.node_margin)) {
      if (geom::clearance_of(p, obstacles) >= clearance) nodes.push_back(p);
    }
  }
  const std::size_t n = nodes.size();
  std::vector<double> cost(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[0] = 0.0;
  open.push({(goal - start).norm(), 0});
  while (!open.empty()) {
    const int cur = open.top().second;
    open.pop();
    if (closed[static_cast<std::size_t>(cur)]) continue;
    closed[static_cast<std::size_t>(cur)] = 1;
    if (cur == 1) return reconstruct(parent, nodes, 1);
    const Point& from = nodes[static_cast<std::size_t>(cur)];
    for (std::size_t next = 0; next < n; ++next) {
      if (closed[next]) continue;
      const double c = cost[static_cast<std::size_t>(cur)] + (nodes[next] - from).norm();
      if (c >= cost[next]) continue;
      if (!segment_clear(from, nodes[next], obstacles, clearance)) continue;
      cost[next] = c;
      parent[next] = cur;
      open.push({c + (goal - nodes[next]).norm(), static_cast<int>(next)});
    }
  }
  throw Unreachable("plan_path: goal is not reachable from start");
}

struct GridKeyHash {
  std::size_t operator()(const Eigen::Vector3i& k) const {
    return (static_cast<std::size_t>(k.x()) * 73856093u) ^ (static_cast<std::size_t>(k.y()) * 19349663u) ^
           (static_cast<std::size_t>(k.z()) * 83492791u);
  }
};

PointList shortcut(const PointList& raw, std::span<const ConvexObstacle> obstacles, double clearance) {
  PointList out{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !segment_clear(raw[i], raw[j], obstacles, clearance)) --j;
    out.push_back(raw[j]);
    i = j;
  }
  return out;
}

Path plan_grid(const Point& start, const Point& goal, std::span<const ConvexObstacle> obstacles, double clearance,
               const PlannerOptions& options) {
  PointList all{start, goal};
  for (const auto& o : obstacles) all.insert(all.end(), o.vertices().begin(), o.vertices().end());
  const Aabb box = bounds_of(all);
  const double step = options.grid_step;
  const Eigen::Vector3d origin = Eigen::Vector3d(box.lo) - Eigen::Vector3d::Constant(1.0 + clearance);
  const Eigen::Vector3d extent = Eigen::Vector3d(box.hi) - origin + Eigen::Vector3d::Constant(1.0 + clearance);
  const Eigen::Vector3i dims = (extent / step).array().ceil().cast<int>();
  // Cells keep enough clearance that any edge to a neighbouring cell is clear as well.
  const double cell_clearance = clearance + step * std::sqrt(3.0) / 2.0;

  auto center = [&](const Eigen::Vector3i& k) { return Point(origin + step * k.cast<double>()); };
  auto inside = [&](const Eigen::Vector3i& k) { return (k.array() >= 0).all() && (k.array() <= dims.array()).all(); };
  std::unordered_map<Eigen::Vector3i, char, GridKeyHash> free_cache;
  auto is_free = [&](const Eigen::Vector3i& k) {
    auto it = free_cache.find(k);
    if (it != free_cache.end()) return it->second != 0;
    const bool ok = geom::clearance_of(center(k), obstacles) >= cell_clearance;
    free_cache.emplace(k, ok ? 1 : 0);
    return ok;
  };

  // Attach start and goal to nearby free cells with clear connecting segments.
  auto attach = [&](const Point& p) {
    std::vector<Eigen::Vector3i> cells;
    const Eigen::Vector3i base = ((Eigen::Vector3d(p) - origin) / step).array().round().cast<int>();
    for (int dx = -2; dx <= 2; ++dx) {
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dz = -2; dz <= 2; ++dz) {
          const Eigen::Vector3i k = base + Eigen::Vector3i(dx, dy, dz);
          if (inside(k) && is_free(k) && segment_clear(p, center(k), obstacles, clearance)) cells.push_back(k);
        }
      }
    }
    return cells;
  };
  const auto start_cells = attach(start);
  const auto goal_cells = attach(goal);
  if (start_cells.empty() || goal_cells.empty()) throw Unreachable("plan_path: start or goal is boxed in");

  struct Node {
    double g;
    Eigen::Vector3i parent;
  };
  std::unordered_map<Eigen::Vector3i, Node, GridKeyHash> nodes;
  std::unordered_map<Eigen::Vector3i, char, GridKeyHash> closed;
  std::unordered_map<Eigen::Vector3i, char, GridKeyHash> goal_set;
  for (const auto& k : goal_cells) goal_set.emplace(k, 1);
  using Entry = std::pair<double, std::array<int, 3>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const Eigen::Vector3i none(-1, -1, -1);
  for (const auto& k : start_cells) {
    const double g = (center(k) - start).norm();
    nodes[k] = {g, none};
    open.push({g + (goal - center(k)).norm(), {k.x(), k.y(), k.z()}});
  }
  while (!open.empty()) {
    const auto top = open.top().second;
    open.pop();
    const Eigen::Vector3i cur(top[0], top[1], top[2]);
    if (closed.count(cur)) continue;
    closed.emplace(cur, 1);
    if (goal_set.count(cur)) {
      PointList raw{goal};
      for (Eigen::Vector3i at = cur; at != none; at = nodes[at].parent) raw.push_back(center(at));
      raw.push_back(start);
      std::reverse(raw.begin(), raw.end());
      return {shortcut(raw, obstacles, clearance)};
    }
    const double g_cur = nodes[cur].g;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const Eigen::Vector3i k = cur + Eigen::Vector3i(dx, dy, dz);
          if (!inside(k) || closed.count(k) || !is_free(k)) continue;
          const double g = g_cur + step * std::sqrt(double(dx * dx + dy * dy + dz * dz));
          auto it = nodes.find(k);
          if (it != nodes.end() && it->second.g <= g) continue;
          nodes[k] = {g, cur};
          open.push({g + (goal - center(k)).norm(), {k.x(), k.y(), k.z()}});
        }
      }
    }
  }
  throw Unreachable("plan_path: goal is not reachable from start");
}

}  // namespace

double Path::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) total += (waypoints[i] - waypoints[i - 1]).norm();
  return total;
}

bool segment_clear(const Point& a, const Point& b, std::span<const ConvexObstacle> obstacles, double clearance) {
  const PointList seg{a, b};
  const Aabb seg_box = bounds_of(seg);
  for (const auto& o : obstacles) {
    if (aabb_gap(seg_box, bounds_of(o.vertices())) >= clearance) continue;
    if (segment_obstacle_distance(a, b, o) < clearance - kClearanceTol) return false;
  }
  return true;
}

Path plan_path(const Point& start, const Point& goal, std::span<const ConvexObstacle> obstacles, double clearance,
               const PlannerOptions& options) {
  if (start.size() != goal.size()) throw std::invalid_argument("plan_path: dimension mismatch");
  if (geom::clearance_of(start, obstacles) < clearance - kClearanceTol) {
    throw std::invalid_argument("plan_path: start violates clearance");
  }
  if (geom::clearance_of(goal, obstacles) < clearance - kClearanceTol) {
    throw std::invalid_argument("plan_path: goal violates clearance");
  }
  if (segment_clear(start, goal, obstacles, clearance)) return {{start, goal}};
  if (start.size() == 2) return plan_visibility(start, goal, obstacles, clearance, options);
  return plan_grid(start, goal, obstacles, clearance, options);
}

std::optional<Point> select_tractive_point(const Path& path, const Point& anchor,
                                           std::span<const ConvexObstacle> obstacles, double clearance) {
  const auto& w = path.waypoints;
  if (w.empty()) return std::nullopt;
  // Walk from the goal back towards the start; the first visible candidate wins.
  for (std::size_t i = w.size() - 1; i > 0; --i) {
    const Point& hi = w[i];
    const Point& lo = w[i - 1];
    const double len = (hi - lo).norm();
    const int samples = static_cast<int>(std::floor(len / kTractiveSpacing));
    for (int s = 0; s <= samples; ++s) {
      const double along = std::min(s * kTractiveSpacing, len);
      const Point candidate = len > 0.0 ? Point(hi + (lo - hi) * (along / len)) : hi;
      if (segment_clear(candidate, anchor, obstacles, clearance)) return candidate;
    }
  }
  if (segment_clear(w.front(), anchor, obstacles, clearance)) return w.front();
  return std::nullopt;
}

bool needs_replan(const std::optional<PathCache>& cache, const Point& target, const Point& anchor,
                  std::span<const ConvexObstacle> obstacles, double clearance) {
  if (!cache) return true;
  if ((cache->target - target).norm() > 1e-12) return true;
  return !select_tractive_point(cache->path, anchor, obstacles, clearance).has_value();
}

}  // namespace swarm::path
