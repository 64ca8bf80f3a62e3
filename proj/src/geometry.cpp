#include "swarm/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "geometry_detail.hpp"

namespace swarm::geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross2(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

void check_points(std::span<const Point> points) {
  if (points.empty()) throw std::invalid_argument("geometry: empty point set");
  const auto dim = points.front().size();
  if (dim != 2 && dim != 3) throw std::invalid_argument("geometry: dimension must be 2 or 3");
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("geometry: mixed dimensions");
    if (!p.allFinite()) throw std::invalid_argument("geometry: non-finite coordinate");
  }
}

// Andrew's monotone chain. Collinear points are dropped.
Hull hull_2d(std::span<const Point> points) {
  PointList pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a == b; }),
            pts.end());
  if (pts.size() <= 2) return {pts, true};

  PointList out(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(out[k - 2], out[k - 1], p) <= 0) --k;
    out[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(out[k - 2], out[k - 1], pts[i]) <= 0) --k;
    out[k++] = pts[i];
  }
  out.resize(k - 1);
  if (out.size() <= 2) {
    // All collinear: keep the two extremes.
    return {{pts.front(), pts.back()}, true};
  }
  return {out, false};
}

Hull hull_3d(std::span<const Point> points) {
  PointList pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a == b; }),
            pts.end());
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());

  PointList extreme;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    PointList others;
    others.reserve(pts.size() - 1);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) others.push_back(pts[j]);
    }
    if (others.empty() || detail::gjk_distance(std::span<const Point>(&pts[i], 1), others) > 1e-12 * scale) {
      extreme.push_back(pts[i]);
    }
  }
  Eigen::MatrixXd spread(3, std::max<std::size_t>(extreme.size(), 1) - 1);
  for (std::size_t i = 1; i < extreme.size(); ++i) spread.col(i - 1) = extreme[i] - extreme[0];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(spread);
  lu.setThreshold(1e-12);
  const bool degenerate = extreme.size() < 4 || lu.rank() < 3;
  return {extreme, degenerate};
}

bool inside_convex_polygon(const Point& p, const PointList& ccw) {
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    if (cross2(ccw[i], ccw[(i + 1) % ccw.size()], p) < 0) return false;
  }
  return true;
}

double segment_segment_distance_2d(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double o1 = cross2(a, b, c);
  const double o2 = cross2(a, b, d);
  const double o3 = cross2(c, d, a);
  const double o4 = cross2(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Closest point to the origin of the affine hull of `pts`, if it lies inside their
// convex hull. Returns false for degenerate subsets.
bool project_origin(const PointList& pts, Point& out) {
  const std::size_t k = pts.size();
  if (k == 1) {
    out = pts[0];
    return true;
  }
  const auto dim = pts[0].size();
  Eigen::MatrixXd edges(dim, k - 1);
  for (std::size_t i = 1; i < k; ++i) edges.col(i - 1) = pts[i] - pts[0];
  const Eigen::MatrixXd gram = edges.transpose() * edges;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-14);
  if (lu.rank() < static_cast<Eigen::Index>(k - 1)) return false;
  const Eigen::VectorXd mu = lu.solve(-edges.transpose() * Eigen::VectorXd(pts[0]));
  const double lambda0 = 1.0 - mu.sum();
  if (lambda0 < -1e-12 || (mu.array() < -1e-12).any()) return false;
  out = pts[0] + edges * mu;
  return true;
}

// Reduces the simplex to the smallest face containing its closest point to the origin.
Point closest_on_simplex(PointList& simplex) {
  const std::size_t n = simplex.size();
  double best = kInf;
  Point best_point = simplex[0];
  unsigned best_mask = 1;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    PointList subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(simplex[i]);
    }
    Point candidate;
    if (!project_origin(subset, candidate)) continue;
    const double norm = candidate.squaredNorm();
    if (norm < best - 1e-18 ||
        (norm <= best + 1e-18 && std::popcount(mask) < std::popcount(best_mask))) {
      best = norm;
      best_point = candidate;
      best_mask = mask;
    }
  }
  PointList reduced;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask & (1u << i)) reduced.push_back(simplex[i]);
  }
  simplex = std::move(reduced);
  return best_point;
}

const Point& support(std::span<const Point> pts, const Point& dir) {
  std::size_t best = 0;
  double best_dot = pts[0].dot(dir);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i].dot(dir);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return pts[best];
}

}  // namespace

namespace detail {

double gjk_distance(std::span<const Point> a, std::span<const Point> b) {
  const auto dim = a.front().size();
  Point v = a.front() - b.front();
  PointList simplex{v};
  for (int iter = 0; iter < 128; ++iter) {
    const double vv = v.squaredNorm();
    if (vv < 1e-28) return 0.0;
    const Point w = support(a, -v) - support(b, v);
    if (vv - v.dot(w) <= 1e-13 * vv) break;
    if (std::any_of(simplex.begin(), simplex.end(), [&](const Point& s) { return (s - w).squaredNorm() < 1e-28; })) {
      break;
    }
    simplex.push_back(w);
    v = closest_on_simplex(simplex);
    if (simplex.size() == static_cast<std::size_t>(dim + 1)) return 0.0;
  }
  return v.norm();
}

double polygon_distance_2d(const PointList& ha, const PointList& hb) {
  if (ha.size() >= 3) {
    for (const auto& p : hb) {
      if (inside_convex_polygon(p, ha)) return 0.0;
    }
  }
  if (hb.size() >= 3) {
    for (const auto& p : ha) {
      if (inside_convex_polygon(p, hb)) return 0.0;
    }
  }
  auto edge_count = [](const PointList& h) { return h.size() <= 2 ? std::size_t{1} : h.size(); };
  auto edge = [](const PointList& h, std::size_t i) -> std::pair<const Point&, const Point&> {
    if (h.size() == 1) return {h[0], h[0]};
    if (h.size() == 2) return {h[0], h[1]};
    return {h[i], h[(i + 1) % h.size()]};
  };
  double best = kInf;
  for (std::size_t i = 0; i < edge_count(ha); ++i) {
    const auto [a0, a1] = edge(ha, i);
    for (std::size_t j = 0; j < edge_count(hb); ++j) {
      const auto [b0, b1] = edge(hb, j);
      best = std::min(best, segment_segment_distance_2d(a0, a1, b0, b1));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

}  // namespace detail

HalfSpace HalfSpace::from_unnormalized(const Point& a, double b) {
  const double n = a.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(b)) {
    throw std::invalid_argument("HalfSpace: normal must be finite and nonzero");
  }
  return {a / n, b / n};
}

ConvexObstacle::ConvexObstacle(PointList vertices) {
  check_points(vertices);
  const auto dim = vertices.front().size();
  const std::size_t min_count = dim == 2 ? 3 : 4;
  if (vertices.size() < min_count) throw std::invalid_argument("ConvexObstacle: too few vertices");
  Hull hull = convex_hull(vertices);
  if (hull.degenerate) throw std::invalid_argument("ConvexObstacle: degenerate (zero area/volume)");
  if (hull.vertices.size() != vertices.size()) {
    throw std::invalid_argument("ConvexObstacle: vertex list is not its own convex hull");
  }
  vertices_ = std::move(hull.vertices);
}

Hull convex_hull(std::span<const Point> points) {
  check_points(points);
  return points.front().size() == 2 ? hull_2d(points) : hull_3d(points);
}

double hull_distance(std::span<const Point> a, std::span<const Point> b) {
  check_points(a);
  check_points(b);
  if (a.front().size() != b.front().size()) throw std::invalid_argument("hull_distance: dimension mismatch");
  if (a.front().size() == 2) {
    return detail::polygon_distance_2d(hull_2d(a).vertices, hull_2d(b).vertices);
  }
  return detail::gjk_distance(a, b);
}

bool hull_clear_of(std::span<const Point> hull, const ConvexObstacle& obstacle, double clearance) {
  if (clearance < 0.0) throw std::invalid_argument("hull_clear_of: negative clearance");
  check_points(hull);
  double d = 0.0;
  if (obstacle.dim() == 2) {
    d = detail::polygon_distance_2d(hull_2d(hull).vertices, obstacle.vertices());
  } else {
    d = detail::gjk_distance(hull, obstacle.vertices());
  }
  return d >= clearance;
}

double clearance_of(const Point& p, std::span<const ConvexObstacle> obstacles) {
  double best = kInf;
  const PointList single{p};
  for (const auto& o : obstacles) {
    const double d = o.dim() == 2 ? detail::polygon_distance_2d(single, o.vertices())
                                  : detail::gjk_distance(single, o.vertices());
    best = std::min(best, d);
  }
  return best;
}

BallFacets norm_ball_facets(double radius, int facet_count, int dim) {
  if (!(radius > 0.0)) throw std::invalid_argument("norm_ball_facets: radius must be positive");
  BallFacets out;
  if (dim == 2) {
    if (facet_count < 3) throw std::invalid_argument("norm_ball_facets: need at least 3 facets");
    const double m = facet_count;
    for (int j = 0; j < facet_count; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / m;
      Point n(2);
      n << std::cos(angle), std::sin(angle);
      out.normals.push_back(n);
    }
    out.offset = radius * std::cos(std::numbers::pi / m);
    return out;
  }
  if (dim != 3) throw std::invalid_argument("norm_ball_facets: dimension must be 2 or 3");

  const double phi = std::numbers::phi;
  PointList verts;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      verts.push_back(Point(Eigen::Vector3d(0.0, s1, s2 * phi)));
      verts.push_back(Point(Eigen::Vector3d(s1, s2 * phi, 0.0)));
      verts.push_back(Point(Eigen::Vector3d(s2 * phi, 0.0, s1)));
    }
  }
  // Faces are the triples of mutually adjacent vertices (edge length 2).
  auto adjacent = [&](std::size_t i, std::size_t j) { return std::abs((verts[i] - verts[j]).norm() - 2.0) < 1e-9; };
  double inradius = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      if (!adjacent(i, j)) continue;
      for (std::size_t k = j + 1; k < verts.size(); ++k) {
        if (!adjacent(i, k) || !adjacent(j, k)) continue;
        const Point centroid = (verts[i] + verts[j] + verts[k]) / 3.0;
        inradius = centroid.norm();
        out.normals.push_back(centroid / inradius);
      }
    }
  }
  out.offset = radius * inradius / verts.front().norm();
  return out;
}

PointList halfspace_vertices(std::span<const HalfSpace> halfspaces, int dim) {
  PointList out;
  const std::size_t n = halfspaces.size();
  auto feasible = [&](const Point& x) {
    return std::all_of(halfspaces.begin(), halfspaces.end(),
                       [&](const HalfSpace& h) { return h.slack(x) >= -1e-9 * (1.0 + std::abs(h.offset)); });
  };
  if (dim == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Eigen::Matrix2d m;
        m.row(0) = halfspaces[i].normal.transpose();
        m.row(1) = halfspaces[j].normal.transpose();
        if (std::abs(m.determinant()) < 1e-12) continue;
        const Eigen::Vector2d x = m.inverse() * Eigen::Vector2d(halfspaces[i].offset, halfspaces[j].offset);
        const Point p = x;
        if (feasible(p)) out.push_back(p);
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        Eigen::Matrix3d m;
        m.row(0) = halfspaces[i].normal.transpose();
        m.row(1) = halfspaces[j].normal.transpose();
        m.row(2) = halfspaces[k].normal.transpose();
        if (std::abs(m.determinant()) < 1e-12) continue;
        const Eigen::Vector3d x =
            m.inverse() * Eigen::Vector3d(halfspaces[i].offset, halfspaces[j].offset, halfspaces[k].offset);
        const Point p = x;
        if (feasible(p)) out.push_back(p);
      }
    }
  }
  return out;
}

Point closest_on_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  return (p - closest_on_segment(p, a, b)).norm();
}

std::vector<HalfSpace> box_halfspaces(const Point& center, double half_width) {
  std::vector<HalfSpace> out;
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    Point e = Point::Zero(center.size());
    e[i] = 1.0;
    out.push_back({e, center[i] - half_width});
    out.push_back({-e, -(center[i] + half_width)});
  }
  return out;
}

}  // namespace swarm::geom
