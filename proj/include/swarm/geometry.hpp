#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace swarm::geom {

/// Position or direction in 2D or 3D. Storage is inline (max 3 coefficients).
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using PointList = std::vector<Point>;

/// Closed half-space {x : normal·x >= offset} with a unit normal.
struct HalfSpace {
  Point normal;
  double offset = 0.0;

  /// Rescales an arbitrary nonzero (a, b) so that |normal| = 1. The set is unchanged.
  static HalfSpace from_unnormalized(const Point& a, double b);

  double slack(const Point& p) const { return normal.dot(p) - offset; }
  bool satisfied(const Point& p, double tol = 0.0) const { return slack(p) >= -tol; }
};

/// Convex polytope given by its vertices (counterclockwise in 2D).
class ConvexObstacle {
 public:
  /// Throws std::invalid_argument unless the vertex list is a non-degenerate hull of itself.
  explicit ConvexObstacle(PointList vertices);

  const PointList& vertices() const { return vertices_; }
  int dim() const { return static_cast<int>(vertices_.front().size()); }

 private:
  PointList vertices_;
};

struct Hull {
  PointList vertices;
  /// True when the hull has no interior (point, segment, or flat 3D set).
  bool degenerate = false;
};

/// Minimal vertex list of the convex hull. 2D output is counterclockwise starting at the
/// lexicographically smallest vertex; 3D output keeps the extreme points in sorted order.
Hull convex_hull(std::span<const Point> points);

/// Euclidean distance between conv(a) and conv(b); 0 iff they intersect.
double hull_distance(std::span<const Point> a, std::span<const Point> b);

/// hull_distance(hull, obstacle) >= clearance. Touching at zero clearance counts as clear.
bool hull_clear_of(std::span<const Point> hull, const ConvexObstacle& obstacle, double clearance);

/// Smallest distance from p to any obstacle (infinity if none).
double clearance_of(const Point& p, std::span<const ConvexObstacle> obstacles);

/// Inscribed polytope {x : n_j·x <= offset} of the ball of the given radius.
struct BallFacets {
  PointList normals;
  double offset = 0.0;
};

/// 2D: m normals at angles 2*pi*j/m with offset radius*cos(pi/m). 3D: the 20 face normals
/// of a regular icosahedron with the offset that inscribes it in the ball (m is ignored).
BallFacets norm_ball_facets(double radius, int facet_count, int dim = 2);

/// Vertices of the bounded polytope {x : h.slack(x) >= 0 for all h}, by enumerating
/// d-subsets of the bounding planes. Empty when the polytope is empty.
PointList halfspace_vertices(std::span<const HalfSpace> halfspaces, int dim);

/// Point on segment [a, b] closest to p.
Point closest_on_segment(const Point& p, const Point& a, const Point& b);

double point_segment_distance(const Point& p, const Point& a, const Point& b);

/// Axis-aligned box around `center` with half-width `half_width` as 2*dim half-spaces.
std::vector<HalfSpace> box_halfspaces(const Point& center, double half_width);

}  // namespace swarm::geom
