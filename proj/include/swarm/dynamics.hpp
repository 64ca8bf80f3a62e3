#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm::dyn {

using geom::Point;

struct State {
  Point p;
  Point v;
};

/// Planned motion over a horizon of K steps: states x_1..x_K reached from `start` by
/// applying inputs u_0..u_{K-1}.
struct Trajectory {
  State start;
  std::vector<State> states;
  std::vector<Point> inputs;

  std::size_t horizon() const { return states.size(); }
  /// Position at step k in 0..K (k = 0 is the start).
  const Point& position(std::size_t k) const { return k == 0 ? start.p : states[k - 1].p; }
  geom::PointList positions() const;
};

struct Limits {
  double v_max = 3.0;
  double a_max = 2.0;
  Eigen::MatrixXd theta_v;  ///< empty means identity
  Eigen::MatrixXd theta_a;
  double h = 0.2;
  int K = 12;
  int facets = 16;

  void validate(int dim) const;
  Eigen::MatrixXd theta_v_or_identity(int dim) const;
  Eigen::MatrixXd theta_a_or_identity(int dim) const;
  /// Upper bound on |u| implied by |theta_a u| <= a_max.
  double max_accel_norm(int dim) const;
};

/// p+ = p + h v + h^2/2 u,  v+ = v + h u.
State step(const State& x, const Point& u, double h);

Trajectory rollout(const State& x0, std::span<const Point> inputs, double h);

/// Position at time s in [0, h] within one step under constant input.
Point position_within_step(const State& x, const Point& u, double s);

/// Linear input-to-state maps for the stacked input U = [u_0; ...; u_{K-1}]:
///   positions  = P * U + Px * [p0; v0]
///   velocities = V * U + Vx * [p0; v0]
/// Rows are grouped per step k = 1..K, d rows each.
struct CondensedMaps {
  int K = 0;
  int dim = 0;
  Eigen::MatrixXd P;
  Eigen::MatrixXd V;
  Eigen::MatrixXd Px;
  Eigen::MatrixXd Vx;

  Eigen::VectorXd p_affine(const State& x0) const;
  Eigen::VectorXd v_affine(const State& x0) const;
};

CondensedMaps condensed_maps(int K, double h, int dim);

}  // namespace swarm::dyn
