#include "swarm/dynamics.hpp"

#include <stdexcept>

namespace swarm::dyn {

geom::PointList Trajectory::positions() const {
  geom::PointList out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.p);
  return out;
}

void Limits::validate(int dim) const {
  if (!(v_max > 0.0)) throw std::invalid_argument("limits: v_max must be positive");
  if (!(a_max > 0.0)) throw std::invalid_argument("limits: a_max must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("limits: h must be positive");
  if (K < 2) throw std::invalid_argument("limits: K must be at least 2");
  if (dim == 2 && facets < 3) throw std::invalid_argument("limits: facets must be at least 3");
  for (const auto* theta : {&theta_v, &theta_a}) {
    if (theta->size() == 0) continue;
    if (theta->rows() != dim || theta->cols() != dim) throw std::invalid_argument("limits: theta has wrong size");
    if ((*theta - theta->transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("limits: theta must be symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(*theta).info() != Eigen::Success) {
      throw std::invalid_argument("limits: theta must be positive definite");
    }
  }
}

Eigen::MatrixXd Limits::theta_v_or_identity(int dim) const {
  return theta_v.size() == 0 ? Eigen::MatrixXd::Identity(dim, dim) : theta_v;
}

Eigen::MatrixXd Limits::theta_a_or_identity(int dim) const {
  return theta_a.size() == 0 ? Eigen::MatrixXd::Identity(dim, dim) : theta_a;
}

double Limits::max_accel_norm(int dim) const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(theta_a_or_identity(dim));
  return a_max / eig.eigenvalues().minCoeff();
}

State step(const State& x, const Point& u, double h) {
  return {x.p + h * x.v + 0.5 * h * h * u, x.v + h * u};
}

Trajectory rollout(const State& x0, std::span<const Point> inputs, double h) {
  Trajectory traj;
  traj.start = x0;
  traj.inputs.assign(inputs.begin(), inputs.end());
  State x = x0;
  for (const auto& u : inputs) {
    x = step(x, u, h);
    traj.states.push_back(x);
  }
  return traj;
}

Point position_within_step(const State& x, const Point& u, double s) {
  return x.p + s * x.v + 0.5 * s * s * u;
}

Eigen::VectorXd CondensedMaps::p_affine(const State& x0) const {
  Eigen::VectorXd x(2 * dim);
  x << x0.p, x0.v;
  return Px * x;
}

Eigen::VectorXd CondensedMaps::v_affine(const State& x0) const {
  Eigen::VectorXd x(2 * dim);
  x << x0.p, x0.v;
  return Vx * x;
}

CondensedMaps condensed_maps(int K, double h, int dim) {
  if (K < 1) throw std::invalid_argument("condensed_maps: K must be positive");
  CondensedMaps m;
  m.K = K;
  m.dim = dim;
  const int n = K * dim;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  m.P = Eigen::MatrixXd::Zero(n, n);
  m.V = Eigen::MatrixXd::Zero(n, n);
  m.Px = Eigen::MatrixXd::Zero(n, 2 * dim);
  m.Vx = Eigen::MatrixXd::Zero(n, 2 * dim);
  for (int k = 1; k <= K; ++k) {
    const int row = (k - 1) * dim;
    // p_k = p0 + k h v0 + sum_{j<k} h^2 (k - j - 1/2) u_j ;  v_k = v0 + h sum_{j<k} u_j
    m.Px.block(row, 0, dim, dim) = eye;
    m.Px.block(row, dim, dim, dim) = k * h * eye;
    m.Vx.block(row, dim, dim, dim) = eye;
    for (int j = 0; j < k; ++j) {
      m.P.block(row, j * dim, dim, dim) = h * h * (k - j - 0.5) * eye;
      m.V.block(row, j * dim, dim, dim) = h * eye;
    }
  }
  return m;
}

}  // namespace swarm::dyn
