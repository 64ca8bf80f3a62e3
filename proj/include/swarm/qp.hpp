#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

#include "swarm/geometry.hpp"

namespace swarm::qp {

/// Per-variable box lower <= z <= upper (use +-infinity for open sides).
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// minimize 1/2 z'Hz + f'z  subject to  A_ineq z >= b_ineq,  A_eq z = b_eq,  box.
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  std::optional<Box> bounds;

  /// Empty problem over n variables (zero cost, no constraints).
  static QuadraticProgram with_variables(Eigen::Index n);
  Eigen::Index num_variables() const { return f.size(); }
  double objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + f.dot(z); }
};

enum class QpStatus { optimal, infeasible, max_iter };

std::string to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd z;
  QpStatus status = QpStatus::max_iter;
  double kkt_residual = 0.0;
  double objective = 0.0;
  /// Multipliers for A_ineq rows (>= 0), A_eq rows, and box sides (lower, upper; >= 0).
  Eigen::VectorXd lambda_ineq;
  Eigen::VectorXd mu_eq;
  Eigen::VectorXd lambda_lower;
  Eigen::VectorXd lambda_upper;
  int iterations = 0;
};

struct SolverOptions {
  int max_iter = 20000;
  /// Constraint violation below which a row counts as satisfied.
  double feasibility_tol = 1e-10;
  /// Diagonal shift applied when H alone fails the Cholesky test.
  double regularization = 1e-10;
};

/// Dense Goldfarb-Idnani dual active-set solver.
///
/// Every iterate is dual feasible and the active constraints hold with equality, so an
/// `optimal` answer is primal feasible to round-off. `infeasible` is returned only when
/// a violated row cannot be made active (a dual ray exists). Throws std::invalid_argument
/// on dimension mismatch or an H that is not positive semidefinite.
QpSolution solve_qp(const QuadraticProgram& qp, const SolverOptions& options = {});

/// Max of stationarity, complementarity and dual-sign violation for a candidate pair.
double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol);

/// Largest violation of any constraint of qp at z (0 when feasible).
double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& z);

struct SeparatingPlane {
  geom::HalfSpace plane;  ///< free points on the positive side
  double margin = 0.0;    ///< free points satisfy normal·p >= offset + margin
};

/// Maximum-margin plane between conv(free_pts) and the obstacle.
///
/// Solves min |a'|^2 s.t. a'·p_free >= 1 + b', a'·p_obs <= b' with b' eliminated
/// (a'·(p_free - p_obs) >= 1 for every pair, then b' = max a'·p_obs), and returns
/// normal = a'/|a'|, offset = b'/|a'|, margin = 1/|a'|.
/// Throws std::invalid_argument if the sets are not strictly separable.
SeparatingPlane separating_plane(std::span<const geom::Point> free_pts, const geom::ConvexObstacle& obstacle);

}  // namespace swarm::qp
