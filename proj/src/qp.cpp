#include "swarm/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace swarm::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowKind { ineq, lower, upper };

// Row of the normalized system n·z >= c (or = c for equalities).
struct Row {
  Eigen::VectorXd normal;
  double bound = 0.0;
  double scale = 1.0;  // |original row|
  RowKind kind = RowKind::ineq;
  Eigen::Index source = 0;
};

void check_dimensions(const QuadraticProgram& qp) {
  const Eigen::Index n = qp.f.size();
  if (qp.H.rows() != n || qp.H.cols() != n) throw std::invalid_argument("solve_qp: H must be n x n");
  if (qp.A_ineq.rows() != qp.b_ineq.size() || (qp.A_ineq.rows() > 0 && qp.A_ineq.cols() != n)) {
    throw std::invalid_argument("solve_qp: inequality block has inconsistent dimensions");
  }
  if (qp.A_eq.rows() != qp.b_eq.size() || (qp.A_eq.rows() > 0 && qp.A_eq.cols() != n)) {
    throw std::invalid_argument("solve_qp: equality block has inconsistent dimensions");
  }
  if (qp.bounds && (qp.bounds->lower.size() != n || qp.bounds->upper.size() != n)) {
    throw std::invalid_argument("solve_qp: bounds have inconsistent dimensions");
  }
  if (!qp.H.allFinite() || !qp.f.allFinite() || !qp.A_ineq.allFinite() || !qp.A_eq.allFinite() ||
      !qp.b_ineq.allFinite() || !qp.b_eq.allFinite()) {
    throw std::invalid_argument("solve_qp: non-finite data");
  }
  if ((qp.H - qp.H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, qp.H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("solve_qp: H is not symmetric");
  }
}

// Goldfarb-Idnani working set. J = L^{-T} rotated so that J^T N = [R; 0] for the active
// normals N; the trailing columns of J span the null space of the active set.
class DualActiveSet {
 public:
  DualActiveSet(const Eigen::MatrixXd& g, const Eigen::VectorXd& f) : n_(f.size()) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    const Eigen::MatrixXd lt = llt.matrixU();
    j_ = lt.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n_, n_));
    r_ = Eigen::MatrixXd::Zero(n_, n_);
    x_ = -j_ * (j_.transpose() * f);
  }

  const Eigen::VectorXd& x() const { return x_; }
  Eigen::Index active_count() const { return q_; }

  // Primal step direction z and dual step r for adding normal `n`.
  void directions(const Eigen::VectorXd& n, Eigen::VectorXd& z, Eigen::VectorXd& r, double& null_ratio) const {
    const Eigen::VectorXd d = j_.transpose() * n;
    const auto tail = d.tail(n_ - q_);
    z = j_.rightCols(n_ - q_) * tail;
    r = r_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
    const double dn = d.norm();
    null_ratio = dn > 0.0 ? tail.norm() / dn : 0.0;
  }

  void move(const Eigen::VectorXd& z, double t) { x_ += t * z; }

  bool add(const Eigen::VectorXd& n) {
    if (q_ >= n_) return false;
    Eigen::VectorXd d = j_.transpose() * n;
    for (Eigen::Index k = n_ - 1; k > q_; --k) {
      const double h = std::hypot(d[k - 1], d[k]);
      if (h == 0.0) continue;
      const double c = d[k - 1] / h;
      const double s = d[k] / h;
      d[k - 1] = h;
      d[k] = 0.0;
      const Eigen::VectorXd a = j_.col(k - 1);
      const Eigen::VectorXd b = j_.col(k);
      j_.col(k - 1) = c * a + s * b;
      j_.col(k) = -s * a + c * b;
    }
    if (std::abs(d[q_]) <= 1e-12 * std::max(1.0, d.norm())) return false;
    r_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    ++q_;
    return true;
  }

  void drop(Eigen::Index l) {
    for (Eigen::Index k = l; k + 1 < q_; ++k) r_.col(k) = r_.col(k + 1);
    r_.col(q_ - 1).setZero();
    --q_;
    for (Eigen::Index k = l; k < q_; ++k) {
      const double h = std::hypot(r_(k, k), r_(k + 1, k));
      if (h == 0.0) continue;
      const double c = r_(k, k) / h;
      const double s = r_(k + 1, k) / h;
      for (Eigen::Index col = k; col < q_; ++col) {
        const double a = r_(k, col);
        const double b = r_(k + 1, col);
        r_(k, col) = c * a + s * b;
        r_(k + 1, col) = -s * a + c * b;
      }
      r_(k + 1, k) = 0.0;
      const Eigen::VectorXd a = j_.col(k);
      const Eigen::VectorXd b = j_.col(k + 1);
      j_.col(k) = c * a + s * b;
      j_.col(k + 1) = -s * a + c * b;
    }
  }

 private:
  Eigen::Index n_;
  Eigen::Index q_ = 0;
  Eigen::MatrixXd j_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd x_;
};

}  // namespace

QuadraticProgram QuadraticProgram::with_variables(Eigen::Index n) {
  QuadraticProgram qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.f = Eigen::VectorXd::Zero(n);
  qp.A_ineq.resize(0, n);
  qp.b_ineq.resize(0);
  qp.A_eq.resize(0, n);
  qp.b_eq.resize(0);
  return qp;
}

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::infeasible:
      return "infeasible";
    case QpStatus::max_iter:
      return "max_iter";
  }
  return "unknown";
}

QpSolution solve_qp(const QuadraticProgram& qp, const SolverOptions& options) {
  check_dimensions(qp);
  const Eigen::Index n = qp.f.size();

  Eigen::MatrixXd g = qp.H;
  if (Eigen::LLT<Eigen::MatrixXd>(g).info() != Eigen::Success) {
    g.diagonal().array() += options.regularization * std::max(1.0, qp.H.diagonal().cwiseAbs().maxCoeff());
    if (Eigen::LLT<Eigen::MatrixXd>(g).info() != Eigen::Success) {
      throw std::invalid_argument("solve_qp: H is not positive semidefinite");
    }
  }

  QpSolution sol;
  sol.lambda_ineq = Eigen::VectorXd::Zero(qp.A_ineq.rows());
  sol.mu_eq = Eigen::VectorXd::Zero(qp.A_eq.rows());
  sol.lambda_lower = Eigen::VectorXd::Zero(n);
  sol.lambda_upper = Eigen::VectorXd::Zero(n);

  auto finish = [&](const Eigen::VectorXd& x, QpStatus status) {
    sol.z = x;
    sol.status = status;
    sol.objective = qp.objective(x);
    sol.kkt_residual = kkt_residual(qp, sol);
    return sol;
  };

  // Normalized rows. Zero rows are either trivially satisfied or a certificate.
  std::vector<Row> eqs;
  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < qp.A_eq.rows(); ++i) {
    const double s = qp.A_eq.row(i).norm();
    if (s == 0.0) {
      if (std::abs(qp.b_eq[i]) > options.feasibility_tol) return finish(Eigen::VectorXd::Zero(n), QpStatus::infeasible);
      continue;
    }
    eqs.push_back({qp.A_eq.row(i).transpose() / s, qp.b_eq[i] / s, s, RowKind::ineq, i});
  }
  for (Eigen::Index i = 0; i < qp.A_ineq.rows(); ++i) {
    const double s = qp.A_ineq.row(i).norm();
    if (s == 0.0) {
      if (qp.b_ineq[i] > options.feasibility_tol) return finish(Eigen::VectorXd::Zero(n), QpStatus::infeasible);
      continue;
    }
    rows.push_back({qp.A_ineq.row(i).transpose() / s, qp.b_ineq[i] / s, s, RowKind::ineq, i});
  }
  if (qp.bounds) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (qp.bounds->lower[i] > qp.bounds->upper[i]) return finish(Eigen::VectorXd::Zero(n), QpStatus::infeasible);
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
      if (std::isfinite(qp.bounds->lower[i])) rows.push_back({e, qp.bounds->lower[i], 1.0, RowKind::lower, i});
      if (std::isfinite(qp.bounds->upper[i])) rows.push_back({-e, -qp.bounds->upper[i], 1.0, RowKind::upper, i});
    }
  }

  DualActiveSet ws(g, qp.f);
  // Active set bookkeeping: entries >= 0 index `rows`, entries < 0 encode equality -(k+1).
  std::vector<long> active;
  std::vector<double> u;
  std::vector<char> is_active(rows.size(), 0);
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  double null_ratio = 0.0;

  for (std::size_t k = 0; k < eqs.size(); ++k) {
    const Row& e = eqs[k];
    ws.directions(e.normal, z, r, null_ratio);
    const double s = e.normal.dot(ws.x()) - e.bound;
    if (null_ratio <= 1e-10) {
      // Linearly dependent on earlier equalities: redundant or contradictory.
      if (std::abs(s) > std::sqrt(options.feasibility_tol)) return finish(ws.x(), QpStatus::infeasible);
      continue;
    }
    const double t = -s / z.dot(e.normal);
    ws.move(z, t);
    for (std::size_t a = 0; a < u.size(); ++a) u[a] -= t * r[static_cast<Eigen::Index>(a)];
    if (!ws.add(e.normal)) continue;
    active.push_back(-static_cast<long>(k) - 1);
    u.push_back(t);
  }

  int iter = 0;
  for (;;) {
    // Most violated inactive row.
    long p = -1;
    double worst = -options.feasibility_tol;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (is_active[i]) continue;
      const double s = rows[i].normal.dot(ws.x()) - rows[i].bound;
      if (s < worst) {
        worst = s;
        p = static_cast<long>(i);
      }
    }
    if (p < 0) break;

    const Row& row = rows[static_cast<std::size_t>(p)];
    double u_plus = 0.0;
    double s_p = worst;
    for (;;) {
      if (++iter > options.max_iter) {
        sol.iterations = iter - 1;
        return finish(ws.x(), QpStatus::max_iter);
      }
      ws.directions(row.normal, z, r, null_ratio);
      double t1 = kInf;
      long l = -1;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (active[a] < 0) continue;
        const double ra = r[static_cast<Eigen::Index>(a)];
        if (ra > 0.0 && u[a] / ra < t1) {
          t1 = u[a] / ra;
          l = static_cast<long>(a);
        }
      }
      const double zn = z.dot(row.normal);
      const double t2 = (null_ratio > 1e-10 && zn > 0.0) ? -s_p / zn : kInf;
      if (t1 == kInf && t2 == kInf) {
        sol.iterations = iter;
        return finish(ws.x(), QpStatus::infeasible);
      }
      const double t = std::min(t1, t2);
      if (t2 != kInf) ws.move(z, t);
      for (std::size_t a = 0; a < u.size(); ++a) u[a] -= t * r[static_cast<Eigen::Index>(a)];
      u_plus += t;
      if (t2 <= t1) {
        if (!ws.add(row.normal)) {
          sol.iterations = iter;
          return finish(ws.x(), QpStatus::max_iter);
        }
        active.push_back(p);
        u.push_back(u_plus);
        is_active[static_cast<std::size_t>(p)] = 1;
        break;
      }
      // Partial step: drop the blocking constraint and retry the same row.
      const auto li = static_cast<std::size_t>(l);
      is_active[static_cast<std::size_t>(active[li])] = 0;
      ws.drop(static_cast<Eigen::Index>(li));
      active.erase(active.begin() + static_cast<long>(li));
      u.erase(u.begin() + static_cast<long>(li));
      s_p = row.normal.dot(ws.x()) - row.bound;
    }
  }

  sol.iterations = iter;
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (active[a] < 0) {
      const Row& e = eqs[static_cast<std::size_t>(-active[a] - 1)];
      sol.mu_eq[e.source] = u[a] / e.scale;
      continue;
    }
    const Row& row = rows[static_cast<std::size_t>(active[a])];
    switch (row.kind) {
      case RowKind::ineq:
        sol.lambda_ineq[row.source] = u[a] / row.scale;
        break;
      case RowKind::lower:
        sol.lambda_lower[row.source] = u[a];
        break;
      case RowKind::upper:
        sol.lambda_upper[row.source] = u[a];
        break;
    }
  }
  return finish(ws.x(), QpStatus::optimal);
}

double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  const Eigen::VectorXd& z = sol.z;
  Eigen::VectorXd grad = qp.H * z + qp.f;
  double worst = 0.0;
  if (qp.A_ineq.rows() > 0) {
    grad -= qp.A_ineq.transpose() * sol.lambda_ineq;
    const Eigen::VectorXd s = qp.A_ineq * z - qp.b_ineq;
    worst = std::max(worst, (sol.lambda_ineq.array() * s.array()).abs().maxCoeff());
    worst = std::max(worst, (-sol.lambda_ineq.array()).maxCoeff());
  }
  if (qp.A_eq.rows() > 0) grad -= qp.A_eq.transpose() * sol.mu_eq;
  if (qp.bounds) {
    grad -= sol.lambda_lower;
    grad += sol.lambda_upper;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (sol.lambda_lower[i] != 0.0) worst = std::max(worst, std::abs(sol.lambda_lower[i] * (z[i] - qp.bounds->lower[i])));
      if (sol.lambda_upper[i] != 0.0) worst = std::max(worst, std::abs(sol.lambda_upper[i] * (qp.bounds->upper[i] - z[i])));
    }
    worst = std::max({worst, (-sol.lambda_lower.array()).maxCoeff(), (-sol.lambda_upper.array()).maxCoeff()});
  }
  if (grad.size() > 0) worst = std::max(worst, grad.cwiseAbs().maxCoeff());
  return worst;
}

double max_violation(const QuadraticProgram& qp, const Eigen::VectorXd& z) {
  double worst = 0.0;
  if (qp.A_ineq.rows() > 0) worst = std::max(worst, (qp.b_ineq - qp.A_ineq * z).maxCoeff());
  if (qp.A_eq.rows() > 0) worst = std::max(worst, (qp.A_eq * z - qp.b_eq).cwiseAbs().maxCoeff());
  if (qp.bounds) {
    worst = std::max(worst, (qp.bounds->lower - z).maxCoeff());
    worst = std::max(worst, (z - qp.bounds->upper).maxCoeff());
  }
  return worst;
}

SeparatingPlane separating_plane(std::span<const geom::Point> free_pts, const geom::ConvexObstacle& obstacle) {
  if (free_pts.empty()) throw std::invalid_argument("separating_plane: no free points");
  const int dim = obstacle.dim();
  const geom::PointList free_hull = geom::convex_hull(free_pts).vertices;
  const auto& obs = obstacle.vertices();

  QuadraticProgram qp = QuadraticProgram::with_variables(dim);
  qp.H = 2.0 * Eigen::MatrixXd::Identity(dim, dim);
  qp.A_ineq.resize(static_cast<Eigen::Index>(free_hull.size() * obs.size()), dim);
  qp.b_ineq = Eigen::VectorXd::Ones(qp.A_ineq.rows());
  Eigen::Index row = 0;
  for (const auto& pf : free_hull) {
    for (const auto& po : obs) qp.A_ineq.row(row++) = (pf - po).transpose();
  }
  const QpSolution sol = solve_qp(qp);
  if (sol.status != QpStatus::optimal) {
    throw std::invalid_argument("separating_plane: point sets are not strictly separable");
  }
  const geom::Point a = sol.z;
  double b = -kInf;
  for (const auto& po : obs) b = std::max(b, a.dot(po));
  const double len = a.norm();
  if (!(len > 0.0)) throw std::invalid_argument("separating_plane: degenerate separator");
  return {{a / len, b / len}, 1.0 / len};
}

}  // namespace swarm::qp
