#include "swarm/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarm::coord {

void InterRobotParams::validate() const {
  if (!(r_min > 0.0)) throw std::invalid_argument("inter-robot: r_min must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("inter-robot: epsilon must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("inter-robot: beta must lie in (0, 1)");
  if (!(rho0 > 0.0)) throw std::invalid_argument("inter-robot: rho0 must be positive");
  if (!(delta_eta > 0.0)) throw std::invalid_argument("inter-robot: delta_eta must be positive");
  if (!(eta_max >= 0.0)) throw std::invalid_argument("inter-robot: eta_max must be non-negative");
  if (!(overlap_tol > 0.0)) throw std::invalid_argument("inter-robot: overlap_tol must be positive");
}

double extended_min_distance(double r_min, double h, double v_max) {
  return std::sqrt(r_min * r_min + h * h * v_max * v_max);
}

HalfSpace mbvc_halfspace(const Point& pi, const Point& pj, double r_prime, const std::optional<Eigen::MatrixXd>& E) {
  const Point mid = 0.5 * (pi + pj);
  if (!E) {
    const Point d = pi - pj;
    const double len = d.norm();
    if (len < 1e-9) throw CoincidentRobots("mbvc_halfspace: coincident predetermined points");
    const Point a = d / len;
    return {a, a.dot(mid) + 0.5 * r_prime};
  }
  const Point ed = *E * (pi - pj);
  const double len = ed.norm();
  if (len < 1e-9) throw CoincidentRobots("mbvc_halfspace: coincident predetermined points");
  const Point n = ed / len;
  const Point en = E->transpose() * n;
  const double scale = en.norm();
  return {en / scale, (en.dot(mid) + 0.5 * r_prime) / scale};
}

std::vector<NeighborConstraints> interrobot_constraints(const PointList& own_pred,
                                                        std::span<const NeighborPrediction> neighbors,
                                                        double r_prime, const std::optional<Eigen::MatrixXd>& E) {
  const std::size_t K = own_pred.size();
  if (K < 1) throw std::invalid_argument("interrobot_constraints: empty predetermined trajectory");
  std::vector<NeighborConstraints> out;
  out.reserve(neighbors.size());
  for (const auto& nb : neighbors) {
    if (nb.pred.size() != K) throw std::invalid_argument("interrobot_constraints: horizon mismatch");
    NeighborConstraints c;
    c.neighbor = nb.id;
    try {
      for (std::size_t k = 0; k + 1 < K; ++k) c.hard.push_back(mbvc_halfspace(own_pred[k], nb.pred[k], r_prime, E));
      c.terminal = mbvc_halfspace(own_pred[K - 1], nb.pred[K - 1], r_prime, E);
    } catch (const CoincidentRobots& e) {
      throw CoincidentRobots(std::string(e.what()) + " (neighbour " + std::to_string(nb.id) + ")");
    }
    out.push_back(std::move(c));
  }
  return out;
}

double warning_band_coefficient(double gamma, double rho, double epsilon) {
  if (!(gamma > 0.0)) throw std::invalid_argument("warning_band_coefficient: gamma must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("warning_band_coefficient: rho must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("warning_band_coefficient: epsilon must be positive");
  return rho / (epsilon * gamma);
}

double update_gamma(double gamma_prev, double w_prev, double beta, double epsilon) {
  return std::max((1.0 - beta) * gamma_prev + beta * w_prev, 1e-6 * epsilon);
}

bool detect_terminal_overlap(const PointList& planned, const PointList& planned_prev, const Point& target,
                             double tol_pos) {
  if (planned.size() < 2 || planned_prev.empty()) return false;
  const Point& pK = planned.back();
  return (pK - target).norm() > tol_pos && (pK - planned_prev.back()).norm() <= tol_pos &&
         (pK - planned[planned.size() - 2]).norm() <= tol_pos;
}

double update_eta(double eta_prev, bool b_to, bool no_band_contact, double delta_eta, double eta_max) {
  if (b_to) return std::min(eta_prev + delta_eta, std::max(eta_prev, eta_max));
  if (no_band_contact) return 0.0;
  return eta_prev;
}

double bearing_angle(const Point& own_terminal, const Point& target, const Point& neighbor_terminal) {
  const Eigen::Vector2d g = (target - own_terminal).head<2>();
  const Eigen::Vector2d n = (neighbor_terminal - own_terminal).head<2>();
  if (g.norm() < 1e-9 || n.norm() < 1e-9) return 0.0;
  const double cross = g.x() * n.y() - g.y() * n.x();
  const double theta = std::atan2(cross, g.dot(n));
  return theta == -M_PI ? M_PI : theta;
}

double rho(double rho0, double eta, double theta) { return rho0 * std::exp(eta * std::sin(theta)); }

RobotRuntime RobotRuntime::initial(const Point& start, const Point& target, int K,
                                   std::span<const std::size_t> neighbors, double epsilon) {
  RobotRuntime rt;
  rt.pred.assign(static_cast<std::size_t>(K), start);
  for (auto j : neighbors) rt.gamma[j] = epsilon;
  rt.target = target;
  return rt;
}

}  // namespace swarm::coord
