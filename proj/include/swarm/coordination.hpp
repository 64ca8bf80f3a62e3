#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarm/dynamics.hpp"
#include "swarm/geometry.hpp"
#include "swarm/pathfind.hpp"

namespace swarm::coord {

using geom::HalfSpace;
using geom::Point;
using geom::PointList;

/// Two predetermined points coincide, so no separating plane exists.
class CoincidentRobots : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterRobotParams {
  double r_min = 0.6;
  double epsilon = 0.12;    ///< warning-band width
  double beta = 0.3;        ///< smoothing factor of the band-weight recursion
  double rho0 = 1.0;        ///< base penalty weight
  double delta_eta = 1.0;   ///< escalation step of the right-hand rule
  /// Ceiling on eta. exp(eta) scales the penalty weights, so an unbounded eta during a long
  /// standoff would make the program arbitrarily ill-conditioned.
  double eta_max = 6.0;
  /// Position tolerance of the terminal-overlap test.
  double overlap_tol = 1e-3;

  void validate() const;
};

/// r'_min = sqrt(r_min^2 + h^2 v_max^2): sampled separation that keeps r_min in between samples.
double extended_min_distance(double r_min, double h, double v_max);

/// Half-space for robot i against robot j at one horizon step.
///
/// Without E the plane is the bisector of the predetermined points pushed r'/2 towards i.
/// With a scaling matrix E the normal is E n / |E n| for n = E d / |E d| (d = p_i - p_j),
/// and the offset is chosen so that the planes of i and j together imply |E (p_i - p_j)| >= r'.
/// Throws CoincidentRobots when the (scaled) points are closer than 1e-9.
HalfSpace mbvc_halfspace(const Point& pi, const Point& pj, double r_prime,
                         const std::optional<Eigen::MatrixXd>& E = std::nullopt);

/// MBVC-WB constraints of one robot against one neighbour.
///
/// hard[k-1] constrains p_k for k = 1..K-1. At the terminal step the robot keeps a headroom
/// w in [0, epsilon] beyond the plane, terminal.slack(p_K) >= w; the warning-band penalty
/// grows as the headroom shrinks, so w = epsilon means the band is untouched.
struct NeighborConstraints {
  std::size_t neighbor = 0;
  std::vector<HalfSpace> hard;
  HalfSpace terminal;
};

struct NeighborPrediction {
  std::size_t id = 0;
  PointList pred;
};

std::vector<NeighborConstraints> interrobot_constraints(const PointList& own_pred,
                                                        std::span<const NeighborPrediction> neighbors,
                                                        double r_prime,
                                                        const std::optional<Eigen::MatrixXd>& E = std::nullopt);

/// Coefficient rho / (epsilon * gamma) of the warning-band penalty c (epsilon - w)^2.
double warning_band_coefficient(double gamma, double rho, double epsilon);

/// gamma <- (1 - beta) gamma + beta w, clamped below at 1e-6 * epsilon.
double update_gamma(double gamma_prev, double w_prev, double beta, double epsilon);

/// Default position tolerance of the terminal-overlap test.
inline constexpr double kOverlapTol = 1e-3;

/// Deadlock signature: p_K away from the target, unchanged since the previous round and
/// equal to p_{K-1}.
bool detect_terminal_overlap(const PointList& planned, const PointList& planned_prev, const Point& target,
                             double tol_pos = kOverlapTol);

/// Right-hand-rule escalation: b_TO wins, then a reset when no band is touched. The
/// escalated value saturates at eta_max.
double update_eta(double eta_prev, bool b_to, bool no_band_contact, double delta_eta,
                  double eta_max = std::numeric_limits<double>::infinity());

/// Signed x-y angle from the goal bearing to the neighbour bearing, in (-pi, pi]. Zero when
/// either projection is shorter than 1e-9.
double bearing_angle(const Point& own_terminal, const Point& target, const Point& neighbor_terminal);

/// rho = rho0 * exp(eta * sin(theta)).
double rho(double rho0, double eta, double theta);

/// Per-robot coordination state carried between rounds.
struct RobotRuntime {
  PointList pred;
  std::map<std::size_t, double> gamma;
  double eta = 0.0;
  bool b_to = false;
  std::optional<path::PathCache> path;
  Point target;
  std::optional<dyn::Trajectory> last_plan;

  /// Predetermined trajectory = start repeated K times, gamma = epsilon for each neighbour.
  static RobotRuntime initial(const Point& start, const Point& target, int K, std::span<const std::size_t> neighbors,
                              double epsilon);
};

}  // namespace swarm::coord
