#pragma once

#include <cstdint>

#include "swarm/sim.hpp"

namespace swarm::gen {

struct RandomOptions {
  int min_robots = 4;
  int max_robots = 8;
  int min_obstacles = 5;
  int max_obstacles = 15;
  double ring_radius = 6.0;     ///< robots start on this circle and cross to the far side
  double field_radius = 4.0;    ///< obstacle centres lie inside this disc
  double min_obstacle_size = 0.3;
  double max_obstacle_size = 0.9;
  double time_cap = 60.0;
};

/// Seeded 2D scenario: robots spread over a ring, each heading to the antipodal point,
/// with random convex polygons in between. Obstacles are kept more than twice the
/// clearance apart, so the inflated obstacles are disjoint and every target stays reachable.
sim::Scenario random_scenario(std::uint64_t seed, const RandomOptions& options = {});

struct ForestOptions {
  int robots = 8;
  int trees = 14;
  double half_width = 4.0;   ///< trees fill [-w, w] x [-w, w]
  double standoff = 6.5;     ///< robots start at x = -standoff / +standoff
  /// Minimum gap between trees; 1.6 m lets two robots pass side by side anywhere.
  double min_gap = 1.6;
  double time_cap = 60.0;
};

/// Seeded forest: a band of small random trees between two columns of robots that swap sides.
sim::Scenario forest_scenario(std::uint64_t seed, const ForestOptions& options = {});

}  // namespace swarm::gen
