#pragma once

#include <string>

#include "swarm/sim.hpp"

namespace swarm::io {

struct PlotOptions {
  double width_px = 800.0;
  double margin_px = 24.0;
  int samples_per_step = 4;  ///< points per executed step in each polyline
};

/// Top-down (x-y) SVG of a run: obstacles as filled polygons, one coloured polyline per
/// robot, start disks of radius r_a and target crosses. Output is a pure function of the
/// log, so it is byte-stable for a given log.
std::string render_svg(const sim::RunLog& log, const PlotOptions& options = {});

}  // namespace swarm::io
