#include "swarm/plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <sstream>

namespace swarm::io {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  // "-0.00" and "0.00" must not depend on the sign of a rounding residue.
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Eigen::Vector2d xy(const geom::Point& p) { return p.head<2>(); }

}  // namespace

std::string render_svg(const sim::RunLog& log, const PlotOptions& opt) {
  const auto& sc = log.scenario;
  const std::size_t n = sc.robots.size();
  const double h = sc.params.limits.h;
  const int sub = std::max(1, opt.samples_per_step);

  // Executed paths, sampled inside each step so curved segments stay visible.
  std::vector<std::vector<Eigen::Vector2d>> paths(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& round : log.rounds) {
      const auto& rr = round.robots[i];
      for (int s = 0; s < sub; ++s) {
        paths[i].push_back(xy(dyn::position_within_step(rr.plan.start, rr.plan.inputs.front(), h * s / sub)));
      }
    }
    paths[i].push_back(i < log.final_states.size() ? xy(log.final_states[i].p) : xy(sc.robots[i].start));
  }

  // Obstacle outlines projected to the ground plane.
  std::vector<std::vector<Eigen::Vector2d>> outlines;
  for (const auto& ob : sc.obstacles) {
    geom::PointList flat;
    for (const auto& v : ob.vertices()) flat.push_back(v.head<2>());
    const geom::Hull hull = geom::convex_hull(flat);
    std::vector<Eigen::Vector2d> poly;
    for (const auto& v : hull.vertices) poly.push_back(v);
    outlines.push_back(std::move(poly));
  }

  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  auto grow = [&](const Eigen::Vector2d& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& poly : outlines) std::for_each(poly.begin(), poly.end(), grow);
  for (const auto& path : paths) std::for_each(path.begin(), path.end(), grow);
  for (const auto& r : sc.robots) {
    grow(xy(r.start) - Eigen::Vector2d::Constant(sc.params.r_a));
    grow(xy(r.start) + Eigen::Vector2d::Constant(sc.params.r_a));
    grow(xy(r.target));
  }
  const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-6);
  const double scale = (opt.width_px - 2 * opt.margin_px) / span.x();
  const double height = span.y() * scale + 2 * opt.margin_px + 20.0;  // 20 px title strip

  // World (x, y) to SVG pixels, y pointing up.
  auto px = [&](const Eigen::Vector2d& p) {
    return fmt(opt.margin_px + (p.x() - lo.x()) * scale) + "," + fmt(height - opt.margin_px - (p.y() - lo.y()) * scale);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(opt.width_px) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(opt.width_px) << " " << fmt(height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(opt.margin_px) << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">"
    << escape(sc.name) << " — " << sim::to_string(log.outcome) << " at t = " << fmt(log.end_time) << " s</text>\n";

  o << "<g id=\"obstacles\" fill=\"#b0b0b0\" stroke=\"#505050\" stroke-width=\"1\">\n";
  for (const auto& poly : outlines) {
    o << "<polygon points=\"";
    for (std::size_t k = 0; k < poly.size(); ++k) o << (k ? " " : "") << px(poly[k]);
    o << "\"/>\n";
  }
  o << "</g>\n";

  o << "<g id=\"robots\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const char* color = kPalette[i % kPalette.size()];
    o << "<polyline stroke=\"" << color << "\" points=\"";
    for (std::size_t k = 0; k < paths[i].size(); ++k) o << (k ? " " : "") << px(paths[i][k]);
    o << "\"/>\n";
    const std::string c = px(xy(sc.robots[i].start));
    const auto comma = c.find(',');
    o << "<circle stroke=\"" << color << "\" cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1)
      << "\" r=\"" << fmt(sc.params.r_a * scale) << "\"/>\n";
    const Eigen::Vector2d t = xy(sc.robots[i].target);
    const double arm = 4.0 / scale;
    o << "<path stroke=\"" << color << "\" d=\"M" << px(t + Eigen::Vector2d(-arm, -arm)) << " L" << px(t + Eigen::Vector2d(arm, arm))
      << " M" << px(t + Eigen::Vector2d(-arm, arm)) << " L" << px(t + Eigen::Vector2d(arm, -arm)) << "\"/>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace swarm::io
