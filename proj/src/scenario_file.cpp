#include "swarm/scenario_file.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace swarm::io {

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

std::string where(const std::string& origin, int line) {
  return line > 0 ? origin + ":" + std::to_string(line) : origin;
}

/// Reads one document with a fixed origin for messages.
class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    throw ScenarioFileError(origin_, line_of(at), msg);
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    try {
      return n.as<double>();
    } catch (const YAML::BadConversion&) {
      fail(n, what + " must be a number, got '" + n.Scalar() + "'");
    }
  }

  int integer(const YAML::Node& n, const std::string& what) const {
    const double x = number(n, what);
    if (x != std::floor(x) || std::abs(x) > 1e9) fail(n, what + " must be an integer");
    return static_cast<int>(x);
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.Scalar();
  }

  geom::Point point(const YAML::Node& n, int dim, const std::string& what) const {
    if (!n.IsSequence()) fail(n, what + " must be a list of " + std::to_string(dim) + " coordinates");
    if (static_cast<int>(n.size()) != dim) {
      fail(n, what + " has " + std::to_string(n.size()) + " coordinates, expected " + std::to_string(dim));
    }
    geom::Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = number(n[i], what);
    return p;
  }

  /// A d x d matrix written as nested rows; a flat list of d numbers means a diagonal.
  Eigen::MatrixXd matrix(const YAML::Node& n, int dim, const std::string& what) const {
    if (!n.IsSequence() || static_cast<int>(n.size()) != dim) {
      fail(n, what + " must be a list of " + std::to_string(dim) + " diagonal entries or rows");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    if (n[0].IsScalar()) {
      for (int i = 0; i < dim; ++i) m(i, i) = number(n[i], what);
      return m;
    }
    for (int i = 0; i < dim; ++i) m.row(i) = point(n[i], dim, what + " row").transpose();
    return m;
  }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
  }

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
};

const std::set<std::string> kTopLevel = {"name", "dim", "time_cap", "params", "obstacles", "robots"};

void apply_override(YAML::Node& root, const Override& ov) {
  std::vector<std::string> path;
  std::stringstream ss(ov.key);
  for (std::string seg; std::getline(ss, seg, '.');) {
    if (seg.empty()) throw std::invalid_argument("override '" + ov.key + "': empty path segment");
    path.push_back(seg);
  }
  if (path.empty()) throw std::invalid_argument("override has an empty key");
  if (!kTopLevel.contains(path.front())) path.insert(path.begin(), "params");

  YAML::Node value;
  try {
    value = YAML::Load(ov.value);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument("override '" + ov.key + "': value is not valid YAML: " + e.msg);
  }

  YAML::Node cur = root;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string& seg = path[i];
    const bool last = i + 1 == path.size();
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
      if (ec != std::errc() || ptr != seg.data() + seg.size() || idx >= cur.size()) {
        throw std::invalid_argument("override '" + ov.key + "': '" + seg + "' is not a valid index");
      }
      if (last) {
        cur[idx] = value;
      } else {
        YAML::Node next = cur[idx];
        cur.reset(next);
      }
      continue;
    }
    if (!cur.IsMap() && !cur.IsNull()) throw std::invalid_argument("override '" + ov.key + "': '" + seg + "' is not a mapping");
    if (last) {
      cur[seg] = value;
    } else {
      if (!cur[seg]) cur[seg] = YAML::Node(YAML::NodeType::Map);
      YAML::Node next = cur[seg];
      cur.reset(next);
    }
  }
}

void read_params(const Reader& rd, const YAML::Node& node, int dim, sim::SimParams& p) {
  rd.require_map(node, "params");
  auto& lim = p.limits;
  auto& in = p.inter;
  using Setter = std::function<void(const YAML::Node&, const std::string&)>;
  auto num = [&](double& dst) -> Setter {
    return [&rd, &dst](const YAML::Node& n, const std::string& k) { dst = rd.number(n, "params." + k); };
  };
  auto whole = [&](int& dst) -> Setter {
    return [&rd, &dst](const YAML::Node& n, const std::string& k) { dst = rd.integer(n, "params." + k); };
  };
  const std::map<std::string, Setter> setters = {
      {"r_min", num(in.r_min)},
      {"r_a", num(p.r_a)},
      {"v_max", num(lim.v_max)},
      {"a_max", num(lim.a_max)},
      {"h", num(lim.h)},
      {"K", whole(lim.K)},
      {"facets", whole(lim.facets)},
      {"epsilon", num(in.epsilon)},
      {"beta", num(in.beta)},
      {"rho0", num(in.rho0)},
      {"delta_eta", num(in.delta_eta)},
      {"eta_max", num(in.eta_max)},
      {"overlap_tol", num(in.overlap_tol)},
      {"q_smooth", num(p.q_smooth)},
      {"q_terminal", num(p.q_terminal)},
      {"goal_tol", num(p.goal_tol)},
      {"speed_tol", num(p.speed_tol)},
      {"threads", whole(p.threads)},
      {"solver_max_iter", whole(p.solver.max_iter)},
      {"grid_step", num(p.planner.grid_step)},
      {"theta_v", [&](const YAML::Node& n, const std::string& k) { lim.theta_v = rd.matrix(n, dim, "params." + k); }},
      {"theta_a", [&](const YAML::Node& n, const std::string& k) { lim.theta_a = rd.matrix(n, dim, "params." + k); }},
      {"E", [&](const YAML::Node& n, const std::string& k) { p.E = rd.matrix(n, dim, "params." + k); }},
  };
  for (const auto& kv : node) {
    const std::string key = rd.text(kv.first, "parameter name");
    const auto it = setters.find(key);
    if (it == setters.end()) rd.fail(kv.first, "unknown parameter '" + key + "'");
    it->second(kv.second, key);
  }
}

sim::Scenario read_document(const Reader& rd, const YAML::Node& root) {
  if (!root.IsMap()) rd.fail(root, "a scenario must be a mapping with name, params, obstacles and robots");
  for (const auto& kv : root) {
    const std::string key = rd.text(kv.first, "key");
    if (!kTopLevel.contains(key)) rd.fail(kv.first, "unknown field '" + key + "'");
  }

  sim::Scenario sc;
  if (!root["name"]) rd.fail(root, "missing field 'name'");
  sc.name = rd.text(root["name"], "name");
  if (root["dim"]) {
    sc.dim = rd.integer(root["dim"], "dim");
    if (sc.dim != 2 && sc.dim != 3) rd.fail(root["dim"], "dim must be 2 or 3");
  }
  if (root["time_cap"]) sc.time_cap = rd.number(root["time_cap"], "time_cap");
  if (root["params"] && !root["params"].IsNull()) read_params(rd, root["params"], sc.dim, sc.params);

  if (const YAML::Node obs = root["obstacles"]; obs && !obs.IsNull()) {
    if (!obs.IsSequence()) rd.fail(obs, "obstacles must be a list of vertex lists");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const YAML::Node o = obs[i];
      const std::string what = "obstacle " + std::to_string(i);
      if (!o.IsSequence() || o.size() < 1) rd.fail(o, what + " must be a list of vertices");
      geom::PointList verts;
      for (const auto& v : o) verts.push_back(rd.point(v, sc.dim, what + " vertex"));
      try {
        sc.obstacles.emplace_back(std::move(verts));
      } catch (const std::invalid_argument& e) {
        rd.fail(o, what + ": " + e.what());
      }
    }
  }

  const YAML::Node robots = root["robots"];
  if (!robots || !robots.IsSequence() || robots.size() == 0) rd.fail(robots ? robots : root, "robots must be a non-empty list");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const YAML::Node r = robots[i];
    const std::string what = "robot " + std::to_string(i);
    rd.require_map(r, what);
    for (const auto& kv : r) {
      const std::string key = rd.text(kv.first, "key");
      if (key != "start" && key != "target") rd.fail(kv.first, what + ": unknown field '" + key + "'");
    }
    if (!r["start"] || !r["target"]) rd.fail(r, what + " needs both start and target");
    sc.robots.push_back({rd.point(r["start"], sc.dim, what + " start"), rd.point(r["target"], sc.dim, what + " target")});
  }
  return sc;
}

std::string point_text(const geom::Point& p) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ", " : "") + format_number(p[i]);
  return s + "]";
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) s += (r ? ", " : "") + point_text(m.row(r).transpose());
  return s + "]";
}

std::string scalar_text(const std::string& s) {
  static const std::regex plain("[A-Za-z][A-Za-z0-9_.-]*");
  return std::regex_match(s, plain) ? s : nlohmann::json(s).dump();
}

}  // namespace

ScenarioFileError::ScenarioFileError(const std::string& origin, int line, const std::string& message)
    : std::runtime_error(where(origin, line) + ": " + message), line_(line) {}

Override Override::parse(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override '" + text + "' is not of the form key=value");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string format_number(double x) {
  if (x == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

sim::Scenario parse_scenario(const std::string& text, const std::string& origin, const std::vector<Override>& overrides) {
  const Reader rd(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioFileError(origin, e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ScenarioFileError(origin, 0, "empty document");
  for (const auto& ov : overrides) apply_override(root, ov);
  sim::Scenario sc = read_document(rd, root);
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  return sc;
}

sim::Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string(), overrides);
}

std::string dump_scenario(const sim::Scenario& sc) {
  const auto& p = sc.params;
  const auto& lim = p.limits;
  const auto& in = p.inter;
  std::ostringstream o;
  o << "name: " << scalar_text(sc.name) << "\n";
  o << "dim: " << sc.dim << "\n";
  o << "time_cap: " << format_number(sc.time_cap) << "\n";
  o << "params:\n";
  auto kv = [&](const char* k, double v) { o << "  " << k << ": " << format_number(v) << "\n"; };
  kv("r_min", in.r_min);
  kv("r_a", p.r_a);
  kv("v_max", lim.v_max);
  kv("a_max", lim.a_max);
  kv("h", lim.h);
  o << "  K: " << lim.K << "\n";
  o << "  facets: " << lim.facets << "\n";
  kv("epsilon", in.epsilon);
  kv("beta", in.beta);
  kv("rho0", in.rho0);
  kv("delta_eta", in.delta_eta);
  kv("eta_max", in.eta_max);
  kv("overlap_tol", in.overlap_tol);
  kv("q_smooth", p.q_smooth);
  kv("q_terminal", p.q_terminal);
  kv("goal_tol", p.goal_tol);
  kv("speed_tol", p.speed_tol);
  o << "  threads: " << p.threads << "\n";
  o << "  solver_max_iter: " << p.solver.max_iter << "\n";
  kv("grid_step", p.planner.grid_step);
  if (lim.theta_v.size() > 0) o << "  theta_v: " << matrix_text(lim.theta_v) << "\n";
  if (lim.theta_a.size() > 0) o << "  theta_a: " << matrix_text(lim.theta_a) << "\n";
  if (p.E) o << "  E: " << matrix_text(*p.E) << "\n";
  if (sc.obstacles.empty()) {
    o << "obstacles: []\n";
  } else {
    o << "obstacles:\n";
    for (const auto& ob : sc.obstacles) {
      o << "  - [";
      for (std::size_t i = 0; i < ob.vertices().size(); ++i) o << (i ? ", " : "") << point_text(ob.vertices()[i]);
      o << "]\n";
    }
  }
  o << "robots:\n";
  for (const auto& r : sc.robots) o << "  - {start: " << point_text(r.start) << ", target: " << point_text(r.target) << "}\n";
  return o.str();
}

}  // namespace swarm::io
