#include "llb/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace llb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(int line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_tokens(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail_line(line, "expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    fail_line(line, "expected an integer, got '" + v + "'");
  }
}

std::vector<int> parse_int_list(const std::string& v, int line) {
  std::vector<int> out;
  for (const auto& tok : split_tokens(v)) out.push_back(static_cast<int>(parse_int(tok, line)));
  if (out.empty()) fail_line(line, "expected at least one integer");
  return out;
}

std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const auto& tok : split_tokens(v)) out.push_back(parse_double(tok, line));
  if (out.empty()) fail_line(line, "expected at least one number");
  return out;
}

template <typename T>
void broadcast(std::vector<T>& v, int dim, const char* key) {
  if (static_cast<int>(v.size()) == 1 && dim > 1) v.resize(dim, v[0]);
  if (static_cast<int>(v.size()) != dim)
    throw std::runtime_error(std::string("config: ") + key + " needs 1 or " +
                             std::to_string(dim) + " values, got " +
                             std::to_string(v.size()));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* metric_name(MetricSpec::Family f) {
  return f == MetricSpec::Family::flat ? "flat" : "conformal";
}
const char* conn_name(ConnectionSpec::Family f) {
  switch (f) {
    case ConnectionSpec::Family::trivial: return "trivial";
    case ConnectionSpec::Family::constant_skew: return "constant_skew";
    default: return "curved";
  }
}
const char* init_name(InitSpec::Family f) {
  switch (f) {
    case InitSpec::Family::zero: return "zero";
    case InitSpec::Family::constant: return "constant";
    case InitSpec::Family::fourier_mode: return "fourier_mode";
    default: return "random_bandlimited";
  }
}
const char* scheme_name(SolverConfig::Scheme s) {
  return s == SolverConfig::Scheme::rk4 ? "rk4" : "imex";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  bool have_dim = false, have_sizes = false, have_tend = false;

  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail_line(line, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    if (key.empty()) fail_line(line, "empty key");
    if (val.empty()) fail_line(line, "empty value for '" + key + "'");
    if (!seen.insert(key).second) fail_line(line, "duplicate key '" + key + "'");

    if (key == "grid.dim") {
      cfg.dim = static_cast<int>(parse_int(val, line));
      have_dim = true;
    } else if (key == "grid.sizes") {
      cfg.sizes = parse_int_list(val, line);
      have_sizes = true;
    } else if (key == "grid.lengths") {
      cfg.lengths = parse_double_list(val, line);
    } else if (key == "metric.family") {
      if (val == "flat") cfg.metric.family = MetricSpec::Family::flat;
      else if (val == "conformal") cfg.metric.family = MetricSpec::Family::conformal;
      else fail_line(line, "metric.family must be flat or conformal, got '" + val + "'");
    } else if (key == "metric.amplitude") {
      cfg.metric.amplitude = parse_double(val, line);
    } else if (key == "metric.kappa") {
      cfg.metric.kappa = parse_int_list(val, line);
    } else if (key == "connection.family") {
      if (val == "trivial") cfg.connection.family = ConnectionSpec::Family::trivial;
      else if (val == "constant_skew") cfg.connection.family = ConnectionSpec::Family::constant_skew;
      else if (val == "curved") cfg.connection.family = ConnectionSpec::Family::curved;
      else fail_line(line, "connection.family must be trivial, constant_skew or curved, got '" + val + "'");
    } else if (key == "connection.axes") {
      cfg.connection.axes = parse_int_list(val, line);
    } else if (key == "connection.theta") {
      cfg.connection.theta = parse_double_list(val, line);
    } else if (key == "connection.kappa") {
      cfg.connection.kappa = parse_int_list(val, line);
    } else if (key == "connection.generator") {
      const auto g = parse_double_list(val, line);
      if (g.size() != 9) fail_line(line, "connection.generator needs 9 numbers (row-major)");
      Mat3 mat;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) mat.a[r][c] = g[static_cast<std::size_t>(r) * 3 + c];
      cfg.connection.generator = mat;
    } else if (key == "init.family") {
      if (val == "zero") cfg.init.family = InitSpec::Family::zero;
      else if (val == "constant") cfg.init.family = InitSpec::Family::constant;
      else if (val == "fourier_mode") cfg.init.family = InitSpec::Family::fourier_mode;
      else if (val == "random_bandlimited") cfg.init.family = InitSpec::Family::random_bandlimited;
      else fail_line(line, "init.family must be zero, constant, fourier_mode or random_bandlimited, got '" + val + "'");
    } else if (key == "init.value") {
      const auto v3 = parse_double_list(val, line);
      if (v3.size() != 3) fail_line(line, "init.value needs 3 numbers");
      cfg.init.value = Vec3{v3[0], v3[1], v3[2]};
    } else if (key == "init.axis") {
      cfg.init.axis = static_cast<int>(parse_int(val, line));
      if (cfg.init.axis < 1 || cfg.init.axis > 3) fail_line(line, "init.axis must be 1, 2 or 3");
    } else if (key == "init.kappa") {
      cfg.init.kappa = parse_int_list(val, line);
    } else if (key == "init.amplitude") {
      cfg.init.amplitude = parse_double(val, line);
    } else if (key == "init.max_mode") {
      cfg.init.max_mode = static_cast<int>(parse_int(val, line));
      if (cfg.init.max_mode < 1) fail_line(line, "init.max_mode must be >= 1");
    } else if (key == "init.seed") {
      const long long s = parse_int(val, line);
      if (s < 0) fail_line(line, "init.seed must be >= 0");
      cfg.init.seed = static_cast<std::uint64_t>(s);
    } else if (key == "solver.lambda") {
      cfg.solver.lambda = parse_double(val, line);
    } else if (key == "solver.mu") {
      cfg.solver.mu = parse_double(val, line);
    } else if (key == "solver.dt") {
      cfg.solver.dt = parse_double(val, line);
      if (!(cfg.solver.dt > 0.0)) fail_line(line, "solver.dt must be positive");
    } else if (key == "solver.t_end") {
      cfg.solver.t_end = parse_double(val, line);
      have_tend = true;
    } else if (key == "solver.scheme") {
      if (val == "rk4") cfg.solver.scheme = SolverConfig::Scheme::rk4;
      else if (val == "imex") cfg.solver.scheme = SolverConfig::Scheme::imex;
      else fail_line(line, "solver.scheme must be rk4 or imex, got '" + val + "'");
    } else if (key == "solver.cg_tol") {
      cfg.solver.cg_tol = parse_double(val, line);
    } else if (key == "solver.cg_max_iter") {
      cfg.solver.cg_max_iter = static_cast<int>(parse_int(val, line));
    } else if (key == "solver.cfl_safety") {
      cfg.solver.cfl_safety = parse_double(val, line);
    } else if (key == "output.dir") {
      cfg.out_dir = val;
    } else if (key == "output.snapshot_every") {
      cfg.solver.snapshot_every = static_cast<int>(parse_int(val, line));
      if (cfg.solver.snapshot_every < 0) fail_line(line, "output.snapshot_every must be >= 0");
    } else if (key == "output.checks") {
      cfg.checks = split_tokens(val);
      for (const auto& c : cfg.checks)
        if (c != "all" && c != "none" && c != "max_principle" && c != "lp_monotone" &&
            c != "energy" && c != "dv_bound")
          fail_line(line, "unknown check '" + c + "'");
    } else {
      fail_line(line, "unknown key '" + key + "'");
    }
  }

  if (!have_dim) throw std::runtime_error("config: grid.dim is required");
  if (!have_sizes) throw std::runtime_error("config: grid.sizes is required");
  if (!have_tend) throw std::runtime_error("config: solver.t_end is required");
  if (cfg.dim < 2 || cfg.dim > 3)
    throw std::runtime_error("config: grid.dim must be 2 or 3, got " + std::to_string(cfg.dim));

  broadcast(cfg.sizes, cfg.dim, "grid.sizes");
  if (cfg.lengths.empty()) cfg.lengths.assign(cfg.dim, 1.0);
  broadcast(cfg.lengths, cfg.dim, "grid.lengths");
  if (cfg.metric.kappa.empty()) cfg.metric.kappa.assign(cfg.dim, 0);
  broadcast(cfg.metric.kappa, cfg.dim, "metric.kappa");
  if (cfg.connection.axes.empty()) cfg.connection.axes.assign(cfg.dim, 3);
  broadcast(cfg.connection.axes, cfg.dim, "connection.axes");
  if (cfg.connection.theta.empty()) cfg.connection.theta.assign(cfg.dim, 0.0);
  broadcast(cfg.connection.theta, cfg.dim, "connection.theta");
  if (cfg.connection.kappa.empty()) cfg.connection.kappa.assign(cfg.dim, 0);
  broadcast(cfg.connection.kappa, cfg.dim, "connection.kappa");
  if (cfg.init.kappa.empty()) cfg.init.kappa.assign(cfg.dim, 0);
  broadcast(cfg.init.kappa, cfg.dim, "init.kappa");
  if (cfg.checks.empty()) cfg.checks.push_back("all");

  cfg.solver.validate();
  cfg.metric.validate(cfg.dim);
  cfg.connection.validate(cfg.dim);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

GridPtr RunConfig::make_grid() const { return build_grid(metric, sizes, lengths); }

BundleConnection RunConfig::make_connection(const GridPtr& grid) const {
  return build_connection(connection, grid);
}

Section RunConfig::make_initial(const GridPtr& grid) const {
  switch (init.family) {
    case InitSpec::Family::zero:
      return make_zero_section(grid);
    case InitSpec::Family::constant:
      return make_constant_section(grid, init.value);
    case InitSpec::Family::fourier_mode:
      return make_fourier_mode(grid, init.kappa, init.axis, init.amplitude);
    default:
      return make_random_bandlimited(grid, init.max_mode, init.seed, init.amplitude);
  }
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  auto ints = [&](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? " " : "") + std::to_string(v[i]);
    return s;
  };
  auto dbls = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s;
  };
  os << "grid.dim = " << dim << '\n';
  os << "grid.sizes = " << ints(sizes) << '\n';
  os << "grid.lengths = " << dbls(lengths) << '\n';
  os << "metric.family = " << metric_name(metric.family) << '\n';
  os << "metric.amplitude = " << fmt(metric.amplitude) << '\n';
  os << "metric.kappa = " << ints(metric.kappa) << '\n';
  os << "connection.family = " << conn_name(connection.family) << '\n';
  os << "connection.axes = " << ints(connection.axes) << '\n';
  os << "connection.theta = " << dbls(connection.theta) << '\n';
  os << "connection.kappa = " << ints(connection.kappa) << '\n';
  if (connection.generator) {
    std::vector<double> g;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) g.push_back(connection.generator->a[r][c]);
    os << "connection.generator = " << dbls(g) << '\n';
  }
  os << "init.family = " << init_name(init.family) << '\n';
  if (init.family == InitSpec::Family::constant)
    os << "init.value = " << fmt(init.value.x) << ' ' << fmt(init.value.y) << ' '
       << fmt(init.value.z) << '\n';
  if (init.family == InitSpec::Family::fourier_mode) {
    os << "init.axis = " << init.axis << '\n';
    os << "init.kappa = " << ints(init.kappa) << '\n';
  }
  if (init.family == InitSpec::Family::fourier_mode ||
      init.family == InitSpec::Family::random_bandlimited)
    os << "init.amplitude = " << fmt(init.amplitude) << '\n';
  if (init.family == InitSpec::Family::random_bandlimited) {
    os << "init.max_mode = " << init.max_mode << '\n';
    os << "init.seed = " << init.seed << '\n';
  }
  os << "solver.lambda = " << fmt(solver.lambda) << '\n';
  os << "solver.mu = " << fmt(solver.mu) << '\n';
  if (solver.dt > 0.0) os << "solver.dt = " << fmt(solver.dt) << '\n';
  os << "solver.t_end = " << fmt(solver.t_end) << '\n';
  os << "solver.scheme = " << scheme_name(solver.scheme) << '\n';
  os << "solver.cg_tol = " << fmt(solver.cg_tol) << '\n';
  os << "solver.cg_max_iter = " << solver.cg_max_iter << '\n';
  os << "solver.cfl_safety = " << fmt(solver.cfl_safety) << '\n';
  os << "output.dir = " << out_dir << '\n';
  os << "output.snapshot_every = " << solver.snapshot_every << '\n';
  os << "output.checks =";
  for (const auto& c : checks) os << ' ' << c;
  os << '\n';
  return os.str();
}

}  // namespace llb
