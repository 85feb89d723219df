#include "llb/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "llb/calculus.hpp"
#include "llb/config.hpp"
#include "llb/diagnostics.hpp"
#include "llb/norms.hpp"
#include "llb/snapshot.hpp"
#include "llb/solver.hpp"

namespace llb {

namespace {

namespace fs = std::filesystem;

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool wants_check(const RunConfig& cfg, const std::string& name) {
  for (const auto& c : cfg.checks) {
    if (c == "none") return false;
    if (c == "all" || c == name) return true;
  }
  return false;
}

void print_report(const CheckReport& rep, std::ostream& os, bool& any_fail) {
  const char* tag = rep.passed ? (rep.flagged ? "[FLAG]" : "[PASS]") : "[FAIL]";
  os << tag << ' ' << rep.name << ": " << rep.detail << '\n';
  if (!rep.passed) any_fail = true;
}

// Either the coarse defect is already at rounding level or it must shrink by
// the given factor under mesh doubling.
CheckReport refinement_report(const std::string& name, double coarse, double fine,
                              double exact_tol, double min_ratio) {
  CheckReport rep;
  rep.name = name;
  if (coarse <= exact_tol) {
    rep.passed = true;
    rep.worst = coarse;
    rep.detail = "coarse defect " + fmt(coarse) + " already at rounding level (tol " +
                 fmt(exact_tol) + ")";
    return rep;
  }
  const double ratio = fine > 0.0 ? coarse / fine : std::numeric_limits<double>::infinity();
  rep.worst = ratio;
  rep.passed = ratio >= min_ratio;
  rep.detail = "coarse " + fmt(coarse) + " fine " + fmt(fine) + " ratio " + fmt(ratio) +
               " (need >= " + fmt(min_ratio) + ")";
  return rep;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_override;
};

int do_simulate(const SimulateArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;

  const GridPtr grid = cfg.make_grid();
  const BundleConnection conn = cfg.make_connection(grid);
  const Section v0 = cfg.make_initial(grid);

  std::cerr << "simulate: " << grid->m << "-d grid";
  for (int s : grid->sizes) std::cerr << ' ' << s;
  std::cerr << ", t_end " << cfg.solver.t_end << '\n';

  const Trajectory traj = run(v0, conn, cfg.solver);

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream os(cfg.out_dir + "/config.resolved");
    os << cfg.serialize();
  }
  {
    std::ofstream os(cfg.out_dir + "/diagnostics.csv");
    write_diagnostics_csv(traj, os);
  }
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "/snapshot_%04zu.bin", i);
    write_snapshot(cfg.out_dir + name, traj.states[i], traj.state_times[i]);
  }

  bool any_fail = false;
  std::vector<CheckReport> reports;
  if (!traj.blown_up) {
    if (wants_check(cfg, "max_principle")) reports.push_back(check_max_principle(traj));
    if (wants_check(cfg, "lp_monotone")) {
      reports.push_back(check_lp_monotone(traj, 2.0));
      reports.push_back(check_lp_monotone(traj, 4.0));
      reports.push_back(check_lp_monotone(traj, 8.0));
      reports.push_back(check_lp_monotone(traj, std::numeric_limits<double>::infinity()));
    }
    if (wants_check(cfg, "energy")) reports.push_back(check_energy_identity(traj));
    if (wants_check(cfg, "dv_bound")) reports.push_back(check_dv_bound(traj));
  }

  {
    std::ofstream os(cfg.out_dir + "/status.txt");
    os << "status = " << (traj.blown_up ? "halted" : "completed") << '\n';
    os << "t_final = " << traj.times.back() << '\n';
    os << "steps = " << (traj.times.size() - 1) << '\n';
    os << "snapshots = " << traj.states.size() << '\n';
    if (traj.blown_up) os << "reason = " << traj.end_reason << '\n';
    for (const auto& rep : reports)
      os << "check " << rep.name << " = "
         << (rep.passed ? (rep.flagged ? "flag" : "pass") : "fail") << " (" << rep.detail
         << ")\n";
  }

  for (const auto& rep : reports) print_report(rep, std::cerr, any_fail);
  if (traj.blown_up) {
    std::cerr << "simulate: halted early: " << traj.end_reason << '\n';
    return 1;
  }
  std::cerr << "simulate: wrote " << cfg.out_dir << "/diagnostics.csv ("
            << traj.records.size() << " records)\n";
  return any_fail ? 1 : 0;
}

struct VerifyArgs {
  std::string config_path;
  std::string suite = "all";
};

void verify_calculus(const RunConfig& cfg, std::vector<CheckReport>& reports) {
  std::vector<int> fine_sizes = cfg.sizes;
  for (int& s : fine_sizes) s *= 2;
  const GridPtr g1 = cfg.make_grid();
  const GridPtr g2 = build_grid(cfg.metric, fine_sizes, cfg.lengths);
  const BundleConnection c1 = cfg.make_connection(g1);
  const BundleConnection c2 = cfg.make_connection(g2);
  // Same continuum fields on both grids: band-limited synthesis is
  // resolution-independent.
  const int mm = std::max(cfg.init.max_mode, 2);
  const Section v1 = make_random_bandlimited(g1, mm, cfg.init.seed, 1.0);
  const Section v2 = make_random_bandlimited(g2, mm, cfg.init.seed, 1.0);
  const Section w1 = make_random_bandlimited(g1, mm, cfg.init.seed + 1, 1.0);
  const Section w2 = make_random_bandlimited(g2, mm, cfg.init.seed + 1, 1.0);

  reports.push_back(refinement_report("leibniz", leibniz_defect(v1, w1, c1),
                                      leibniz_defect(v2, w2, c2), 1e-12, 3.6));
  reports.push_back(refinement_report("ricci_commutator", ricci_defect(v1, c1),
                                      ricci_defect(v2, c2), 1e-10, 3.6));
  reports.push_back(refinement_report("second_derivative_trace", bochner_residual(v1, c1),
                                      bochner_residual(v2, c2), 1e-10, 3.5));
  reports.push_back(refinement_report("metric_compatibility",
                                      metric_compat_defect(v1, w1, c1),
                                      metric_compat_defect(v2, w2, c2), 1e-12, 3.6));
  reports.push_back(refinement_report("integration_by_parts",
                                      std::fabs(ibp_defect(v1, w1, c1)),
                                      std::fabs(ibp_defect(v2, w2, c2)), 1e-9, 3.5));
}

Trajectory verify_energy(const RunConfig& cfg, std::vector<CheckReport>& reports) {
  const GridPtr grid = cfg.make_grid();
  const BundleConnection conn = cfg.make_connection(grid);
  const Section v0 = cfg.make_initial(grid);

  SolverConfig base = cfg.solver;
  if (base.dt == 0.0 && base.scheme == SolverConfig::Scheme::rk4)
    base.dt = cfl_dt_limit(*grid, base.cfl_safety);
  else if (base.dt == 0.0)
    base.dt = *std::min_element(grid->h.begin(), grid->h.end());

  std::cerr << "verify energy: base run dt = " << base.dt << '\n';
  Trajectory t1 = run(v0, conn, base);
  SolverConfig half = base;
  half.dt = base.dt / 2.0;
  std::cerr << "verify energy: halved run dt = " << half.dt << '\n';
  const Trajectory t2 = run(v0, conn, half);

  const CheckReport e1 = check_energy_identity(t1);
  const CheckReport e2 = check_energy_identity(t2);
  reports.push_back(e1);
  reports.push_back(refinement_report("energy_residual_shrink", e1.worst, e2.worst, 1e-13, 3.0));
  return t1;
}

void verify_maxprinciple(const RunConfig& cfg, std::vector<CheckReport>& reports) {
  const GridPtr grid = cfg.make_grid();
  const BundleConnection conn = cfg.make_connection(grid);
  const Trajectory traj = run(cfg.make_initial(grid), conn, cfg.solver);
  reports.push_back(check_max_principle(traj));
  reports.push_back(check_lp_monotone(traj, 2.0));
  reports.push_back(check_lp_monotone(traj, 4.0));
  reports.push_back(check_lp_monotone(traj, 8.0));
  reports.push_back(check_lp_monotone(traj, std::numeric_limits<double>::infinity()));
  reports.push_back(check_dv_bound(traj));
}

int do_verify(const VerifyArgs& args) {
  const RunConfig cfg = load_config(args.config_path);
  std::vector<CheckReport> reports;
  bool wrote_slacks = false;
  if (args.suite == "calculus" || args.suite == "all") verify_calculus(cfg, reports);
  if (args.suite == "energy" || args.suite == "all") {
    const Trajectory base = verify_energy(cfg, reports);
    if (args.suite == "all") {
      fs::create_directories(cfg.out_dir);
      std::ofstream os(cfg.out_dir + "/verify_slacks.csv");
      write_slack_csv(base, os);
      wrote_slacks = true;
    }
  }
  if (args.suite == "maxprinciple" || args.suite == "all") verify_maxprinciple(cfg, reports);

  bool any_fail = false;
  for (const auto& rep : reports) print_report(rep, std::cout, any_fail);
  if (wrote_slacks) std::cerr << "verify: wrote " << cfg.out_dir << "/verify_slacks.csv\n";
  return any_fail ? 1 : 0;
}

struct GnArgs {
  std::string config_path;
  int samples = 8;
  int j = 1, k = 2;
  double p = 0.0;  // 0 = solve the balance for p
  double r = 2.0, q = 1e6;
};

int do_gn(const GnArgs& args) {
  const RunConfig cfg = load_config(args.config_path);
  const GridPtr grid = cfg.make_grid();
  const BundleConnection conn = cfg.make_connection(grid);
  double p = args.p;
  if (p == 0.0) {
    const double inv = static_cast<double>(args.j) / args.r +
                       static_cast<double>(args.k - args.j) / args.q;
    if (!(inv > 0.0)) throw std::runtime_error("gn: cannot balance p for these exponents");
    p = static_cast<double>(args.k) / inv;
  }
  std::cerr << "gn: j=" << args.j << " k=" << args.k << " p=" << p << " r=" << args.r
            << " q=" << args.q << ", " << args.samples << " samples\n";
  std::cout << "sample,ratio\n";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int s = 0; s < args.samples; ++s) {
    const Section u =
        make_random_bandlimited(grid, cfg.init.max_mode, cfg.init.seed + static_cast<std::uint64_t>(s), 1.0);
    const double ratio = gn_ratio(u, args.j, args.k, p, args.r, args.q, conn);
    std::cout << s << ',' << fmt(ratio) << '\n';
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  std::cerr << "gn: ratio range [" << fmt(lo) << ", " << fmt(hi) << "]\n";
  return 0;
}

struct ConvergenceArgs {
  std::string op;
};

int do_convergence(const ConvergenceArgs& args) {
  std::cout << "op,coarse,fine,order\n";
  CheckReport rep;
  double coarse = 0.0, fine = 0.0;
  if (args.op == "laplacian") {
    // Conformal metric, scalar oracle: Lap_g sin(2 pi x1) = -e^{-2 phi} (2 pi)^2 sin.
    MetricSpec metric;
    metric.family = MetricSpec::Family::conformal;
    metric.amplitude = 0.15;
    metric.kappa = {1, 1};
    auto defect = [&](int n) {
      const GridPtr grid = build_grid(metric, {n, n}, {1.0, 1.0});
      ConnectionSpec cs;
      const BundleConnection conn = build_connection(cs, grid);
      const Section v = make_fourier_mode(grid, {1, 0}, 1, 1.0);
      const TensorField lap = laplacian(v, conn);
      double worst = 0.0;
      const double w2 = kTwoPi * kTwoPi;
      for (std::size_t node = 0; node < grid->n_nodes; ++node) {
        double x[2];
        grid->node_coords(node, x);
        const double phi = metric.amplitude * std::cos(kTwoPi * x[0]) *
                           std::cos(kTwoPi * x[1]);
        const double oracle = -std::exp(-2.0 * phi) * w2 * std::sin(kTwoPi * x[0]);
        worst = std::max(worst, std::fabs(lap.vec(node).x - oracle));
      }
      return worst;
    };
    coarse = defect(32);
    fine = defect(64);
    rep = refinement_report("laplacian_conformal_oracle", coarse, fine, 1e-12,
                            std::pow(2.0, 1.9));
  } else if (args.op == "ricci") {
    ConnectionSpec cs;
    cs.family = ConnectionSpec::Family::curved;
    cs.axes = {3, 1};
    cs.theta = {0.4, 0.3};
    cs.kappa = {1, 1};
    auto defect = [&](int n) {
      const GridPtr grid = build_grid(MetricSpec{}, {n, n}, {1.0, 1.0});
      const BundleConnection conn = build_connection(cs, grid);
      return ricci_defect(make_random_bandlimited(grid, 2, 11, 1.0), conn);
    };
    coarse = defect(32);
    fine = defect(64);
    rep = refinement_report("ricci_curved_connection", coarse, fine, 1e-12,
                            std::pow(2.0, 1.9));
  } else if (args.op == "leibniz") {
    ConnectionSpec cs;
    cs.family = ConnectionSpec::Family::curved;
    cs.axes = {3, 1};
    cs.theta = {0.4, 0.3};
    cs.kappa = {1, 1};
    auto defect = [&](int n) {
      const GridPtr grid = build_grid(MetricSpec{}, {n, n}, {1.0, 1.0});
      const BundleConnection conn = build_connection(cs, grid);
      return leibniz_defect(make_random_bandlimited(grid, 2, 5, 1.0),
                            make_random_bandlimited(grid, 2, 6, 1.0), conn);
    };
    coarse = defect(32);
    fine = defect(64);
    rep = refinement_report("leibniz_product_rule", coarse, fine, 1e-12, 3.6);
  } else if (args.op == "energy") {
    const GridPtr grid = build_grid(MetricSpec{}, {32, 32}, {kTwoPi, kTwoPi});
    ConnectionSpec cs;
    const BundleConnection conn = build_connection(cs, grid);
    const Section v0 = make_random_bandlimited(grid, 2, 7, 1.0);
    SolverConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.05;
    coarse = check_energy_identity(run(v0, conn, sc)).worst;
    SolverConfig sh = sc;
    sh.dt = sc.dt / 2.0;
    fine = check_energy_identity(run(v0, conn, sh)).worst;
    rep = refinement_report("energy_residual_dt", coarse, fine, 1e-13, 3.0);
  } else {
    throw CLI::ValidationError("--op", "unknown operator '" + args.op + "'");
  }
  const double ratio = fine > 0.0 ? coarse / fine : std::numeric_limits<double>::infinity();
  const double order = ratio > 0.0 && std::isfinite(ratio) ? std::log2(ratio) : 64.0;
  std::cout << args.op << ',' << fmt(coarse) << ',' << fmt(fine) << ',' << fmt(order) << '\n';
  bool any_fail = false;
  print_report(rep, std::cout, any_fail);
  return any_fail ? 1 : 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Vector-field diffusion on periodic grids: simulate and verify"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a configured simulation");
  simulate->add_option("--config", sim.config_path, "run file")->required();
  simulate->add_option("--out", sim.out_override, "override output.dir");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--config", ver.config_path, "run file")->required();
  verify->add_option("--suite", ver.suite, "calculus | energy | maxprinciple | all")
      ->check(CLI::IsMember({"calculus", "energy", "maxprinciple", "all"}));

  GnArgs gn;
  auto* gncmd = app.add_subcommand("gn", "interpolation-ratio sampling");
  gncmd->add_option("--config", gn.config_path, "run file")->required();
  gncmd->add_option("--samples", gn.samples, "ensemble size")->check(CLI::PositiveNumber);
  gncmd->add_option("--j", gn.j, "derivative order in the numerator");
  gncmd->add_option("--k", gn.k, "derivative order in the denominator");
  gncmd->add_option("--p", gn.p, "numerator exponent (default: solved from the balance)");
  gncmd->add_option("--r", gn.r, "denominator exponent on D^k");
  gncmd->add_option("--q", gn.q, "denominator exponent on the field");

  ConvergenceArgs conv;
  auto* convcmd = app.add_subcommand("convergence", "refinement study for one operator");
  convcmd->add_option("--op", conv.op, "laplacian | ricci | leibniz | energy")
      ->required()
      ->check(CLI::IsMember({"laplacian", "ricci", "leibniz", "energy"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(simulate)) return do_simulate(sim);
    if (app.got_subcommand(verify)) return do_verify(ver);
    if (app.got_subcommand(gncmd)) return do_gn(gn);
    if (app.got_subcommand(convcmd)) return do_convergence(conv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("llb");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace llb
