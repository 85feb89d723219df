#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "common.hpp"
#include "llb/diagnostics.hpp"
#include "llb/solver.hpp"

using namespace llb;
using namespace llbtest;

namespace {

SolverConfig smooth_cfg() {
  SolverConfig cfg;
  cfg.lambda = 1.0;
  cfg.mu = 1.0;
  cfg.dt = 1e-3;
  cfg.t_end = 0.05;
  return cfg;
}

Trajectory smooth_run() {
  auto g = build_grid(MetricSpec{}, {16, 16}, {kTwoPi, kTwoPi});
  auto conn = trivial_conn(g);
  return run(make_random_bandlimited(g, 1, 7, 1.0), conn, smooth_cfg());
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("zero data yields zero records and passing checks") {
  auto g = flat_grid(8);
  auto conn = trivial_conn(g);
  SolverConfig cfg = smooth_cfg();
  cfg.t_end = 0.01;
  const Trajectory traj = run(make_zero_section(g), conn, cfg);
  for (const auto& r : traj.records) {
    CHECK(r.linf == 0.0);
    CHECK(r.l2 == 0.0);
    CHECK(r.h2 == 0.0);
    CHECK(r.energy_residual == 0.0);
  }
  CHECK(check_max_principle(traj).passed);
  CHECK(check_lp_monotone(traj, 2.0).passed);
  CHECK(check_energy_identity(traj).passed);
  CHECK(check_dv_bound(traj).passed);
}

TEST_CASE("constant data satisfies every monotone check with zero slack") {
  auto g = flat_grid(8);
  auto conn = trivial_conn(g);
  const Trajectory traj = run(make_constant_section(g, {0, 0.6, 0.8}), conn, smooth_cfg());
  REQUIRE(!traj.blown_up);

  const CheckReport mp = check_max_principle(traj);
  CHECK(mp.passed);
  CHECK(mp.worst <= 0.0);
  for (double p : {2.0, 4.0, 8.0}) CHECK(check_lp_monotone(traj, p).passed);
  const CheckReport en = check_energy_identity(traj);
  CHECK(en.passed);
  CHECK(en.worst < 1e-4);
  CHECK(check_dv_bound(traj).passed);
}

TEST_CASE("recorded columns reproduce the dissipation balance step by step") {
  const Trajectory traj = smooth_run();
  REQUIRE(!traj.blown_up);
  const auto& recs = traj.records;
  const double e0 = recs.front().l2 * recs.front().l2;
  auto integrand = [&](const DiagnosticsRecord& r) {
    return 2.0 * r.dv_l2 * r.dv_l2 +
           2.0 * traj.lambda * (r.l2 * r.l2 + traj.mu * std::pow(r.l4, 4.0));
  };
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    const double de = recs[i].l2 * recs[i].l2 - recs[i - 1].l2 * recs[i - 1].l2;
    const double gain = 0.5 * dt * (integrand(recs[i - 1]) + integrand(recs[i]));
    CHECK(std::fabs(de + gain) <= 1e-6 * e0);
  }
  // The recorded cumulative residual agrees with an independent recomputation.
  const CheckReport en = check_energy_identity(traj);
  CHECK(en.passed);
  CHECK(std::fabs(recs.back().energy_residual) <= en.worst + 1e-15);
}

TEST_CASE("gradient bound violations fail flat runs but only flag curved ones") {
  Trajectory traj;
  traj.lambda = 1.0;
  traj.mu = 1.0;
  traj.times = {0.0, 1.0};
  DiagnosticsRecord r0;
  r0.t = 0.0;
  r0.linf = 1.0;
  r0.l2 = 1.0;
  DiagnosticsRecord r1 = r0;
  r1.t = 1.0;
  r1.dv_l2 = 100.0;  // vastly above the a-priori bound
  traj.records = {r0, r1};

  traj.curved_metric = false;
  const CheckReport flat = check_dv_bound(traj);
  CHECK(!flat.passed);
  CHECK(!flat.flagged);

  traj.curved_metric = true;
  const CheckReport curved = check_dv_bound(traj);
  CHECK(curved.passed);
  CHECK(curved.flagged);
  CHECK(curved.detail.find("flagged") != std::string::npos);
}

TEST_CASE("monotonicity checks only accept recorded exponents") {
  const Trajectory traj = smooth_run();
  CHECK_THROWS_WITH_AS(check_lp_monotone(traj, 3.0),
                       doctest::Contains("must be one of 2, 4, 8, inf"), std::runtime_error);
  CHECK(check_lp_monotone(traj, std::numeric_limits<double>::infinity()).name ==
        "lp_monotone_pinf");
  Trajectory empty;
  CHECK_THROWS_WITH_AS(check_max_principle(empty), doctest::Contains("no records"),
                       std::runtime_error);
}

TEST_CASE("amplitude sweep reports per-scale boundedness") {
  auto g = build_grid(MetricSpec{}, {16, 16}, {kTwoPi, kTwoPi});
  auto conn = trivial_conn(g);
  const Section v0 = make_random_bandlimited(g, 1, 7, 1.0);
  SolverConfig cfg = smooth_cfg();
  cfg.t_end = 0.02;

  const auto entries = smallness_sweep(v0, {0.5, 1.0}, conn, cfg);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].scale == 0.5);
  CHECK(!entries[0].blown_up);
  CHECK(!entries[1].blown_up);
  CHECK(entries[0].max_linf < entries[1].max_linf);
  CHECK(entries[0].max_h2 > 0.0);
  CHECK(entries[1].end_reason.empty());

  CHECK_THROWS_WITH_AS(smallness_sweep(v0, {1.0, 0.0}, conn, cfg),
                       doctest::Contains("scales must be positive"), std::runtime_error);
}

TEST_CASE("diagnostics tables carry the pinned headers and one row per step") {
  const Trajectory traj = smooth_run();
  std::ostringstream diag, slack;
  write_diagnostics_csv(traj, diag);
  write_slack_csv(traj, slack);

  const std::string d = diag.str();
  const std::string expect = "t,linf,l2,l4,l8,dv_l2,lap_l2,h1,h2,energy_residual,dv_bound_slack\n";
  REQUIRE(d.size() > expect.size());
  CHECK(d.substr(0, expect.size()) == expect);
  CHECK(count_lines(d) == traj.records.size() + 1);
  CHECK(d.substr(expect.size(), 2) == "0,");  // first record is t = 0

  const std::string s = slack.str();
  const std::string sexpect = "t,energy_residual,dv_bound_slack,linf_overshoot\n";
  CHECK(s.substr(0, sexpect.size()) == sexpect);
  CHECK(count_lines(s) == traj.records.size() + 1);
}
