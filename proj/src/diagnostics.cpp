#include "llb/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "llb/solver.hpp"

namespace llb {

namespace {

void require_records(const Trajectory& traj) {
  if (traj.records.empty()) throw std::runtime_error("trajectory has no records");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CheckReport check_max_principle(const Trajectory& traj, double tol) {
  require_records(traj);
  CheckReport rep;
  rep.name = "max_principle";
  const double linf0 = traj.records.front().linf;
  const double scale = std::max(linf0, 1e-300);
  double worst = 0.0;
  for (const auto& r : traj.records) worst = std::max(worst, (r.linf - linf0) / scale);
  rep.worst = worst;
  rep.passed = worst <= tol;
  rep.detail = "worst relative overshoot " + fmt(worst) + " (tol " + fmt(tol) + ")";
  return rep;
}

CheckReport check_lp_monotone(const Trajectory& traj, double p, double tol) {
  require_records(traj);
  CheckReport rep;
  rep.name = "lp_monotone_p" + fmt(p);
  auto col = [&](const DiagnosticsRecord& r) -> double {
    if (p == 2.0) return r.l2;
    if (p == 4.0) return r.l4;
    if (p == 8.0) return r.l8;
    if (std::isinf(p)) return r.linf;
    throw std::runtime_error("lp_monotone: p must be one of 2, 4, 8, inf");
  };
  double worst = 0.0;
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const double prev = col(traj.records[i - 1]);
    const double cur = col(traj.records[i]);
    const double rise = (cur - prev) / std::max(prev, 1e-300);
    worst = std::max(worst, rise);
  }
  rep.worst = worst;
  rep.passed = worst <= tol;
  rep.detail = "worst per-step relative rise " + fmt(worst) + " (tol " + fmt(tol) + ")";
  return rep;
}

CheckReport check_energy_identity(const Trajectory& traj, double tol) {
  require_records(traj);
  CheckReport rep;
  rep.name = "energy_identity";
  const auto& recs = traj.records;
  const double e0 = recs.front().l2 * recs.front().l2;
  auto integrand = [&](const DiagnosticsRecord& r) {
    return 2.0 * r.dv_l2 * r.dv_l2 +
           2.0 * traj.lambda * (r.l2 * r.l2 + traj.mu * std::pow(r.l4, 4.0));
  };
  double acc = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i > 0) {
      const double dt = traj.times[i] - traj.times[i - 1];
      acc += 0.5 * dt * (integrand(recs[i - 1]) + integrand(recs[i]));
    }
    const double lhs = recs[i].l2 * recs[i].l2 + acc;
    const double res = e0 > 0.0 ? std::fabs(lhs - e0) / e0 : 0.0;
    worst = std::max(worst, res);
  }
  rep.worst = worst;
  rep.passed = worst <= tol;
  rep.detail = "max relative balance defect " + fmt(worst) + " (tol " + fmt(tol) + ")";
  return rep;
}

CheckReport check_dv_bound(const Trajectory& traj, double tol) {
  require_records(traj);
  CheckReport rep;
  rep.name = "dv_bound";
  const auto& recs = traj.records;
  const double linf0 = recs.front().linf;
  const double e0 = recs.front().l2 * recs.front().l2;
  const double dv0_sq = recs.front().dv_l2 * recs.front().dv_l2;
  const double rate =
      traj.lambda * traj.lambda * std::pow(1.0 + traj.mu * linf0 * linf0, 2.0) * e0;
  double acc = 0.0;
  double worst = 0.0;  // most negative relative slack, reported as positive deficit
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i > 0) {
      const double dt = traj.times[i] - traj.times[i - 1];
      acc += 0.5 * dt * (recs[i - 1].lap_l2 * recs[i - 1].lap_l2 +
                         recs[i].lap_l2 * recs[i].lap_l2);
    }
    const double bound = rate * traj.times[i] + dv0_sq;
    const double lhs = recs[i].dv_l2 * recs[i].dv_l2 + acc;
    const double deficit = (lhs - bound) / std::max(bound, 1e-300);
    worst = std::max(worst, deficit);
  }
  rep.worst = worst;
  const bool ok = worst <= tol;
  if (!ok && traj.curved_metric) {
    rep.passed = true;
    rep.flagged = true;
    rep.detail = "deficit " + fmt(worst) +
                 " exceeds tol on a curved-metric grid; flagged, not failed";
  } else {
    rep.passed = ok;
    rep.detail = "worst relative deficit " + fmt(worst) + " (tol " + fmt(tol) + ")";
  }
  return rep;
}

std::vector<SweepEntry> smallness_sweep(const Section& v0, const std::vector<double>& scales,
                                        const BundleConnection& conn,
                                        const SolverConfig& cfg) {
  std::vector<SweepEntry> out;
  out.reserve(scales.size());
  for (double s : scales) {
    if (!(s > 0.0)) throw std::runtime_error("smallness_sweep: scales must be positive");
    const Trajectory traj = run(scaled(v0, s), conn, cfg);
    SweepEntry e;
    e.scale = s;
    for (const auto& r : traj.records) {
      e.max_linf = std::max(e.max_linf, r.linf);
      e.max_h1 = std::max(e.max_h1, r.h1);
      e.max_h2 = std::max(e.max_h2, r.h2);
    }
    e.blown_up = traj.blown_up;
    e.end_reason = traj.end_reason;
    out.push_back(std::move(e));
  }
  return out;
}

void write_diagnostics_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,linf,l2,l4,l8,dv_l2,lap_l2,h1,h2,energy_residual,dv_bound_slack\n";
  for (const auto& r : traj.records) {
    os << fmt(r.t) << ',' << fmt(r.linf) << ',' << fmt(r.l2) << ',' << fmt(r.l4) << ','
       << fmt(r.l8) << ',' << fmt(r.dv_l2) << ',' << fmt(r.lap_l2) << ',' << fmt(r.h1)
       << ',' << fmt(r.h2) << ',' << fmt(r.energy_residual) << ','
       << fmt(r.dv_bound_slack) << '\n';
  }
}

void write_slack_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,energy_residual,dv_bound_slack,linf_overshoot\n";
  const double linf0 = traj.records.empty() ? 0.0 : traj.records.front().linf;
  for (const auto& r : traj.records)
    os << fmt(r.t) << ',' << fmt(r.energy_residual) << ',' << fmt(r.dv_bound_slack) << ','
       << fmt(r.linf - linf0) << '\n';
}

}  // namespace llb
