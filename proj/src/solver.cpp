#include "llb/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "llb/calculus.hpp"
#include "llb/norms.hpp"
#include "llb/parallel.hpp"

namespace llb {

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) throw std::runtime_error("solver.lambda > 0 required");
  if (!(mu > 0.0)) throw std::runtime_error("solver.mu > 0 required");
  if (dt < 0.0 || !std::isfinite(dt)) throw std::runtime_error("solver.dt must be >= 0");
  if (!(t_end > 0.0)) throw std::runtime_error("solver.t_end must be positive");
  if (!(cg_tol > 0.0)) throw std::runtime_error("solver.cg_tol must be positive");
  if (cg_max_iter < 0) throw std::runtime_error("solver.cg_max_iter must be >= 0");
  if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
    throw std::runtime_error("solver.cfl_safety must be in (0, 1]");
}

Section rhs(const Section& v, const BundleConnection& conn, double lambda, double mu) {
  if (!v.finite()) throw std::runtime_error("rhs: non-finite field values");
  const Section lap = laplacian(v, conn);
  Section out(v.grid, 0, 3);
  par::parallel_for(v.grid->n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const Vec3 vv = v.vec(node);
      const Vec3 lv = lap.vec(node);
      const double react = lambda * (1.0 + mu * norm2(vv));
      out.set_vec(node, 0, lv + cross(vv, lv) - react * vv);
    }
  });
  return out;
}

double cfl_dt_limit(const ManifoldGrid& grid, double cfl_safety) {
  double hmin = grid.h[0];
  for (double hv : grid.h) hmin = std::min(hmin, hv);
  return cfl_safety * hmin * hmin / (2.0 * grid.m * grid.max_ginv_diag);
}

Section step_rk4(const Section& v, double dt, const BundleConnection& conn,
                 const SolverConfig& cfg) {
  const double limit = cfl_dt_limit(*v.grid, cfg.cfl_safety);
  if (dt > limit)
    throw std::runtime_error("rk4 step size " + std::to_string(dt) +
                             " exceeds parabolic limit " + std::to_string(limit));
  const Section k1 = rhs(v, conn, cfg.lambda, cfg.mu);
  const Section k2 = rhs(axpy(v, 0.5 * dt, k1), conn, cfg.lambda, cfg.mu);
  const Section k3 = rhs(axpy(v, 0.5 * dt, k2), conn, cfg.lambda, cfg.mu);
  const Section k4 = rhs(axpy(v, dt, k3), conn, cfg.lambda, cfg.mu);
  Section out = v;
  axpy_inplace(out, dt / 6.0, k1);
  axpy_inplace(out, dt / 3.0, k2);
  axpy_inplace(out, dt / 3.0, k3);
  axpy_inplace(out, dt / 6.0, k4);
  return out;
}

namespace {

Section apply_helmholtz(const Section& x, double dt, const BundleConnection& conn) {
  Section out = x;
  axpy_inplace(out, -dt, laplacian(x, conn));
  return out;
}

}  // namespace

Section step_imex(const Section& v, double dt, const BundleConnection& conn,
                  const SolverConfig& cfg) {
  if (!v.finite()) throw std::runtime_error("imex: non-finite field values");
  const Section lap = laplacian(v, conn);
  Section b(v.grid, 0, 3);
  par::parallel_for(v.grid->n_nodes, [&](std::size_t bb, std::size_t ee) {
    for (std::size_t node = bb; node < ee; ++node) {
      const Vec3 vv = v.vec(node);
      const Vec3 lv = lap.vec(node);
      const double react = cfg.lambda * (1.0 + cfg.mu * norm2(vv));
      b.set_vec(node, 0, vv + dt * (cross(vv, lv) - react * vv));
    }
  });

  const double bnorm = std::sqrt(std::max(weighted_dot(b, b), 0.0));
  if (bnorm == 0.0) return b;  // zero stays zero

  int max_iter = cfg.cg_max_iter;
  if (max_iter == 0) {
    int nmax = 0;
    for (int s : v.grid->sizes) nmax = std::max(nmax, s);
    max_iter = 10 * nmax;
  }

  Section x = v;
  Section r = b;
  axpy_inplace(r, -1.0, apply_helmholtz(x, dt, conn));
  Section p = r;
  double rs = weighted_dot(r, r);
  const double stop = cfg.cg_tol * bnorm;
  if (std::sqrt(rs) <= stop) return x;
  for (int it = 0; it < max_iter; ++it) {
    const Section ap = apply_helmholtz(p, dt, conn);
    const double p_ap = weighted_dot(p, ap);
    if (!(p_ap > 0.0))
      throw std::runtime_error("cg: operator lost positivity (p^T A p = " +
                               std::to_string(p_ap) + ")");
    const double alpha = rs / p_ap;
    axpy_inplace(x, alpha, p);
    axpy_inplace(r, -alpha, ap);
    const double rs_new = weighted_dot(r, r);
    if (std::sqrt(rs_new) <= stop) return x;
    axpy_inplace(p, (rs_new / rs) - 1.0, p);  // p = r + beta p
    axpy_inplace(p, 1.0, r);
    rs = rs_new;
  }
  throw std::runtime_error("cg: no convergence after " + std::to_string(max_iter) +
                           " iterations, residual " + std::to_string(std::sqrt(rs)) +
                           " target " + std::to_string(stop));
}

namespace {

struct StepDiagnostics {
  DiagnosticsRecord rec;
  double energy_integrand = 0.0;  // 2||DV||_2^2 + 2 lambda (||V||_2^2 + mu ||V||_4^4)
  double lap_sq = 0.0;            // ||Lap V||_2^2
};

StepDiagnostics measure(const Section& v, double t, const BundleConnection& conn,
                        const SolverConfig& cfg) {
  StepDiagnostics d;
  d.rec.t = t;
  d.rec.linf = lp_norm(v, std::numeric_limits<double>::infinity());
  d.rec.l2 = lp_norm(v, 2.0);
  d.rec.l4 = lp_norm(v, 4.0);
  d.rec.l8 = lp_norm(v, 8.0);
  const TensorField dv = covariant_derivative(v, conn);
  const TensorField d2 = covariant_derivative(dv, conn);
  d.rec.dv_l2 = lp_norm(dv, 2.0);
  const double d2_l2 = lp_norm(d2, 2.0);

  const auto& grid = *v.grid;
  const int m = grid.m;
  TensorField lap(v.grid, 0, 3);
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* gi = grid.ginv_at(node);
      Vec3 acc;
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          acc += gi[p * m + q] * d2.vec(node, static_cast<std::size_t>(p) * m + q);
      lap.set_vec(node, 0, acc);
    }
  });
  d.rec.lap_l2 = lp_norm(lap, 2.0);

  d.rec.h1 = std::sqrt(d.rec.l2 * d.rec.l2 + d.rec.dv_l2 * d.rec.dv_l2);
  d.rec.h2 = std::sqrt(d.rec.l2 * d.rec.l2 + d.rec.dv_l2 * d.rec.dv_l2 + d2_l2 * d2_l2);
  d.energy_integrand = 2.0 * d.rec.dv_l2 * d.rec.dv_l2 +
                       2.0 * cfg.lambda * (d.rec.l2 * d.rec.l2 +
                                           cfg.mu * std::pow(d.rec.l4, 4.0));
  d.lap_sq = d.rec.lap_l2 * d.rec.lap_l2;
  return d;
}

}  // namespace

Trajectory run(const Section& v0, const BundleConnection& conn, const SolverConfig& cfg) {
  cfg.validate();
  if (!v0.finite()) throw std::runtime_error("run: non-finite initial data");

  double dt = cfg.dt;
  if (dt == 0.0) {
    if (cfg.scheme == SolverConfig::Scheme::rk4) {
      dt = cfl_dt_limit(*v0.grid, cfg.cfl_safety);
    } else {
      dt = v0.grid->h[0];
      for (double hv : v0.grid->h) dt = std::min(dt, hv);
    }
  }
  // A CFL-illegal dt is a configuration error, not a blow-up: fail before
  // stepping so the in-loop halt handling only sees genuine runtime events.
  if (cfg.scheme == SolverConfig::Scheme::rk4 && dt > cfl_dt_limit(*v0.grid, cfg.cfl_safety))
    throw std::runtime_error("rk4 step size " + std::to_string(dt) +
                             " exceeds parabolic limit " +
                             std::to_string(cfl_dt_limit(*v0.grid, cfg.cfl_safety)));

  Trajectory traj;
  traj.curved_metric = !v0.grid->flat;
  traj.lambda = cfg.lambda;
  traj.mu = cfg.mu;

  Section v = v0;
  double t = 0.0;
  StepDiagnostics prev = measure(v, t, conn, cfg);
  const double e0 = prev.rec.l2 * prev.rec.l2;
  const double linf0 = prev.rec.linf;
  const double dv0_sq = prev.rec.dv_l2 * prev.rec.dv_l2;
  const double apriori_rate =
      cfg.lambda * cfg.lambda * std::pow(1.0 + cfg.mu * linf0 * linf0, 2.0) * e0;
  double energy_acc = 0.0;  // trapezoid of the energy integrand
  double lap_acc = 0.0;     // trapezoid of ||Lap V||^2

  auto finalize_record = [&](StepDiagnostics& d) {
    const double lhs = d.rec.l2 * d.rec.l2 + energy_acc;
    d.rec.energy_residual = e0 > 0.0 ? std::fabs(lhs - e0) / e0 : 0.0;
    const double bound = apriori_rate * d.rec.t + dv0_sq;
    d.rec.dv_bound_slack = bound - (d.rec.dv_l2 * d.rec.dv_l2 + lap_acc);
    traj.times.push_back(d.rec.t);
    traj.records.push_back(d.rec);
  };
  auto keep_state = [&](const Section& s, double ts) {
    traj.state_times.push_back(ts);
    traj.states.push_back(s);
  };

  finalize_record(prev);
  keep_state(v, t);

  const double t_eps = 1e-12 * cfg.t_end;
  std::size_t step = 0;
  while (t < cfg.t_end - t_eps) {
    const double dtn = std::min(dt, cfg.t_end - t);
    Section next(v.grid, 0, 3);
    try {
      next = cfg.scheme == SolverConfig::Scheme::rk4 ? step_rk4(v, dtn, conn, cfg)
                                                     : step_imex(v, dtn, conn, cfg);
    } catch (const std::exception& ex) {
      traj.blown_up = true;
      traj.end_reason = ex.what();
      break;
    }
    const double amax = next.max_abs();
    if (!std::isfinite(amax) || amax > 1e6) {
      traj.blown_up = true;
      traj.end_reason = "state norm escaped (max component " + std::to_string(amax) +
                        ") at t = " + std::to_string(t + dtn);
      break;
    }
    v = std::move(next);
    t += dtn;
    ++step;
    StepDiagnostics cur = measure(v, t, conn, cfg);
    energy_acc += 0.5 * dtn * (prev.energy_integrand + cur.energy_integrand);
    lap_acc += 0.5 * dtn * (prev.lap_sq + cur.lap_sq);
    finalize_record(cur);
    prev = cur;
    const bool at_end = t >= cfg.t_end - t_eps;
    if (at_end || (cfg.snapshot_every > 0 && step % static_cast<std::size_t>(cfg.snapshot_every) == 0))
      keep_state(v, t);
  }
  // On early halt the last finite state is still useful for post-mortems.
  if (traj.blown_up && (traj.state_times.empty() || traj.state_times.back() != t))
    keep_state(v, t);
  return traj;
}

}  // namespace llb
