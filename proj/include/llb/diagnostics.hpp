#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "llb/field.hpp"

namespace llb {

struct BundleConnection;
struct Trajectory;

// Per-step scalar diagnostics recorded by the run loop.  energy_residual and
// dv_bound_slack are cumulative-in-time quantities evaluated with trapezoid
// quadrature over the recorded integrands (see solver.cpp).
struct DiagnosticsRecord {
  double t = 0.0;
  double linf = 0.0;
  double l2 = 0.0, l4 = 0.0, l8 = 0.0;
  double dv_l2 = 0.0;
  double lap_l2 = 0.0;
  double h1 = 0.0, h2 = 0.0;
  double energy_residual = 0.0;
  double dv_bound_slack = 0.0;
};

struct CheckReport {
  std::string name;
  bool passed = false;
  bool flagged = false;  // soft violation (curved-metric a-priori bound)
  double worst = 0.0;
  std::string detail;
};

// sup-norm decay: max_t ||V(t)||_inf <= ||V0||_inf (1 + tol); reports the
// worst relative overshoot.
CheckReport check_max_principle(const Trajectory& traj, double tol = 1e-6);

// Per-step monotone decay of ||V||_p up to relative slack tol.
CheckReport check_lp_monotone(const Trajectory& traj, double p, double tol = 1e-8);

// Global balance |(||V||_2^2 + 2 Int ||DV||_2^2 + 2 lambda Int (||V||_2^2 +
// mu ||V||_4^4)) - ||V0||_2^2| / ||V0||_2^2, recomputed from the recorded
// columns with trapezoid quadrature; max over the trajectory must stay below
// tol.
CheckReport check_energy_identity(const Trajectory& traj, double tol = 1e-3);

// A-priori gradient bound: ||DV(t)||^2 + Int_0^t ||Lap V||^2 <= lambda^2 (1 +
// mu ||V0||_inf^2)^2 ||V0||_2^2 t + ||DV0||^2, tolerance relative to the
// right-hand side.  Violations on curved-metric grids flag instead of fail.
CheckReport check_dv_bound(const Trajectory& traj, double tol = 1e-3);

struct SweepEntry {
  double scale = 0.0;
  double max_linf = 0.0, max_h1 = 0.0, max_h2 = 0.0;
  bool blown_up = false;
  std::string end_reason;
};

struct SolverConfig;

// Reruns scaled copies of V0 through the solver and reports boundedness per
// scale.
std::vector<SweepEntry> smallness_sweep(const Section& v0, const std::vector<double>& scales,
                                        const BundleConnection& conn, const SolverConfig& cfg);

// diagnostics.csv body; the header line is part of the format contract.
void write_diagnostics_csv(const Trajectory& traj, std::ostream& os);
// Per-step slack table for verification reports.
void write_slack_csv(const Trajectory& traj, std::ostream& os);

}  // namespace llb
