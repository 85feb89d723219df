#pragma once

#include <string>
#include <vector>

#include "llb/connection.hpp"
#include "llb/diagnostics.hpp"
#include "llb/field.hpp"

namespace llb {

struct SolverConfig {
  enum class Scheme { rk4, imex };
  double lambda = 1.0;
  double mu = 1.0;
  double dt = 0.0;  // 0 = scheme default (rk4: CFL limit, imex: min h)
  double t_end = 0.0;
  Scheme scheme = Scheme::rk4;
  double cg_tol = 1e-10;
  int cg_max_iter = 0;  // 0 = 10 * max axis size
  double cfl_safety = 0.5;
  int snapshot_every = 0;  // 0 = keep only initial and final state

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;            // all step times (records match 1:1)
  std::vector<DiagnosticsRecord> records;
  std::vector<double> state_times;      // subset where states were kept
  std::vector<Section> states;
  bool blown_up = false;
  std::string end_reason;               // empty when the run reached t_end
  bool curved_metric = false;
  double lambda = 0.0, mu = 0.0;
};

// dV/dt = Lap V + V x Lap V - lambda (1 + mu |V|^2) V.  Errors on non-finite
// input.
Section rhs(const Section& v, const BundleConnection& conn, double lambda, double mu);

// Parabolic step-size bound cfl_safety * h_min^2 / (2 m max g^{ii}).
double cfl_dt_limit(const ManifoldGrid& grid, double cfl_safety);

// Classical RK4 step; enforces the CFL bound as a hard precondition.
Section step_rk4(const Section& v, double dt, const BundleConnection& conn,
                 const SolverConfig& cfg);

// One split step (I - dt Lap) V' = V + dt (V x Lap V - lambda (1 + mu |V|^2) V),
// solved matrix-free with CG in the sqrt(det g)-weighted inner product.
// Throws on CG stagnation past cg_max_iter.
Section step_imex(const Section& v, double dt, const BundleConnection& conn,
                  const SolverConfig& cfg);

// Steps to t_end recording diagnostics every step.  Halts early with the
// blow-up flag when the state leaves [|V| <= 1e6] or goes non-finite, or when
// CG fails; the trajectory keeps the last finite state.
Trajectory run(const Section& v0, const BundleConnection& conn, const SolverConfig& cfg);

}  // namespace llb
