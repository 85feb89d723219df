#pragma once

// Shared factories for the test suites: canonical grids, connections, and
// tolerances used across modules.

#include <cmath>
#include <vector>

#include "llb/connection.hpp"
#include "llb/field.hpp"
#include "llb/grid.hpp"

namespace llbtest {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline llb::GridPtr flat_grid(int n, double len = 1.0, int dim = 2) {
  return llb::build_grid(llb::MetricSpec{}, std::vector<int>(dim, n),
                         std::vector<double>(dim, len));
}

inline llb::MetricSpec conformal_spec(double a = 0.15, int dim = 2) {
  llb::MetricSpec s;
  s.family = llb::MetricSpec::Family::conformal;
  s.amplitude = a;
  s.kappa.assign(dim, 1);
  return s;
}

inline llb::GridPtr conformal_grid(int n, double a = 0.15, int dim = 2, double len = 1.0) {
  return llb::build_grid(conformal_spec(a, dim), std::vector<int>(dim, n),
                         std::vector<double>(dim, len));
}

inline llb::BundleConnection trivial_conn(const llb::GridPtr& g) {
  return llb::build_connection(llb::ConnectionSpec{}, g);
}

inline llb::ConnectionSpec constant_skew_spec(std::vector<double> theta,
                                              std::vector<int> axes = {}) {
  llb::ConnectionSpec s;
  s.family = llb::ConnectionSpec::Family::constant_skew;
  s.theta = std::move(theta);
  if (!axes.empty()) s.axes = std::move(axes);
  return s;
}

inline llb::ConnectionSpec curved_conn_spec(int dim = 2) {
  llb::ConnectionSpec s;
  s.family = llb::ConnectionSpec::Family::curved;
  s.axes = dim == 2 ? std::vector<int>{3, 1} : std::vector<int>{3, 1, 2};
  s.theta = dim == 2 ? std::vector<double>{0.4, 0.3} : std::vector<double>{0.4, 0.3, 0.2};
  s.kappa.assign(dim, 1);
  return s;
}

inline double rel_err(double got, double want) {
  const double scale = std::fabs(want) > 1e-300 ? std::fabs(want) : 1.0;
  return std::fabs(got - want) / scale;
}

}  // namespace llbtest
