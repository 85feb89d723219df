#pragma once

#include <cstdint>
#include <vector>

#include "llb/grid.hpp"
#include "llb/vec3.hpp"

namespace llb {

// Tensor field with `rank` covariant manifold indices and either a bundle
// fiber (R^3, fiber == 3) or a scalar fiber (fiber == 1).  Storage is
// [node][multi-index][fiber component], the multi-index flattened row-major
// (first index varies slowest).  A Section is the rank-0 bundle case.
struct TensorField {
  GridPtr grid;
  int rank = 0;
  int fiber = 3;
  std::vector<double> values;

  TensorField() = default;
  TensorField(GridPtr g, int rank_, int fiber_);

  std::size_t nmulti() const;                // m^rank
  std::size_t ncomp() const { return nmulti() * static_cast<std::size_t>(fiber); }

  double* at(std::size_t node) { return &values[node * ncomp()]; }
  const double* at(std::size_t node) const { return &values[node * ncomp()]; }

  Vec3 vec(std::size_t node, std::size_t multi = 0) const {
    return load3(&values[(node * nmulti() + multi) * 3]);
  }
  void set_vec(std::size_t node, std::size_t multi, const Vec3& v) {
    store3(&values[(node * nmulti() + multi) * 3], v);
  }

  bool finite() const;
  double max_abs() const;
};

using Section = TensorField;

// Pointwise linear combos; shapes must match.
TensorField axpy(const TensorField& x, double a, const TensorField& y);  // x + a*y
void axpy_inplace(TensorField& x, double a, const TensorField& y);       // x += a*y
TensorField scaled(const TensorField& x, double a);

Section make_zero_section(const GridPtr& grid);
Section make_constant_section(const GridPtr& grid, const Vec3& value);

// amp * sin(2 pi sum_i kappa_i x_i / L_i) carried by the given fiber axis
// (1-based).
Section make_fourier_mode(const GridPtr& grid, const std::vector<int>& kappa, int fiber_axis,
                          double amplitude);

// Independent N(0,1) coefficients on every Fourier mode with |kappa_i| <=
// max_mode, per fiber component, then rescaled so the sup of the pointwise
// fiber norm equals `amplitude`.  The mode set depends only on max_mode, so a
// fixed seed defines one continuum field across resolutions.  Synthesis is
// deterministic for fixed seed regardless of worker count.
Section make_random_bandlimited(const GridPtr& grid, int max_mode, std::uint64_t seed,
                                double amplitude);

// Same coefficient scheme, one independent band-limited scalar per
// (multi-index, fiber) channel; no normalization.  Used by property tests.
TensorField make_random_tensor(const GridPtr& grid, int rank, int max_mode, std::uint64_t seed);

}  // namespace llb
