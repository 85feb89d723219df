#pragma once

#include <optional>
#include <vector>

#include "llb/grid.hpp"
#include "llb/vec3.hpp"

namespace llb {

// Connection families on the trivial R^3 bundle over the grid.  Coefficients
// A_i(x) are skew 3x3 matrices (metric compatibility in the global
// orthonormal frame), one per axis:
//   trivial:       A_i = 0
//   constant_skew: A_i = theta_i * J_{axes_i}
//   curved:        A_i(x) = theta_i * sin(2 pi sum_j kappa_j x_j / L_j) * J_{axes_i}
// J_k are the so(3) generators (J_k v = e_k x v); an explicit generator may be
// supplied instead and must be skew.
struct ConnectionSpec {
  enum class Family { trivial, constant_skew, curved };
  Family family = Family::trivial;
  std::vector<int> axes;      // generator index 1..3 per axis; default all 3
  std::vector<double> theta;  // amplitude per axis; default 0
  std::vector<int> kappa;     // profile frequency (curved); default 0
  std::optional<Mat3> generator;

  void validate(int dim) const;
};

// Connection coefficients and their curvature on one grid.
//   a: [node][axis] 3x3 row-major
//   f: [node][pair] 3x3 row-major, pairs (i,j) with i < j in lexicographic order
// F_ij = d_i A_j - d_j A_i + [A_i, A_j], derivatives by the grid's central
// differences; F_ji = -F_ij is implied by storage.
struct BundleConnection {
  GridPtr grid;
  bool trivial = false;
  std::vector<double> a;
  std::vector<double> f;

  int npairs() const { return grid->m == 2 ? 1 : 3; }
  static int pair_index(int i, int j, int m);  // requires i < j

  Mat3 a_at(std::size_t node, int axis) const;
  // Signed lookup: f_at(node, j, i) == -f_at(node, i, j); zero when i == j.
  Mat3 f_at(std::size_t node, int i, int j) const;
};

BundleConnection build_connection(const ConnectionSpec& spec, const GridPtr& grid);

// Frame change V -> R V: coefficients conjugate, A_i -> R A_i R^T,
// F_ij -> R F_ij R^T.  Used by the equivariance checks.
BundleConnection conjugated(const BundleConnection& conn, const Mat3& r);

}  // namespace llb
