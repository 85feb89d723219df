#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace llb {

struct TensorField;

// Metric families on the periodic box.  "conformal" is g_ij = e^{2 phi} delta_ij
// with phi(x) = a * prod_i cos(2 pi kappa_i x_i / L_i); |a| < 1 keeps the family
// well inside SPD territory.
struct MetricSpec {
  enum class Family { flat, conformal };
  Family family = Family::flat;
  double amplitude = 0.0;
  std::vector<int> kappa;  // one integer frequency per axis (conformal only)

  void validate(int dim) const;
  bool is_flat() const { return family == Family::flat || amplitude == 0.0; }
};

// Structured periodic grid with metric data sampled at nodes.  Node order is
// row-major in the axis order; all per-node tensors are stored flattened:
//   g, ginv:  [node][i][j]        (m*m each)
//   gamma:    [node][k][i][j]     (m^3, symmetric in i,j)
// Christoffels come from second-order central differences of the stored g,
// not from closed forms, so every discrete operator sees one consistent
// geometry.
struct ManifoldGrid {
  int m = 0;
  std::vector<int> sizes;
  std::vector<double> lengths;
  std::vector<double> h;
  std::size_t n_nodes = 0;
  double cell_volume = 0.0;
  MetricSpec metric;
  bool flat = false;

  std::vector<double> g, ginv, sqrtg, gamma;
  // Periodic neighbor tables per axis: nbr(axis, node, +1/-1).
  std::vector<std::size_t> nbr_plus, nbr_minus;

  double max_ginv_diag = 0.0;  // max over nodes and axes of g^{ii}, for CFL

  std::size_t neighbor(int axis, std::size_t node, int dir) const {
    return dir > 0 ? nbr_plus[static_cast<std::size_t>(axis) * n_nodes + node]
                   : nbr_minus[static_cast<std::size_t>(axis) * n_nodes + node];
  }
  const double* g_at(std::size_t node) const { return &g[node * m * m]; }
  const double* ginv_at(std::size_t node) const { return &ginv[node * m * m]; }
  const double* gamma_at(std::size_t node) const { return &gamma[node * m * m * m]; }
  double gamma_at(std::size_t node, int k, int i, int j) const {
    return gamma[((node * m + k) * m + i) * m + j];
  }

  void node_coords(std::size_t node, double* x) const;
  std::size_t node_index(const int* idx) const;

  double volume() const;  // integral of sqrt(det g)
};

using GridPtr = std::shared_ptr<const ManifoldGrid>;

// Builds the grid and all metric data.  Rejects dim outside {2,3}, any size
// < 8, non-positive lengths, and (paranoia, family should guarantee it) any
// node where g fails Sylvester's SPD test.
GridPtr build_grid(const MetricSpec& spec, const std::vector<int>& sizes,
                   const std::vector<double>& lengths);

// Lowered manifold curvature R_{ijrl} = R^h_{ijr} g_{hl} as a rank-4
// scalar-fiber field, with
//   R^h_{ijr} = d_i Gamma^h_{jr} - d_j Gamma^h_{ir}
//             + Gamma^h_{il} Gamma^l_{jr} - Gamma^h_{jl} Gamma^l_{ir}
// evaluated with the grid's central differences.
TensorField manifold_curvature(const GridPtr& grid);

// Raw components R^h_{ijr}, layout [node][h][i][j][r]; shared by
// manifold_curvature and the second-derivative identity checks.
std::vector<double> manifold_curvature_raw(const ManifoldGrid& grid);

}  // namespace llb
