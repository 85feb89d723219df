#include "llb/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "llb/field.hpp"
#include "llb/parallel.hpp"

namespace llb {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void invert_sym(const double* g, double* out, int m, std::size_t node) {
  if (m == 2) {
    const double a = g[0], b = g[1], d = g[3];
    const double det = a * d - b * b;
    if (!(det > 0.0) || !(a > 0.0))
      throw std::runtime_error("metric not SPD at node " + std::to_string(node));
    out[0] = d / det;
    out[1] = out[2] = -b / det;
    out[3] = a / det;
  } else {
    const double a = g[0], b = g[1], c = g[2], d = g[4], e = g[5], f = g[8];
    const double det2 = a * d - b * b;
    const double det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
    if (!(a > 0.0) || !(det2 > 0.0) || !(det > 0.0))
      throw std::runtime_error("metric not SPD at node " + std::to_string(node));
    out[0] = (d * f - e * e) / det;
    out[1] = (c * e - b * f) / det;
    out[2] = (b * e - c * d) / det;
    out[3] = out[1];
    out[4] = (a * f - c * c) / det;
    out[5] = (c * b - a * e) / det;
    out[6] = out[2];
    out[7] = out[5];
    out[8] = (a * d - b * b) / det;
  }
}

double det_sym(const double* g, int m) {
  if (m == 2) return g[0] * g[3] - g[1] * g[1];
  return g[0] * (g[4] * g[8] - g[5] * g[5]) - g[1] * (g[1] * g[8] - g[5] * g[2]) +
         g[2] * (g[1] * g[5] - g[4] * g[2]);
}

}  // namespace

void MetricSpec::validate(int dim) const {
  if (family == Family::conformal) {
    if (!(std::fabs(amplitude) < 1.0))
      throw std::runtime_error("conformal metric amplitude must satisfy |a| < 1");
    if (!kappa.empty() && static_cast<int>(kappa.size()) != dim)
      throw std::runtime_error("metric.kappa must have one entry per axis");
  }
}

void ManifoldGrid::node_coords(std::size_t node, double* x) const {
  for (int a = m - 1; a >= 0; --a) {
    const std::size_t n = static_cast<std::size_t>(sizes[a]);
    x[a] = static_cast<double>(node % n) * h[a];
    node /= n;
  }
}

std::size_t ManifoldGrid::node_index(const int* idx) const {
  std::size_t node = 0;
  for (int a = 0; a < m; ++a)
    node = node * static_cast<std::size_t>(sizes[a]) + static_cast<std::size_t>(idx[a]);
  return node;
}

double ManifoldGrid::volume() const {
  const double sum = par::reduce_add(n_nodes, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += sqrtg[i];
    return s;
  });
  return sum * cell_volume;
}

GridPtr build_grid(const MetricSpec& spec, const std::vector<int>& sizes,
                   const std::vector<double>& lengths) {
  const int m = static_cast<int>(sizes.size());
  if (m != 2 && m != 3) throw std::runtime_error("grid dimension must be 2 or 3");
  if (lengths.size() != sizes.size())
    throw std::runtime_error("grid.lengths must have one entry per axis");
  for (int a = 0; a < m; ++a) {
    if (sizes[a] < 8) throw std::runtime_error("grid sizes must be >= 8 nodes per axis");
    if (!(lengths[a] > 0.0)) throw std::runtime_error("grid lengths must be positive");
  }
  spec.validate(m);

  auto grid = std::make_shared<ManifoldGrid>();
  grid->m = m;
  grid->sizes = sizes;
  grid->lengths = lengths;
  grid->metric = spec;
  grid->flat = spec.is_flat();
  grid->h.resize(m);
  grid->n_nodes = 1;
  grid->cell_volume = 1.0;
  for (int a = 0; a < m; ++a) {
    grid->h[a] = lengths[a] / sizes[a];
    grid->n_nodes *= static_cast<std::size_t>(sizes[a]);
    grid->cell_volume *= grid->h[a];
  }
  const std::size_t nn = grid->n_nodes;

  grid->nbr_plus.resize(static_cast<std::size_t>(m) * nn);
  grid->nbr_minus.resize(static_cast<std::size_t>(m) * nn);
  {
    // Strides of each axis in the row-major node index.
    std::vector<std::size_t> stride(m, 1);
    for (int a = m - 2; a >= 0; --a)
      stride[a] = stride[a + 1] * static_cast<std::size_t>(sizes[a + 1]);
    std::vector<int> idx(m, 0);
    for (std::size_t node = 0; node < nn; ++node) {
      for (int a = 0; a < m; ++a) {
        const std::size_t base = static_cast<std::size_t>(a) * nn + node;
        const int n = sizes[a];
        grid->nbr_plus[base] = idx[a] + 1 < n ? node + stride[a] : node - stride[a] * (n - 1);
        grid->nbr_minus[base] = idx[a] > 0 ? node - stride[a] : node + stride[a] * (n - 1);
      }
      for (int a = m - 1; a >= 0; --a) {
        if (++idx[a] < sizes[a]) break;
        idx[a] = 0;
      }
    }
  }

  grid->g.resize(nn * m * m);
  grid->ginv.resize(nn * m * m);
  grid->sqrtg.resize(nn);

  const bool conformal = spec.family == MetricSpec::Family::conformal;
  std::vector<int> kap = spec.kappa;
  if (conformal && kap.empty()) kap.assign(m, 0);

  par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(m);
    for (std::size_t node = b; node < e; ++node) {
      double* gn = &grid->g[node * m * m];
      for (int i = 0; i < m * m; ++i) gn[i] = 0.0;
      double phi = 0.0;
      if (conformal) {
        grid->node_coords(node, x.data());
        phi = spec.amplitude;
        for (int a = 0; a < m; ++a) phi *= std::cos(kTwoPi * kap[a] * x[a] / lengths[a]);
      }
      const double e2phi = std::exp(2.0 * phi);
      for (int i = 0; i < m; ++i) gn[i * m + i] = e2phi;
      invert_sym(gn, &grid->ginv[node * m * m], m, node);
      const double det = det_sym(gn, m);
      if (!(det > 0.0)) throw std::runtime_error("metric not SPD at node " + std::to_string(node));
      grid->sqrtg[node] = std::sqrt(det);
    }
  });

  grid->max_ginv_diag = par::reduce_max(nn, [&](std::size_t b, std::size_t e) {
    double v = 0.0;
    for (std::size_t node = b; node < e; ++node)
      for (int i = 0; i < m; ++i) v = std::max(v, grid->ginv[node * m * m + i * m + i]);
    return v;
  });

  // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), central
  // differences of the stored metric; exactly symmetric in (i,j) and exactly
  // zero whenever g is constant.
  grid->gamma.assign(nn * m * m * m, 0.0);
  if (!grid->flat) {
    par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
      std::vector<double> dg(static_cast<std::size_t>(m) * m * m);  // [p][i][j]
      for (std::size_t node = b; node < e; ++node) {
        for (int p = 0; p < m; ++p) {
          const double* gp = grid->g_at(grid->neighbor(p, node, +1));
          const double* gm = grid->g_at(grid->neighbor(p, node, -1));
          const double inv2h = 1.0 / (2.0 * grid->h[p]);
          for (int ij = 0; ij < m * m; ++ij) dg[p * m * m + ij] = (gp[ij] - gm[ij]) * inv2h;
        }
        const double* gi = grid->ginv_at(node);
        double* gam = &grid->gamma[node * m * m * m];
        for (int k = 0; k < m; ++k)
          for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
              double s = 0.0;
              for (int l = 0; l < m; ++l)
                s += gi[k * m + l] * (dg[(i * m + j) * m + l] + dg[(j * m + i) * m + l] -
                                      dg[(l * m + i) * m + j]);
              s *= 0.5;
              gam[(k * m + i) * m + j] = s;
              gam[(k * m + j) * m + i] = s;
            }
      }
    });
  }

  return grid;
}

std::vector<double> manifold_curvature_raw(const ManifoldGrid& grid) {
  const int m = grid.m;
  const std::size_t nn = grid.n_nodes;
  std::vector<double> raw(nn * m * m * m * m, 0.0);  // [node][h][i][j][r]
  if (grid.flat) return raw;

  par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
    std::vector<double> dgam(static_cast<std::size_t>(m) * m * m * m);  // [p][k][i][j]
    for (std::size_t node = b; node < e; ++node) {
      for (int p = 0; p < m; ++p) {
        const double* gp = grid.gamma_at(grid.neighbor(p, node, +1));
        const double* gm = grid.gamma_at(grid.neighbor(p, node, -1));
        const double inv2h = 1.0 / (2.0 * grid.h[p]);
        for (int kij = 0; kij < m * m * m; ++kij)
          dgam[p * m * m * m + kij] = (gp[kij] - gm[kij]) * inv2h;
      }
      const double* gam = grid.gamma_at(node);
      double* out = &raw[node * m * m * m * m];
      for (int hh = 0; hh < m; ++hh)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            for (int r = 0; r < m; ++r) {
              double s = dgam[((i * m + hh) * m + j) * m + r] -
                         dgam[((j * m + hh) * m + i) * m + r];
              for (int l = 0; l < m; ++l)
                s += gam[(hh * m + i) * m + l] * gam[(l * m + j) * m + r] -
                     gam[(hh * m + j) * m + l] * gam[(l * m + i) * m + r];
              out[((hh * m + i) * m + j) * m + r] = s;
            }
    }
  });
  return raw;
}

TensorField manifold_curvature(const GridPtr& grid) {
  const int m = grid->m;
  const std::size_t nn = grid->n_nodes;
  const std::vector<double> raw = manifold_curvature_raw(*grid);

  TensorField low(grid, 4, 1);
  par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* rw = &raw[node * m * m * m * m];
      const double* gn = grid->g_at(node);
      double* out = low.at(node);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int r = 0; r < m; ++r)
            for (int l = 0; l < m; ++l) {
              double s = 0.0;
              for (int hh = 0; hh < m; ++hh)
                s += rw[((hh * m + i) * m + j) * m + r] * gn[hh * m + l];
              out[((i * m + j) * m + r) * m + l] = s;
            }
    }
  });
  return low;
}

}  // namespace llb
