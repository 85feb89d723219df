#include "llb/calculus.hpp"

#include <cmath>
#include <stdexcept>

#include "llb/parallel.hpp"

namespace llb {

TensorField covariant_derivative(const TensorField& t, const BundleConnection& conn) {
  if (t.grid != conn.grid) throw std::runtime_error("derivative: field/connection grid mismatch");
  const auto& grid = *t.grid;
  const int m = grid.m;
  const int f = t.fiber;
  TensorField out(t.grid, t.rank + 1, f);
  const std::size_t nm = t.nmulti();
  const std::size_t nc_in = t.ncomp();
  const bool use_a = (f == 3) && !conn.trivial;
  const bool use_gamma = (t.rank > 0) && !grid.flat;

  // Strides of the input multi-index slots, for the Gamma substitutions.
  std::vector<std::size_t> st(t.rank, 1);
  for (int i = t.rank - 2; i >= 0; --i) st[i] = st[i + 1] * static_cast<std::size_t>(m);

  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* tv = t.values.data() + node * nc_in;
      double* ov = out.at(node);
      for (int p = 0; p < m; ++p) {
        const double* tp = t.values.data() + grid.neighbor(p, node, +1) * nc_in;
        const double* tm = t.values.data() + grid.neighbor(p, node, -1) * nc_in;
        const double inv2h = 1.0 / (2.0 * grid.h[p]);
        for (std::size_t mi = 0; mi < nm; ++mi) {
          double* o = &ov[(mi * m + static_cast<std::size_t>(p)) * f];
          for (int c = 0; c < f; ++c)
            o[c] = (tp[mi * f + c] - tm[mi * f + c]) * inv2h;
          if (use_a) {
            const Mat3 ap = conn.a_at(node, p);
            const Vec3 av = ap.apply(load3(&tv[mi * 3]));
            o[0] += av.x;
            o[1] += av.y;
            o[2] += av.z;
          }
          if (use_gamma) {
            std::size_t rem = mi;
            for (int slot = 0; slot < t.rank; ++slot) {
              const int digit = static_cast<int>(rem / st[slot]);
              rem %= st[slot];
              const std::size_t base = mi - static_cast<std::size_t>(digit) * st[slot];
              for (int q = 0; q < m; ++q) {
                const double gam = grid.gamma_at(node, q, p, digit);
                if (gam == 0.0) continue;
                const double* tq = &tv[(base + static_cast<std::size_t>(q) * st[slot]) * f];
                for (int c = 0; c < f; ++c) o[c] -= gam * tq[c];
              }
            }
          }
        }
      }
    }
  });
  return out;
}

TensorField iterated_derivative(const Section& v, int k, const BundleConnection& conn) {
  if (v.rank != 0) throw std::runtime_error("iterated_derivative expects a section");
  if (k < 0) throw std::runtime_error("iterated_derivative: order must be >= 0");
  for (int a = 0; a < v.grid->m; ++a)
    if (v.grid->sizes[a] < 2 * k + 4)
      throw std::runtime_error("iterated_derivative: grid too coarse for requested order");
  TensorField cur = v;
  for (int i = 0; i < k; ++i) cur = covariant_derivative(cur, conn);
  return cur;
}

TensorField laplacian(const TensorField& t, const BundleConnection& conn) {
  const TensorField d2 = covariant_derivative(covariant_derivative(t, conn), conn);
  const auto& grid = *t.grid;
  const int m = grid.m;
  const int f = t.fiber;
  TensorField out(t.grid, t.rank, f);
  const std::size_t nm = out.nmulti();
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* gi = grid.ginv_at(node);
      const double* dv = d2.at(node);
      double* ov = out.at(node);
      for (std::size_t mi = 0; mi < nm; ++mi)
        for (int c = 0; c < f; ++c) {
          double acc = 0.0;
          for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q)
              acc += gi[p * m + q] *
                     dv[((mi * m + static_cast<std::size_t>(p)) * m + static_cast<std::size_t>(q)) * f + c];
          ov[mi * f + c] = acc;
        }
    }
  });
  return out;
}

double leibniz_defect(const Section& f1, const Section& f2, const BundleConnection& conn) {
  const TensorField lhs = covariant_derivative(cross(f1, f2), conn);
  const TensorField r1 = cross(covariant_derivative(f1, conn), f2);
  const TensorField r2 = cross(f1, covariant_derivative(f2, conn));
  const auto& grid = *f1.grid;
  const int m = grid.m;
  return par::reduce_max(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double worst = 0.0;
    for (std::size_t node = b; node < e; ++node)
      for (int p = 0; p < m; ++p) {
        const Vec3 d = lhs.vec(node, p) - r1.vec(node, p) - r2.vec(node, p);
        worst = std::max(worst, norm(d));
      }
    return worst;
  });
}

double ricci_defect(const Section& v, const BundleConnection& conn) {
  const TensorField d2 = covariant_derivative(covariant_derivative(v, conn), conn);
  const auto& grid = *v.grid;
  const int m = grid.m;
  return par::reduce_max(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double worst = 0.0;
    for (std::size_t node = b; node < e; ++node) {
      const Vec3 vv = v.vec(node);
      for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q) {
          // components: (D^2 V)_{ab} = V_{,ab}, a inner / b outer
          const Vec3 vqp = d2.vec(node, static_cast<std::size_t>(q) * m + p);
          const Vec3 vpq = d2.vec(node, static_cast<std::size_t>(p) * m + q);
          const Vec3 d = vqp - vpq - conn.f_at(node, p, q).apply(vv);
          worst = std::max(worst, norm(d));
        }
    }
    return worst;
  });
}

double bochner_residual(const Section& v, const BundleConnection& conn) {
  const auto& grid = *v.grid;
  const int m = grid.m;
  const TensorField dv = covariant_derivative(v, conn);
  const TensorField d2 = covariant_derivative(dv, conn);

  // ||Lap V||^2 and ||D^2 V||^2 via pointwise norms
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

  TensorField lap_sq(v.grid, 0, 1), d2_sq(v.grid, 0, 1);
  const TensorField d2_up = raise_all(d2);
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      lap_sq.values[node] = norm2(lap.vec(node));
      double acc = 0.0;
      const double* a = d2.at(node);
      const double* bu = d2_up.at(node);
      for (std::size_t c = 0; c < d2.ncomp(); ++c) acc += a[c] * bu[c];
      d2_sq.values[node] = acc;
    }
  });

  // Correction terms; raw manifold curvature R^h_{jli} enters with index
  // pattern [node][h][j][l][i].
  const std::vector<double> rm = manifold_curvature_raw(grid);
  TensorField corr(v.grid, 0, 1);
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* gi = grid.ginv_at(node);
      const Vec3 vv = v.vec(node);
      double c2e = 0.0, cde = 0.0, cm = 0.0;
      for (int i = 0; i < m; ++i)
        for (int l = 0; l < m; ++l) {
          if (!conn.trivial) {
            const Mat3 fil = conn.f_at(node, i, l);
            // (DF)_{il,j} = d_j F_il + [A_j, F_il] - Gamma^c_{ji} F_cl - Gamma^c_{jl} F_ic
            for (int j = 0; j < m; ++j) {
              Mat3 df;
              {
                const std::size_t jp = grid.neighbor(j, node, +1), jm = grid.neighbor(j, node, -1);
                const double inv2h = 1.0 / (2.0 * grid.h[j]);
                // central difference of the signed F block
                Mat3 fp, fm;
                if (i != l) {
                  const bool flip = i > l;
                  const int lo = flip ? l : i, hi = flip ? i : l;
                  const int pk = BundleConnection::pair_index(lo, hi, m);
                  const double sgn = flip ? -1.0 : 1.0;
                  const double* pp = &conn.f[(jp * conn.npairs() + pk) * 9];
                  const double* pm = &conn.f[(jm * conn.npairs() + pk) * 9];
                  for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) {
                      fp.a[r][c] = sgn * pp[r * 3 + c];
                      fm.a[r][c] = sgn * pm[r * 3 + c];
                    }
                }
                df = (fp - fm);
                df *= inv2h;
              }
              df += commutator(conn.a_at(node, j), fil);
              if (!grid.flat)
                for (int c = 0; c < m; ++c) {
                  df -= grid.gamma_at(node, c, j, i) * conn.f_at(node, c, l);
                  df -= grid.gamma_at(node, c, j, l) * conn.f_at(node, i, c);
                }
              // accumulate g^{ij} g^{kl} <(DF)_{il,j} V, V_,k> and
              // g^{ij} g^{kl} <F_il V_,j, V_,k>
              const Vec3 dfv = df.apply(vv);
              const Vec3 filvj = fil.apply(dv.vec(node, static_cast<std::size_t>(j)));
              for (int k = 0; k < m; ++k) {
                const double w = gi[i * m + j] * gi[k * m + l];
                const Vec3 vk = dv.vec(node, static_cast<std::size_t>(k));
                cde += w * dot(dfv, vk);
                c2e += w * dot(filvj, vk);
              }
            }
          }
          if (!grid.flat) {
            for (int j = 0; j < m; ++j)
              for (int k = 0; k < m; ++k) {
                const double w = gi[i * m + j] * gi[k * m + l];
                double r_dot = 0.0;
                for (int hh = 0; hh < m; ++hh)
                  r_dot += rm[(((node * m + hh) * m + j) * m + l) * m + i] *
                           dot(dv.vec(node, static_cast<std::size_t>(hh)),
                               dv.vec(node, static_cast<std::size_t>(k)));
                cm += w * r_dot;
              }
          }
        }
      corr.values[node] = 2.0 * c2e + cde - cm;
    }
  });

  const double lhs = integrate(lap_sq);
  const double rhs = integrate(d2_sq) + integrate(corr);
  return std::fabs(lhs - rhs) / std::max(lhs, 1.0);
}

double ibp_defect(const Section& v, const Section& w, const BundleConnection& conn) {
  const TensorField lap_v = laplacian(v, conn);
  const TensorField dv = covariant_derivative(v, conn);
  const TensorField dw = covariant_derivative(w, conn);
  const auto& grid = *v.grid;
  const int m = grid.m;
  TensorField integrand(v.grid, 0, 1);
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* gi = grid.ginv_at(node);
      double acc = dot(lap_v.vec(node), w.vec(node));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          acc += gi[i * m + j] * dot(dv.vec(node, static_cast<std::size_t>(i)),
                                     dw.vec(node, static_cast<std::size_t>(j)));
      integrand.values[node] = acc;
    }
  });
  return integrate(integrand);
}

double metric_compat_defect(const Section& u, const Section& v, const BundleConnection& conn) {
  const auto& grid = *u.grid;
  const int m = grid.m;
  const TensorField du = covariant_derivative(u, conn);
  const TensorField dvf = covariant_derivative(v, conn);
  return par::reduce_max(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double worst = 0.0;
    for (std::size_t node = b; node < e; ++node) {
      for (int p = 0; p < m; ++p) {
        const std::size_t np = grid.neighbor(p, node, +1), nm_ = grid.neighbor(p, node, -1);
        const double inv2h = 1.0 / (2.0 * grid.h[p]);
        const double d_pair = (dot(u.vec(np), v.vec(np)) - dot(u.vec(nm_), v.vec(nm_))) * inv2h;
        const double lhs = dot(du.vec(node, static_cast<std::size_t>(p)), v.vec(node)) +
                           dot(u.vec(node), dvf.vec(node, static_cast<std::size_t>(p)));
        worst = std::max(worst, std::fabs(d_pair - lhs));
      }
    }
    return worst;
  });
}

}  // namespace llb
