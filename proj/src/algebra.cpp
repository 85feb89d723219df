#include "llb/algebra.hpp"

#include <cmath>
#include <stdexcept>

#include "llb/parallel.hpp"

namespace llb {

TensorField cross(const TensorField& s, const TensorField& t) {
  if (s.grid != t.grid) throw std::runtime_error("cross: fields on different grids");
  if (s.fiber != 3 || t.fiber != 3) throw std::runtime_error("cross: both fibers must be R^3");
  TensorField out(s.grid, s.rank + t.rank, 3);
  const std::size_t nms = s.nmulti(), nmt = t.nmulti();
  par::parallel_for(s.grid->n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node)
      for (std::size_t is = 0; is < nms; ++is) {
        const Vec3 sv = s.vec(node, is);
        for (std::size_t it = 0; it < nmt; ++it)
          out.set_vec(node, is * nmt + it, cross(sv, t.vec(node, it)));
      }
  });
  return out;
}

TensorField raise_all(const TensorField& t) {
  if (t.rank == 0) return t;
  const int m = t.grid->m;
  TensorField cur = t;
  // Raise one slot per pass; slot `s` of the multi-index has stride
  // m^(rank-1-s) in the flattened layout.
  for (int slot = 0; slot < t.rank; ++slot) {
    TensorField next(t.grid, t.rank, t.fiber);
    std::size_t stride = 1;
    for (int q = 0; q < t.rank - 1 - slot; ++q) stride *= static_cast<std::size_t>(m);
    const std::size_t nm = t.nmulti();
    const int f = t.fiber;
    par::parallel_for(t.grid->n_nodes, [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const double* gi = t.grid->ginv_at(node);
        const double* in = cur.at(node);
        double* out = next.at(node);
        for (std::size_t mi = 0; mi < nm; ++mi) {
          const int digit = static_cast<int>((mi / stride) % static_cast<std::size_t>(m));
          const std::size_t base = mi - static_cast<std::size_t>(digit) * stride;
          for (int c = 0; c < f; ++c) {
            double acc = 0.0;
            for (int q = 0; q < m; ++q)
              acc += gi[digit * m + q] * in[(base + static_cast<std::size_t>(q) * stride) * f + c];
            out[mi * f + c] = acc;
          }
        }
      }
    });
    cur = std::move(next);
  }
  return cur;
}

TensorField fiber_norm(const TensorField& t) {
  const TensorField up = raise_all(t);
  TensorField out(t.grid, 0, 1);
  const std::size_t nc = t.ncomp();
  par::parallel_for(t.grid->n_nodes, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* a = t.at(node);
      const double* bu = up.at(node);
      double acc = 0.0;
      for (std::size_t c = 0; c < nc; ++c) acc += a[c] * bu[c];
      // acc = |T|^2(x) >= 0 up to rounding
      out.values[node] = std::sqrt(std::max(acc, 0.0));
    }
  });
  return out;
}

TensorField star_contract(const TensorField& s, const TensorField& t,
                          const std::vector<std::pair<int, int>>& pairs, bool contract_fibers) {
  if (s.grid != t.grid) throw std::runtime_error("star_contract: fields on different grids");
  const int m = s.grid->m;
  const int np = static_cast<int>(pairs.size());
  std::vector<bool> used_s(s.rank, false), used_t(t.rank, false);
  for (const auto& [ps, pt] : pairs) {
    if (ps < 0 || ps >= s.rank || pt < 0 || pt >= t.rank)
      throw std::runtime_error("star_contract: pairing names a slot that does not exist");
    if (used_s[ps] || used_t[pt])
      throw std::runtime_error("star_contract: slot contracted twice");
    used_s[ps] = true;
    used_t[pt] = true;
  }
  if (contract_fibers && (s.fiber != 3 || t.fiber != 3))
    throw std::runtime_error("star_contract: fiber pairing needs two vector fibers");
  int out_fiber;
  if (contract_fibers)
    out_fiber = 1;
  else if (s.fiber == 1)
    out_fiber = t.fiber;
  else if (t.fiber == 1)
    out_fiber = s.fiber;
  else
    throw std::runtime_error(
        "star_contract: vector (x) vector result requires the fiber pairing");

  const int out_rank = s.rank + t.rank - 2 * np;
  TensorField out(s.grid, out_rank, out_fiber);

  // Slot strides in the flattened multi-indices.
  auto strides = [m](int rank) {
    std::vector<std::size_t> st(rank, 1);
    for (int i = rank - 2; i >= 0; --i) st[i] = st[i + 1] * static_cast<std::size_t>(m);
    return st;
  };
  const auto st_s = strides(s.rank), st_t = strides(t.rank), st_o = strides(out_rank);
  std::vector<int> free_s, free_t;
  for (int i = 0; i < s.rank; ++i)
    if (!used_s[i]) free_s.push_back(i);
  for (int i = 0; i < t.rank; ++i)
    if (!used_t[i]) free_t.push_back(i);

  const std::size_t n_free = out.nmulti();
  const std::size_t n_con = [&] {
    std::size_t r = 1;
    for (int i = 0; i < 2 * np; ++i) r *= static_cast<std::size_t>(m);
    return r;
  }();

  par::parallel_for(s.grid->n_nodes, [&](std::size_t b, std::size_t e) {
    std::vector<int> digits(out_rank, 0), cd(2 * np, 0);
    for (std::size_t node = b; node < e; ++node) {
      const double* gi = s.grid->ginv_at(node);
      const double* sv = s.at(node);
      const double* tv = t.at(node);
      double* ov = out.at(node);
      for (std::size_t fo = 0; fo < n_free; ++fo) {
        // decode output multi-index into digits
        std::size_t rem = fo;
        for (int d = 0; d < out_rank; ++d) {
          digits[d] = static_cast<int>(rem / st_o[d]);
          rem %= st_o[d];
        }
        std::size_t base_s = 0, base_t = 0;
        for (std::size_t d = 0; d < free_s.size(); ++d)
          base_s += static_cast<std::size_t>(digits[d]) * st_s[free_s[d]];
        for (std::size_t d = 0; d < free_t.size(); ++d)
          base_t += static_cast<std::size_t>(digits[free_s.size() + d]) * st_t[free_t[d]];

        double acc[3] = {0.0, 0.0, 0.0};
        // sum over contracted digit assignments; pair p uses cd[2p] on the
        // S side and cd[2p+1] on the T side, weighted g^{ab}
        for (std::size_t ci = 0; ci < n_con; ++ci) {
          std::size_t crem = ci;
          for (int d = 2 * np - 1; d >= 0; --d) {
            cd[d] = static_cast<int>(crem % static_cast<std::size_t>(m));
            crem /= static_cast<std::size_t>(m);
          }
          double w = 1.0;
          std::size_t mi_s = base_s, mi_t = base_t;
          for (int p = 0; p < np; ++p) {
            w *= gi[cd[2 * p] * m + cd[2 * p + 1]];
            mi_s += static_cast<std::size_t>(cd[2 * p]) * st_s[pairs[p].first];
            mi_t += static_cast<std::size_t>(cd[2 * p + 1]) * st_t[pairs[p].second];
          }
          const double* sc = &sv[mi_s * s.fiber];
          const double* tc = &tv[mi_t * t.fiber];
          if (contract_fibers) {
            acc[0] += w * (sc[0] * tc[0] + sc[1] * tc[1] + sc[2] * tc[2]);
          } else if (s.fiber == 1 && t.fiber == 1) {
            acc[0] += w * sc[0] * tc[0];
          } else if (s.fiber == 1) {
            for (int c = 0; c < 3; ++c) acc[c] += w * sc[0] * tc[c];
          } else {
            for (int c = 0; c < 3; ++c) acc[c] += w * sc[c] * tc[0];
          }
        }
        for (int c = 0; c < out_fiber; ++c) ov[fo * out_fiber + c] = acc[c];
      }
    }
  });
  return out;
}

double integrate(const TensorField& scalar_field) {
  if (scalar_field.rank != 0 || scalar_field.fiber != 1)
    throw std::runtime_error("integrate expects a scalar field");
  const auto& grid = *scalar_field.grid;
  const double* v = scalar_field.values.data();
  const double* w = grid.sqrtg.data();
  const double sum = par::reduce_add(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += v[i] * w[i];
    return s;
  });
  return sum * grid.cell_volume;
}

double weighted_dot(const TensorField& u, const TensorField& v) {
  if (u.grid != v.grid || u.rank != v.rank || u.fiber != v.fiber)
    throw std::runtime_error("weighted_dot: shape mismatch");
  const auto& grid = *u.grid;
  const std::size_t nc = u.ncomp();
  const double* uv = u.values.data();
  const double* vv = v.values.data();
  const double* w = grid.sqrtg.data();
  const double sum = par::reduce_add(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t node = b; node < e; ++node) {
      double d = 0.0;
      const double* up = &uv[node * nc];
      const double* vp = &vv[node * nc];
      for (std::size_t c = 0; c < nc; ++c) d += up[c] * vp[c];
      s += d * w[node];
    }
    return s;
  });
  return sum * grid.cell_volume;
}

}  // namespace llb
