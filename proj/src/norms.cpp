#include "llb/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "llb/parallel.hpp"

namespace llb {

double lp_norm(const TensorField& t, double p) {
  if (std::isnan(p) || p < 1.0) throw std::runtime_error("lp_norm requires p >= 1");
  const TensorField nrm = fiber_norm(t);
  const auto& grid = *t.grid;
  const double sup = par::reduce_max(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double v = 0.0;
    for (std::size_t i = b; i < e; ++i) v = std::max(v, nrm.values[i]);
    return v;
  });
  if (std::isinf(p) || sup == 0.0) return sup;
  // Factor out the sup: |v|/sup <= 1, so large exponents neither overflow
  // nor flush the whole sum to zero.
  const double* v = nrm.values.data();
  const double* w = grid.sqrtg.data();
  const double sum = par::reduce_add(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += std::pow(v[i] / sup, p) * w[i];
    return s;
  });
  return sup * std::pow(sum * grid.cell_volume, 1.0 / p);
}

double sobolev_norm(const Section& v, int k, double p, const BundleConnection& conn) {
  if (k < 0) throw std::runtime_error("sobolev_norm requires k >= 0");
  double acc = 0.0;
  TensorField cur = v;
  for (int i = 0; i <= k; ++i) {
    const double ni = lp_norm(cur, p);
    if (std::isinf(p))
      acc = std::max(acc, ni);
    else
      acc += std::pow(ni, p);
    if (i < k) cur = covariant_derivative(cur, conn);
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

double gn_ratio(const Section& t, int j, int k, double p, double r, double q,
                const BundleConnection& conn) {
  if (j < 1 || k < j) throw std::runtime_error("gn_ratio requires 1 <= j <= k");
  if (r < 2.0 || q < 2.0) throw std::runtime_error("gn_ratio requires r, q >= 2");
  const double balance = k / p - (j / r + (k - j) / q);
  if (!(std::fabs(balance) <= 1e-12))
    throw std::runtime_error("gn_ratio exponent balance violated: k/p = j/r + (k-j)/q");
  const TensorField dj = iterated_derivative(t, j, conn);
  const TensorField dk = iterated_derivative(t, k, conn);
  const double num = lp_norm(dj, p);
  const double nk = lp_norm(dk, r);
  const double nt = lp_norm(t, q);
  const double theta = static_cast<double>(j) / k;
  const double den = std::pow(nk, theta) * std::pow(nt, 1.0 - theta);
  if (!(den > 0.0)) throw std::runtime_error("gn_ratio undefined on the zero field");
  return num / den;
}

bool gn_exponent_check(int s, int l, int j, int k) {
  if (j < 1) return false;
  if (k < j) return false;
  const int lo = std::max(1, j);
  const int hi = std::min(s, s + j + 1 - k);
  return l >= lo && l <= hi;
}

}  // namespace llb
