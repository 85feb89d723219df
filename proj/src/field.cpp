#include "llb/field.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "llb/parallel.hpp"

namespace llb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}
}  // namespace

TensorField::TensorField(GridPtr g, int rank_, int fiber_)
    : grid(std::move(g)), rank(rank_), fiber(fiber_) {
  if (rank < 0) throw std::runtime_error("tensor rank must be >= 0");
  if (fiber != 1 && fiber != 3) throw std::runtime_error("fiber dimension must be 1 or 3");
  values.assign(grid->n_nodes * ncomp(), 0.0);
}

std::size_t TensorField::nmulti() const { return ipow(static_cast<std::size_t>(grid->m), rank); }

bool TensorField::finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

double TensorField::max_abs() const {
  const std::size_t n = values.size();
  return par::reduce_max(n, [&](std::size_t b, std::size_t e) {
    double v = 0.0;
    for (std::size_t i = b; i < e; ++i) v = std::max(v, std::fabs(values[i]));
    return v;
  });
}

namespace {
void check_same_shape(const TensorField& x, const TensorField& y) {
  if (x.grid != y.grid || x.rank != y.rank || x.fiber != y.fiber)
    throw std::runtime_error("tensor field shape mismatch");
}
}  // namespace

TensorField axpy(const TensorField& x, double a, const TensorField& y) {
  check_same_shape(x, y);
  TensorField out = x;
  axpy_inplace(out, a, y);
  return out;
}

void axpy_inplace(TensorField& x, double a, const TensorField& y) {
  check_same_shape(x, y);
  double* xv = x.values.data();
  const double* yv = y.values.data();
  const std::size_t n = x.values.size();
  par::parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) xv[i] += a * yv[i];
  });
}

TensorField scaled(const TensorField& x, double a) {
  TensorField out = x;
  for (double& v : out.values) v *= a;
  return out;
}

Section make_zero_section(const GridPtr& grid) { return Section(grid, 0, 3); }

Section make_constant_section(const GridPtr& grid, const Vec3& value) {
  Section s(grid, 0, 3);
  for (std::size_t node = 0; node < grid->n_nodes; ++node) s.set_vec(node, 0, value);
  return s;
}

Section make_fourier_mode(const GridPtr& grid, const std::vector<int>& kappa, int fiber_axis,
                          double amplitude) {
  if (static_cast<int>(kappa.size()) != grid->m)
    throw std::runtime_error("fourier mode needs one frequency per axis");
  if (fiber_axis < 1 || fiber_axis > 3) throw std::runtime_error("fiber axis must be 1..3");
  Section s(grid, 0, 3);
  const int m = grid->m;
  par::parallel_for(grid->n_nodes, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(m);
    for (std::size_t node = b; node < e; ++node) {
      grid->node_coords(node, x.data());
      double phase = 0.0;
      for (int a = 0; a < m; ++a) phase += kappa[a] * x[a] / grid->lengths[a];
      s.values[node * 3 + (fiber_axis - 1)] = amplitude * std::sin(kTwoPi * phase);
    }
  });
  return s;
}

namespace {

// Band-limited Gaussian synthesis.  Modes iterate in a fixed lexicographic
// order over the half-space (kappa = 0 gets only a cosine), so the
// coefficient stream for a given seed is identical on every grid; worker
// count never touches the RNG.
struct ModeSet {
  std::vector<std::vector<int>> modes;  // includes kappa = 0 first
  explicit ModeSet(int m, int max_mode) {
    std::vector<int> k(m, 0);
    const int lo = -max_mode, hi = max_mode;
    for (;;) {
      // keep kappa = 0 and modes whose first nonzero entry is positive
      int first_nonzero = 0;
      for (int a = 0; a < m; ++a)
        if (k[a] != 0) {
          first_nonzero = k[a];
          break;
        }
      if (first_nonzero >= 0) modes.push_back(k);
      int a = m - 1;
      for (; a >= 0; --a) {
        if (++k[a] <= hi) break;
        k[a] = lo;
      }
      if (a < 0) break;
    }
  }
};

void synth_channel(const ManifoldGrid& grid, const ModeSet& ms,
                   const std::vector<double>& coeff_a, const std::vector<double>& coeff_b,
                   std::vector<double>& out, std::size_t stride, std::size_t offset) {
  const int m = grid.m;
  par::parallel_for(grid.n_nodes, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(m);
    for (std::size_t node = b; node < e; ++node) {
      grid.node_coords(node, x.data());
      double v = 0.0;
      for (std::size_t q = 0; q < ms.modes.size(); ++q) {
        double phase = 0.0;
        for (int a = 0; a < m; ++a) phase += ms.modes[q][a] * x[a] / grid.lengths[a];
        phase *= kTwoPi;
        v += coeff_a[q] * std::cos(phase) + coeff_b[q] * std::sin(phase);
      }
      out[node * stride + offset] = v;
    }
  });
}

}  // namespace

Section make_random_bandlimited(const GridPtr& grid, int max_mode, std::uint64_t seed,
                                double amplitude) {
  if (max_mode < 0) throw std::runtime_error("max_mode must be >= 0");
  Section s(grid, 0, 3);
  const ModeSet ms(grid->m, max_mode);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> ca(ms.modes.size()), cb(ms.modes.size());
    for (std::size_t q = 0; q < ms.modes.size(); ++q) {
      ca[q] = gauss(rng);
      cb[q] = gauss(rng);
    }
    synth_channel(*grid, ms, ca, cb, s.values, 3, static_cast<std::size_t>(c));
  }
  const double sup = par::reduce_max(grid->n_nodes, [&](std::size_t b, std::size_t e) {
    double v = 0.0;
    for (std::size_t node = b; node < e; ++node) v = std::max(v, norm(s.vec(node)));
    return v;
  });
  if (!(sup > 0.0)) throw std::runtime_error("band-limited sample degenerated to zero");
  const double scale = amplitude / sup;
  for (double& v : s.values) v *= scale;
  return s;
}

TensorField make_random_tensor(const GridPtr& grid, int rank, int max_mode, std::uint64_t seed) {
  TensorField t(grid, rank, 3);
  const ModeSet ms(grid->m, max_mode);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t nm = t.nmulti();
  for (std::size_t mi = 0; mi < nm; ++mi)
    for (int c = 0; c < 3; ++c) {
      std::vector<double> ca(ms.modes.size()), cb(ms.modes.size());
      for (std::size_t q = 0; q < ms.modes.size(); ++q) {
        ca[q] = gauss(rng);
        cb[q] = gauss(rng);
      }
      synth_channel(*grid, ms, ca, cb, t.values, t.ncomp(), mi * 3 + c);
    }
  return t;
}

}  // namespace llb
