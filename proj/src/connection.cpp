#include "llb/connection.hpp"

#include <cmath>
#include <stdexcept>

#include "llb/parallel.hpp"

namespace llb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ConnectionSpec::validate(int dim) const {
  auto check_len = [&](std::size_t n, const char* what) {
    if (n != 0 && static_cast<int>(n) != dim)
      throw std::runtime_error(std::string(what) + " must have one entry per axis");
  };
  check_len(axes.size(), "connection.axes");
  check_len(theta.size(), "connection.theta");
  check_len(kappa.size(), "connection.kappa");
  for (int ax : axes)
    if (ax < 1 || ax > 3) throw std::runtime_error("connection.axes entries must be 1..3");
  if (generator && !is_skew(*generator, 1e-14))
    throw std::runtime_error("connection generator must be skew-symmetric");
}

int BundleConnection::pair_index(int i, int j, int m) {
  (void)m;
  // (0,1) -> 0, (0,2) -> 1, (1,2) -> 2; m == 2 only uses (0,1).
  return i == 0 ? j - 1 : 2;
}

Mat3 BundleConnection::a_at(std::size_t node, int axis) const {
  Mat3 out;
  const double* p = &a[(node * grid->m + axis) * 9];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.a[i][j] = p[i * 3 + j];
  return out;
}

Mat3 BundleConnection::f_at(std::size_t node, int i, int j) const {
  Mat3 out;
  if (i == j) return out;
  const bool flip = i > j;
  if (flip) std::swap(i, j);
  const double* p = &f[(node * npairs() + pair_index(i, j, grid->m)) * 9];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.a[r][c] = flip ? -p[r * 3 + c] : p[r * 3 + c];
  return out;
}

BundleConnection build_connection(const ConnectionSpec& spec, const GridPtr& grid) {
  const int m = grid->m;
  spec.validate(m);

  BundleConnection conn;
  conn.grid = grid;
  conn.trivial = spec.family == ConnectionSpec::Family::trivial;
  const std::size_t nn = grid->n_nodes;
  conn.a.assign(nn * m * 9, 0.0);
  conn.f.assign(nn * conn.npairs() * 9, 0.0);
  if (conn.trivial) return conn;

  std::vector<Mat3> gen(m);
  for (int ax = 0; ax < m; ++ax) {
    const int idx = spec.axes.empty() ? 3 : spec.axes[ax];
    gen[ax] = spec.generator ? *spec.generator : so3_generator(idx);
  }
  std::vector<double> theta = spec.theta;
  if (theta.empty()) theta.assign(m, 0.0);
  std::vector<int> kap = spec.kappa;
  if (kap.empty()) kap.assign(m, 0);
  const bool curved = spec.family == ConnectionSpec::Family::curved;

  par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(m);
    for (std::size_t node = b; node < e; ++node) {
      double profile = 1.0;
      if (curved) {
        grid->node_coords(node, x.data());
        double phase = 0.0;
        for (int aax = 0; aax < m; ++aax) phase += kap[aax] * x[aax] / grid->lengths[aax];
        profile = std::sin(kTwoPi * phase);
      }
      for (int ax = 0; ax < m; ++ax) {
        double* p = &conn.a[(node * m + ax) * 9];
        const double amp = theta[ax] * profile;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) p[r * 3 + c] = amp * gen[ax].a[r][c];
      }
    }
  });

  // F_ij from central differences of the stored coefficients plus the
  // commutator; constant coefficients give exactly [A_i, A_j].
  par::parallel_for(nn, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
          const std::size_t ip = grid->neighbor(i, node, +1), im = grid->neighbor(i, node, -1);
          const std::size_t jp = grid->neighbor(j, node, +1), jm = grid->neighbor(j, node, -1);
          const double i2hi = 1.0 / (2.0 * grid->h[i]), i2hj = 1.0 / (2.0 * grid->h[j]);
          const double* aj_p = &conn.a[(ip * m + j) * 9];
          const double* aj_m = &conn.a[(im * m + j) * 9];
          const double* ai_p = &conn.a[(jp * m + i) * 9];
          const double* ai_m = &conn.a[(jm * m + i) * 9];
          const Mat3 ai = conn.a_at(node, i), aj = conn.a_at(node, j);
          const Mat3 br = commutator(ai, aj);
          double* out =
              &conn.f[(node * conn.npairs() + BundleConnection::pair_index(i, j, m)) * 9];
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
              out[r * 3 + c] = (aj_p[r * 3 + c] - aj_m[r * 3 + c]) * i2hi -
                               (ai_p[r * 3 + c] - ai_m[r * 3 + c]) * i2hj + br.a[r][c];
        }
    }
  });
  return conn;
}

BundleConnection conjugated(const BundleConnection& conn, const Mat3& r) {
  BundleConnection out = conn;
  const std::size_t na = conn.a.size() / 9, nf = conn.f.size() / 9;
  auto conj_block = [&](const std::vector<double>& src, std::vector<double>& dst, std::size_t k) {
    Mat3 mtx;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mtx.a[i][j] = src[k * 9 + i * 3 + j];
    const Mat3 c = conjugate(r, mtx);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dst[k * 9 + i * 3 + j] = c.a[i][j];
  };
  for (std::size_t k = 0; k < na; ++k) conj_block(conn.a, out.a, k);
  for (std::size_t k = 0; k < nf; ++k) conj_block(conn.f, out.f, k);
  return out;
}

}  // namespace llb
