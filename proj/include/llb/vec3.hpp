#pragma once

#include <cmath>
#include <cstddef>

namespace llb {

// Fiber values live in R^3 with the Euclidean metric.  Arithmetic here is
// deliberately branch-free and inline: it sits inside every node loop.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

// (a x b)^1 = a^2 b^3 - b^2 a^3, cyclic.
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - b.y * a.z,
          b.x * a.z - a.x * b.z,
          a.x * b.y - b.x * a.y};
}

inline Vec3 load3(const double* p) { return {p[0], p[1], p[2]}; }
inline void store3(double* p, const Vec3& v) { p[0] = v.x; p[1] = v.y; p[2] = v.z; }

// Dense 3x3 matrix, row-major.  Used for connection coefficients A_i, bundle
// curvature F_ij, and frame rotations.
struct Mat3 {
  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  static Mat3 zero() { return {}; }
  static Mat3 identity() {
    Mat3 m;
    m.a[0][0] = m.a[1][1] = m.a[2][2] = 1.0;
    return m;
  }

  Vec3 apply(const Vec3& v) const {
    return {a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
            a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
            a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z};
  }

  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[i][j] += o.a[i][j];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[i][j] -= o.a[i][j];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[i][j] *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.a[i][k] * b.a[k][j];
      c.a[i][j] = s;
    }
  return c;
}

inline Mat3 commutator(const Mat3& a, const Mat3& b) { return matmul(a, b) - matmul(b, a); }

inline Mat3 transpose(const Mat3& m) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.a[i][j] = m.a[j][i];
  return t;
}

// R A R^T; used for frame changes of connection/curvature coefficients.
inline Mat3 conjugate(const Mat3& r, const Mat3& m) { return matmul(r, matmul(m, transpose(r))); }

inline double max_abs_entry(const Mat3& m) {
  double v = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v = std::max(v, std::fabs(m.a[i][j]));
  return v;
}

inline bool is_skew(const Mat3& m, double tol) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::fabs(m.a[i][j] + m.a[j][i]) > tol) return false;
  return true;
}

// so(3) basis: J_k v = e_k x v, so J_3 e_1 = e_2 etc.
inline Mat3 so3_generator(int k) {
  Mat3 j;
  if (k == 1) {
    j.a[1][2] = -1.0; j.a[2][1] = 1.0;
  } else if (k == 2) {
    j.a[0][2] = 1.0; j.a[2][0] = -1.0;
  } else {
    j.a[0][1] = -1.0; j.a[1][0] = 1.0;
  }
  return j;
}

// Rodrigues rotation about a unit axis; only used by tests and the
// equivariance helpers, precision matters more than speed.
inline Mat3 rotation(const Vec3& axis_unit, double angle) {
  const Vec3 u = axis_unit;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r.a[0][0] = c + u.x * u.x * t;
  r.a[0][1] = u.x * u.y * t - u.z * s;
  r.a[0][2] = u.x * u.z * t + u.y * s;
  r.a[1][0] = u.y * u.x * t + u.z * s;
  r.a[1][1] = c + u.y * u.y * t;
  r.a[1][2] = u.y * u.z * t - u.x * s;
  r.a[2][0] = u.z * u.x * t - u.y * s;
  r.a[2][1] = u.z * u.y * t + u.x * s;
  r.a[2][2] = c + u.z * u.z * t;
  return r;
}

}  // namespace llb
