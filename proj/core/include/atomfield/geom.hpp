#pragma once

#include <array>
#include <cmath>

// Plain value types for 3-vectors and 3x3 tensors. Everything in the library
// works in dimensionless reduced units.

namespace atomfield {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 v) { return v *= s; }
inline Vec3 operator*(Vec3 v, double s) { return v *= s; }
inline Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// 3x3 tensor, row-major storage.
struct Mat3 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }

  static Mat3 identity() {
    Mat3 t;
    t.m[0][0] = t.m[1][1] = t.m[2][2] = 1.0;
    return t;
  }
  static Mat3 diag(double a, double b, double c) {
    Mat3 t;
    t.m[0][0] = a; t.m[1][1] = b; t.m[2][2] = c;
    return t;
  }

  Mat3& operator+=(const Mat3& o) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] += o.m[r][c];
    return *this;
  }
  Mat3& operator-=(const Mat3& o) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] -= o.m[r][c];
    return *this;
  }
  Mat3& operator*=(double s) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] *= s;
    return *this;
  }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 t) { return t *= s; }
inline Mat3 operator*(Mat3 t, double s) { return t *= s; }

inline Vec3 operator*(const Mat3& t, const Vec3& v) {
  return {t.m[0][0] * v.x + t.m[0][1] * v.y + t.m[0][2] * v.z,
          t.m[1][0] * v.x + t.m[1][1] * v.y + t.m[1][2] * v.z,
          t.m[2][0] * v.x + t.m[2][1] * v.y + t.m[2][2] * v.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
  return r;
}

inline Mat3 transpose(const Mat3& t) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = t.m[j][i];
  return r;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a[i] * b[j];
  return r;
}

inline double det(const Mat3& t) {
  return t.m[0][0] * (t.m[1][1] * t.m[2][2] - t.m[1][2] * t.m[2][1]) -
         t.m[0][1] * (t.m[1][0] * t.m[2][2] - t.m[1][2] * t.m[2][0]) +
         t.m[0][2] * (t.m[1][0] * t.m[2][1] - t.m[1][1] * t.m[2][0]);
}

inline double frobenius(const Mat3& t) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += t.m[i][j] * t.m[i][j];
  return std::sqrt(s);
}

inline double max_abs(const Mat3& t) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s = std::max(s, std::abs(t.m[i][j]));
  return s;
}

inline Mat3 symmetric_part(const Mat3& t) { return 0.5 * (t + transpose(t)); }

/// Relative antisymmetry ||t - t^T||_F / ||t||_F (0 for the zero tensor).
inline double antisymmetry(const Mat3& t) {
  double n = frobenius(t);
  if (n == 0.0) return 0.0;
  return frobenius(t - transpose(t)) / n;
}

/// Full 9-slot row-major Voigt order: [11,12,13,21,22,23,31,32,33].
using Voigt9 = std::array<double, 9>;

/// Reduced 6-slot order used for reporting: [11,22,33,12,13,23].
using Voigt6 = std::array<double, 6>;

inline Voigt9 flatten(const Mat3& t) {
  return {t.m[0][0], t.m[0][1], t.m[0][2],
          t.m[1][0], t.m[1][1], t.m[1][2],
          t.m[2][0], t.m[2][1], t.m[2][2]};
}

inline Mat3 unflatten(const Voigt9& v) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.m[i][j] = v[3 * i + j];
  return t;
}

/// Reporting order [11,22,33,12,13,23]; off-diagonals are symmetrized.
inline Voigt6 to_voigt6(const Mat3& t) {
  return {t.m[0][0], t.m[1][1], t.m[2][2],
          0.5 * (t.m[0][1] + t.m[1][0]),
          0.5 * (t.m[0][2] + t.m[2][0]),
          0.5 * (t.m[1][2] + t.m[2][1])};
}

inline Mat3 from_voigt6(const Voigt6& v) {
  Mat3 t;
  t.m[0][0] = v[0]; t.m[1][1] = v[1]; t.m[2][2] = v[2];
  t.m[0][1] = t.m[1][0] = v[3];
  t.m[0][2] = t.m[2][0] = v[4];
  t.m[1][2] = t.m[2][1] = v[5];
  return t;
}

}  // namespace atomfield
