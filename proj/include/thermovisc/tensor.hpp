#pragma once

// Small fixed-size 2D tensor algebra used by every pointwise constitutive
// evaluation. Everything is a value type; no heap traffic.

#include <array>
#include <cmath>

namespace thermovisc {

struct Vec2 {
  std::array<double, 2> v{0.0, 0.0};

  constexpr double& operator[](int i) { return v[i]; }
  constexpr double operator[](int i) const { return v[i]; }

  constexpr Vec2& operator+=(const Vec2& o) {
    v[0] += o.v[0];
    v[1] += o.v[1];
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) {
    a.v[0] -= b.v[0];
    a.v[1] -= b.v[1];
    return a;
  }
  friend constexpr Vec2 operator*(double s, Vec2 a) {
    a.v[0] *= s;
    a.v[1] *= s;
    return a;
  }
  friend constexpr double dot(const Vec2& a, const Vec2& b) {
    return a.v[0] * b.v[0] + a.v[1] * b.v[1];
  }
};

/// Row-major 2x2 matrix. Used for deformation gradients F, rates, stresses,
/// right Cauchy-Green tensors and conductivities.
struct Mat2 {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

  static constexpr Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
  static constexpr Mat2 zero() { return Mat2{}; }
  static constexpr Mat2 diag(double d0, double d1) { return Mat2{{d0, 0.0, 0.0, d1}}; }
  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return Mat2{{c, -s, s, c}};
  }

  constexpr double& operator()(int i, int j) { return a[2 * i + j]; }
  constexpr double operator()(int i, int j) const { return a[2 * i + j]; }

  constexpr Mat2& operator+=(const Mat2& o) {
    for (int k = 0; k < 4; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat2& operator-=(const Mat2& o) {
    for (int k = 0; k < 4; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat2& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }
  friend constexpr Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
  friend constexpr Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
  friend constexpr Mat2 operator-(Mat2 x) { return x *= -1.0; }
  friend constexpr Mat2 operator*(double s, Mat2 x) { return x *= s; }
  friend constexpr Mat2 operator*(Mat2 x, double s) { return x *= s; }
  friend constexpr Mat2 operator/(Mat2 x, double s) { return x *= 1.0 / s; }

  friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
    return r;
  }
  friend constexpr Vec2 operator*(const Mat2& x, const Vec2& v) {
    return Vec2{{x(0, 0) * v[0] + x(0, 1) * v[1], x(1, 0) * v[0] + x(1, 1) * v[1]}};
  }
};

constexpr Mat2 transpose(const Mat2& m) { return Mat2{{m.a[0], m.a[2], m.a[1], m.a[3]}}; }
constexpr double det(const Mat2& m) { return m.a[0] * m.a[3] - m.a[1] * m.a[2]; }
constexpr double trace(const Mat2& m) { return m.a[0] + m.a[3]; }
constexpr Mat2 sym(const Mat2& m) { return 0.5 * (m + transpose(m)); }
/// Cofactor matrix, d det(F)/dF.
constexpr Mat2 cofactor(const Mat2& m) { return Mat2{{m.a[3], -m.a[2], -m.a[1], m.a[0]}}; }
inline Mat2 inverse(const Mat2& m) { return transpose(cofactor(m)) / det(m); }
constexpr double ddot(const Mat2& x, const Mat2& y) {
  return x.a[0] * y.a[0] + x.a[1] * y.a[1] + x.a[2] * y.a[2] + x.a[3] * y.a[3];
}
inline double norm(const Mat2& m) { return std::sqrt(ddot(m, m)); }
constexpr Mat2 outer(const Vec2& x, const Vec2& y) {
  return Mat2{{x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]}};
}

/// Fourth-order tensor on 2x2 matrices, T_ijkl, acting as (T A)_ij = T_ijkl A_kl.
struct Tensor4 {
  std::array<double, 16> t{};

  static constexpr int index(int i, int j, int k, int l) { return ((i * 2 + j) * 2 + k) * 2 + l; }
  constexpr double& operator()(int i, int j, int k, int l) { return t[index(i, j, k, l)]; }
  constexpr double operator()(int i, int j, int k, int l) const { return t[index(i, j, k, l)]; }

  /// Identity on all matrices: I_ijkl = d_ik d_jl.
  static constexpr Tensor4 identity() {
    Tensor4 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j, i, j) = 1.0;
    return r;
  }
  /// Projection onto symmetric matrices: A -> sym(A).
  static constexpr Tensor4 identity_sym() {
    Tensor4 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        r(i, j, i, j) += 0.5;
        r(i, j, j, i) += 0.5;
      }
    return r;
  }
  static constexpr Tensor4 outer(const Mat2& x, const Mat2& y) {
    Tensor4 r;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) r.t[p * 4 + q] = x.a[p] * y.a[q];
    return r;
  }

  constexpr Tensor4& operator+=(const Tensor4& o) {
    for (int k = 0; k < 16; ++k) t[k] += o.t[k];
    return *this;
  }
  constexpr Tensor4& operator*=(double s) {
    for (auto& x : t) x *= s;
    return *this;
  }
  friend constexpr Tensor4 operator+(Tensor4 x, const Tensor4& y) { return x += y; }
  friend constexpr Tensor4 operator-(Tensor4 x, const Tensor4& y) {
    for (int k = 0; k < 16; ++k) x.t[k] -= y.t[k];
    return x;
  }
  friend constexpr Tensor4 operator*(double s, Tensor4 x) { return x *= s; }

  friend constexpr Mat2 operator*(const Tensor4& T, const Mat2& A) {
    Mat2 r;
    for (int p = 0; p < 4; ++p) {
      double s = 0.0;
      for (int q = 0; q < 4; ++q) s += T.t[p * 4 + q] * A.a[q];
      r.a[p] = s;
    }
    return r;
  }
};

/// A : T B
constexpr double contract(const Mat2& A, const Tensor4& T, const Mat2& B) { return ddot(A, T * B); }

inline double max_abs(const Tensor4& T) {
  double m = 0.0;
  for (double x : T.t) m = std::fmax(m, std::fabs(x));
  return m;
}
inline double norm(const Tensor4& T) {
  double s = 0.0;
  for (double x : T.t) s += x * x;
  return std::sqrt(s);
}

/// Second deformation gradient in 2D. slice[k](a, b) = d_k d_b y_a, i.e. the
/// spatial derivative of F in direction k. Rotations act on the first index
/// by left-multiplying every slice.
struct Gradient3 {
  std::array<Mat2, 2> slice{};

  friend Gradient3 operator*(const Mat2& Q, const Gradient3& G) {
    return Gradient3{{Q * G.slice[0], Q * G.slice[1]}};
  }
  friend Gradient3 operator*(double s, const Gradient3& G) {
    return Gradient3{{s * G.slice[0], s * G.slice[1]}};
  }
  friend Gradient3 operator+(const Gradient3& x, const Gradient3& y) {
    return Gradient3{{x.slice[0] + y.slice[0], x.slice[1] + y.slice[1]}};
  }
};

inline double ddot(const Gradient3& x, const Gradient3& y) {
  return ddot(x.slice[0], y.slice[0]) + ddot(x.slice[1], y.slice[1]);
}
inline double norm(const Gradient3& G) { return std::sqrt(ddot(G, G)); }

/// Frobenius distance from F to SO(2). In 2D the nearest rotation has a
/// closed form: F = [[a, b], [c, d]] is closest to the rotation by atan2(c - b, a + d).
inline double dist_to_SO2(const Mat2& F) {
  const double angle = std::atan2(F(1, 0) - F(0, 1), F(0, 0) + F(1, 1));
  return norm(F - Mat2::rotation(angle));
}

}  // namespace thermovisc
