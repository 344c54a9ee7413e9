#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcl2d {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// 2-vectors (spatial coordinates, edge vectors, normals)

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return s * a; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
// clockwise quarter turn: for a ccw-oriented edge this points outward
inline Vec2 perp(Vec2 a) { return {a.y, -a.x}; }

// ---------------------------------------------------------------------------
// Conserved nodal state u = (rho, rho*v, rho*E). Also used as a plain
// 4-vector wherever block algebra needs one (residuals, entropy variables).

struct State {
  double rho = 0.0;
  Vec2 mom{};
  double ener = 0.0;

  double operator[](int k) const {
    switch (k) {
      case 0: return rho;
      case 1: return mom.x;
      case 2: return mom.y;
      default: return ener;
    }
  }
  double& operator[](int k) {
    switch (k) {
      case 0: return rho;
      case 1: return mom.x;
      case 2: return mom.y;
      default: return ener;
    }
  }

  State& operator+=(const State& o) {
    rho += o.rho; mom += o.mom; ener += o.ener;
    return *this;
  }
  State& operator-=(const State& o) {
    rho -= o.rho; mom -= o.mom; ener -= o.ener;
    return *this;
  }
  State& operator*=(double s) {
    rho *= s; mom *= s; ener *= s;
    return *this;
  }
};

inline State operator+(State a, const State& b) { return a += b; }
inline State operator-(State a, const State& b) { return a -= b; }
inline State operator-(const State& a) { return {-a.rho, -a.mom, -a.ener}; }
inline State operator*(double s, State a) { return a *= s; }
inline State operator*(State a, double s) { return a *= s; }
inline State operator/(State a, double s) { return a *= 1.0 / s; }

inline double dot(const State& a, const State& b) {
  return a.rho * b.rho + a.mom.x * b.mom.x + a.mom.y * b.mom.y + a.ener * b.ener;
}

inline double max_abs(const State& a) {
  return std::max(std::max(std::abs(a.rho), std::abs(a.ener)),
                  std::max(std::abs(a.mom.x), std::abs(a.mom.y)));
}

inline bool finite(const State& a) {
  return std::isfinite(a.rho) && std::isfinite(a.mom.x) &&
         std::isfinite(a.mom.y) && std::isfinite(a.ener);
}

using StateField = std::vector<State>;

inline double max_abs(const StateField& u) {
  double m = 0.0;
  for (const State& s : u) m = std::max(m, max_abs(s));
  return m;
}

// ---------------------------------------------------------------------------
// Dense 4x4 blocks (flux Jacobians, boundary blocks, Jacobian entries)

struct Mat4 {
  std::array<double, 16> a{};

  double operator()(int r, int c) const { return a[4 * r + c]; }
  double& operator()(int r, int c) { return a[4 * r + c]; }

  static Mat4 identity() {
    Mat4 m;
    for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat4 scaled_identity(double s) {
    Mat4 m;
    for (int i = 0; i < 4; ++i) m(i, i) = s;
    return m;
  }

  Mat4& operator+=(const Mat4& o) {
    for (int k = 0; k < 16; ++k) a[k] += o.a[k];
    return *this;
  }
  Mat4& operator-=(const Mat4& o) {
    for (int k = 0; k < 16; ++k) a[k] -= o.a[k];
    return *this;
  }
  Mat4& operator*=(double s) {
    for (double& v : a) v *= s;
    return *this;
  }
};

inline Mat4 operator+(Mat4 a, const Mat4& b) { return a += b; }
inline Mat4 operator-(Mat4 a, const Mat4& b) { return a -= b; }
inline Mat4 operator*(double s, Mat4 a) { return a *= s; }

inline State operator*(const Mat4& m, const State& u) {
  State r;
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += m(i, j) * u[j];
    r[i] = s;
  }
  return r;
}

inline Mat4 operator*(const Mat4& a, const Mat4& b) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < 4; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

// Gaussian elimination with partial pivoting; returns false on a singular
// pivot instead of throwing so preconditioners can fall back.
inline bool invert(const Mat4& m, Mat4& inv) {
  std::array<double, 32> w{};  // [m | I]
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) w[8 * i + j] = m(i, j);
    w[8 * i + 4 + i] = 1.0;
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    double pmax = std::abs(w[8 * col + col]);
    for (int r = col + 1; r < 4; ++r) {
      const double v = std::abs(w[8 * r + col]);
      if (v > pmax) { pmax = v; piv = r; }
    }
    if (!(pmax > 0.0) || !std::isfinite(pmax)) return false;
    if (piv != col)
      for (int j = 0; j < 8; ++j) std::swap(w[8 * piv + j], w[8 * col + j]);
    const double d = w[8 * col + col];
    for (int j = 0; j < 8; ++j) w[8 * col + j] /= d;
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = w[8 * r + col];
      if (f == 0.0) continue;
      for (int j = 0; j < 8; ++j) w[8 * r + j] -= f * w[8 * col + j];
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inv(i, j) = w[8 * i + 4 + j];
  return true;
}

// ---------------------------------------------------------------------------
// Field helpers for the block vectors handled by the linear solver

inline double dot(const StateField& a, const StateField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

inline double norm(const StateField& a) { return std::sqrt(dot(a, a)); }

// y += s*x
inline void axpy(double s, const StateField& x, StateField& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace mcl2d
