#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "mcl2d/core.hpp"

// Pointwise compressible-Euler physics: ideal-gas EOS, fluxes, flux
// Jacobians, wave speeds, admissibility, entropy. Everything here is a pure
// function of its arguments.

namespace mcl2d {

struct NonFiniteInput : Error { using Error::Error; };
struct VacuumWithMomentum : Error { using Error::Error; };
struct NonPositiveDensity : Error { using Error::Error; };
struct NonUnitNormal : Error { using Error::Error; };
struct InadmissibleState : Error { using Error::Error; };
struct NonPositiveThermodynamicState : Error { using Error::Error; };

struct GasModel {
  double gamma = 1.4;  // adiabatic constant, > 1

  double b1() const { return 0.5 * (gamma - 1.0); }
  double b2() const { return 0.5 * (gamma - 3.0); }
};

// p = (gamma-1)(rho E - |rho v|^2 / (2 rho))
inline double pressure(const State& u, const GasModel& g) {
  if (!finite(u)) throw NonFiniteInput("pressure: non-finite state");
  if (u.rho == 0.0) {
    if (u.mom.x != 0.0 || u.mom.y != 0.0)
      throw VacuumWithMomentum("pressure: zero density with nonzero momentum");
    return (g.gamma - 1.0) * u.ener;
  }
  return (g.gamma - 1.0) * (u.ener - 0.5 * norm2(u.mom) / u.rho);
}

inline Vec2 velocity(const State& u) {
  if (u.rho == 0.0) return {};
  return u.mom / u.rho;
}

inline State primitive_to_conserved(double rho, Vec2 v, double p, const GasModel& g) {
  if (!(rho > 0.0)) throw NonPositiveDensity("primitive_to_conserved: rho <= 0");
  if (!(p >= 0.0)) throw NonPositiveThermodynamicState("primitive_to_conserved: p < 0");
  return {rho, rho * v, p / (g.gamma - 1.0) + 0.5 * rho * norm2(v)};
}

struct Primitive {
  double rho;
  Vec2 vel;
  double p;
};

inline Primitive conserved_to_primitive(const State& u, const GasModel& g) {
  if (!(u.rho > 0.0)) throw NonPositiveDensity("conserved_to_primitive: rho <= 0");
  return {u.rho, u.mom / u.rho, pressure(u, g)};
}

// admissible iff rho >= 0 and p >= 0, with optional absolute slack
inline bool admissible(const State& u, const GasModel& g, double slack = 0.0) {
  if (!finite(u)) return false;
  if (u.rho < -slack) return false;
  if (u.rho <= 0.0)
    return u.mom.x == 0.0 && u.mom.y == 0.0 && (g.gamma - 1.0) * u.ener >= -slack;
  // p >= -slack without dividing by a possibly tiny rho
  return (g.gamma - 1.0) * (u.ener * u.rho - 0.5 * norm2(u.mom)) >= -slack * u.rho;
}

inline bool admissible(const StateField& u, const GasModel& g, double slack = 0.0) {
  return std::all_of(u.begin(), u.end(),
                     [&](const State& s) { return admissible(s, g, slack); });
}

// flux columns f1(u), f2(u)
struct Flux {
  State fx, fy;
};

inline Flux flux(const State& u, const GasModel& g) {
  const double p = pressure(u, g);
  if (u.rho == 0.0) return {{0.0, {p, 0.0}, 0.0}, {0.0, {0.0, p}, 0.0}};
  const Vec2 v = u.mom / u.rho;
  Flux f;
  f.fx = {u.mom.x, {u.mom.x * v.x + p, u.mom.y * v.x}, (u.ener + p) * v.x};
  f.fy = {u.mom.y, {u.mom.x * v.y, u.mom.y * v.y + p}, (u.ener + p) * v.y};
  return f;
}

// f(u) . n
inline State dot(const Flux& f, Vec2 n) { return n.x * f.fx + n.y * f.fy; }

struct FluxJacobianPair {
  Mat4 a1, a2;
};

// A_k = d f_k / d u. Satisfies the homogeneity identity A_k(u) u = f_k(u).
inline FluxJacobianPair flux_jacobians(const State& u, const GasModel& g) {
  if (!(u.rho > 0.0)) throw NonPositiveDensity("flux_jacobians: rho <= 0");
  const double gm1 = g.gamma - 1.0;
  const double v1 = u.mom.x / u.rho;
  const double v2 = u.mom.y / u.rho;
  const double q2 = v1 * v1 + v2 * v2;
  const double H = (u.ener + pressure(u, g)) / u.rho;  // total specific enthalpy
  const double b1 = g.b1();
  const double b2 = g.b2();

  FluxJacobianPair J;
  Mat4& a1 = J.a1;
  a1(0, 0) = 0.0;               a1(0, 1) = 1.0;
  a1(0, 2) = 0.0;               a1(0, 3) = 0.0;
  a1(1, 0) = b2 * v1 * v1 + b1 * v2 * v2;
  a1(1, 1) = (3.0 - g.gamma) * v1;
  a1(1, 2) = -gm1 * v2;         a1(1, 3) = gm1;
  a1(2, 0) = -v1 * v2;          a1(2, 1) = v2;
  a1(2, 2) = v1;                a1(2, 3) = 0.0;
  a1(3, 0) = b1 * q2 * v1 - H * v1;
  a1(3, 1) = H - gm1 * v1 * v1;
  a1(3, 2) = -gm1 * v1 * v2;
  a1(3, 3) = g.gamma * v1;

  Mat4& a2 = J.a2;
  a2(0, 0) = 0.0;               a2(0, 1) = 0.0;
  a2(0, 2) = 1.0;               a2(0, 3) = 0.0;
  a2(1, 0) = -v1 * v2;          a2(1, 1) = v2;
  a2(1, 2) = v1;                a2(1, 3) = 0.0;
  a2(2, 0) = b2 * v2 * v2 + b1 * v1 * v1;
  a2(2, 1) = -gm1 * v1;
  a2(2, 2) = (3.0 - g.gamma) * v2;
  a2(2, 3) = gm1;
  a2(3, 0) = b1 * q2 * v2 - H * v2;
  a2(3, 1) = -gm1 * v1 * v2;
  a2(3, 2) = H - gm1 * v2 * v2;
  a2(3, 3) = g.gamma * v2;
  return J;
}

inline void check_unit_normal(Vec2 n) {
  if (std::abs(norm(n) - 1.0) > 1e-12)
    throw NonUnitNormal("normal is not unit length");
}

// n . A(u) for a unit direction n
inline Mat4 directional_jacobian(const State& u, Vec2 n, const GasModel& g) {
  check_unit_normal(n);
  const FluxJacobianPair J = flux_jacobians(u, g);
  Mat4 m;
  for (int k = 0; k < 16; ++k) m.a[k] = n.x * J.a1.a[k] + n.y * J.a2.a[k];
  return m;
}

inline double sound_speed(const State& u, const GasModel& g) {
  if (!(u.rho > 0.0)) throw InadmissibleState("sound_speed: rho <= 0");
  const double p = pressure(u, g);
  if (!(p >= 0.0)) throw InadmissibleState("sound_speed: p < 0");
  return std::sqrt(g.gamma * p / u.rho);
}

// eigenvalues of n.A(u): {v.n - c, v.n, v.n, v.n + c}
inline std::array<double, 4> eigen_speeds(const State& u, Vec2 n, const GasModel& g) {
  check_unit_normal(n);
  const double vn = dot(velocity(u), n);
  const double c = sound_speed(u, g);
  return {vn - c, vn, vn, vn + c};
}

// spectral radius |v.n| + c
inline double max_wave_speed(const State& u, Vec2 n, const GasModel& g) {
  check_unit_normal(n);
  return std::abs(dot(velocity(u), n)) + sound_speed(u, g);
}

inline double rusanov_speed(const State& ui, const State& uj, Vec2 n, const GasModel& g) {
  return std::max(max_wave_speed(ui, n, g), max_wave_speed(uj, n, g));
}

// Iteration-robust wave speed: intermediate quasi-Newton iterates may leave
// the invariant domain, so negative pressure is clipped to zero here instead
// of rejecting the state. Density must still be positive.
inline double guarded_wave_speed(const State& u, Vec2 n, const GasModel& g) {
  if (!(u.rho > 0.0)) throw InadmissibleState("guarded_wave_speed: rho <= 0");
  const double p = std::max(0.0, pressure(u, g));
  return std::abs(dot(u.mom / u.rho, n)) + std::sqrt(g.gamma * p / u.rho);
}

inline double guarded_rusanov_speed(const State& ui, const State& uj, Vec2 n,
                                    const GasModel& g) {
  return std::max(guarded_wave_speed(ui, n, g), guarded_wave_speed(uj, n, g));
}

// physical entropy s = log(p rho^-gamma); mathematical entropy eta = -rho s/(gamma-1)
inline double entropy(const State& u, const GasModel& g) {
  if (!(u.rho > 0.0))
    throw NonPositiveThermodynamicState("entropy: rho <= 0");
  const double p = pressure(u, g);
  if (!(p > 0.0)) throw NonPositiveThermodynamicState("entropy: p <= 0");
  const double s = std::log(p) - g.gamma * std::log(u.rho);
  return -u.rho * s / (g.gamma - 1.0);
}

// v(u) = eta'(u); satisfies v(u).u - eta(u) = rho
inline State entropy_variables(const State& u, const GasModel& g) {
  if (!(u.rho > 0.0))
    throw NonPositiveThermodynamicState("entropy_variables: rho <= 0");
  const double p = pressure(u, g);
  if (!(p > 0.0))
    throw NonPositiveThermodynamicState("entropy_variables: p <= 0");
  const double s = std::log(p) - g.gamma * std::log(u.rho);
  const Vec2 v = u.mom / u.rho;
  State w;
  w.rho = (g.gamma - s) / (g.gamma - 1.0) - u.rho * norm2(v) / (2.0 * p);
  w.mom = (u.rho / p) * v;
  w.ener = -u.rho / p;
  return w;
}

inline double mach_number(const State& u, const GasModel& g) {
  return norm(velocity(u)) / sound_speed(u, g);
}

}  // namespace mcl2d
