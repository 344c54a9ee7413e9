#pragma once

#include <random>
#include <vector>

#include "mcl2d/io.hpp"

// Randomized property suites behind the `check` subcommand. Self-contained
// (library-only) variants of the invariants the test suite also verifies.

namespace mcl2d {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline State random_admissible(std::mt19937_64& rng, const GasModel& g) {
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  return primitive_to_conserved(uni(0.1, 10.0), {uni(-3.0, 3.0), uni(-3.0, 3.0)},
                                uni(0.01, 10.0), g);
}

inline double det4(const Mat4& m) {
  // LU with partial pivoting
  std::array<double, 16> a = m.a;
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[4 * r + c]) > std::abs(a[4 * piv + c])) piv = r;
    if (a[4 * piv + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < 4; ++k) std::swap(a[4 * piv + k], a[4 * c + k]);
      det = -det;
    }
    det *= a[4 * c + c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[4 * r + c] / a[4 * c + c];
      for (int k = c; k < 4; ++k) a[4 * r + k] -= f * a[4 * c + k];
    }
  }
  return det;
}

}  // namespace detail

inline std::vector<CheckResult> run_property_checks(unsigned long long seed = 12345) {
  std::vector<CheckResult> out;
  const GasModel gas{};
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };

  // 1. homogeneity A_k(u) u = f_k(u) and the eigenvalue formula
  {
    bool ok = true;
    for (int k = 0; k < 10000 && ok; ++k) {
      const State u = detail::random_admissible(rng, gas);
      const Flux f = flux(u, gas);
      const FluxJacobianPair J = flux_jacobians(u, gas);
      const double fscale = std::max(1.0, std::max(max_abs(f.fx), max_abs(f.fy)));
      ok = max_abs(J.a1 * u - f.fx) + max_abs(J.a2 * u - f.fy) <= 1e-12 * fscale;
      if (ok && k % 10 == 0) {
        const double t = uni(0.0, 6.283185307179586);
        const Vec2 n{std::cos(t), std::sin(t)};
        Mat4 na = directional_jacobian(u, n, gas);
        double mscale = 1.0;
        for (double e : na.a) mscale = std::max(mscale, std::abs(e));
        for (const double lam : eigen_speeds(u, n, gas)) {
          Mat4 shifted = na;
          for (int d = 0; d < 4; ++d) shifted(d, d) -= lam;
          ok = ok && std::abs(detail::det4(shifted)) <=
                         1e-7 * mscale * mscale * mscale * mscale;
        }
      }
    }
    out.push_back({"homogeneity + eigenvalues", ok, "10^4 random admissible states"});
  }

  // 2. bar-state invariant domain preservation
  {
    bool ok = true;
    for (int k = 0; k < 100000 && ok; ++k) {
      const State ui = detail::random_admissible(rng, gas);
      const State uj = detail::random_admissible(rng, gas);
      const double t = uni(0.0, 6.283185307179586);
      const Vec2 c = uni(0.05, 2.0) * Vec2{std::cos(t), std::sin(t)};
      const double lam = rusanov_speed(ui, uj, c / norm(c), gas);
      const double d = lam * norm(c);
      const State bar =
          0.5 * (ui + uj) - (dot(flux(uj, gas), c) - dot(flux(ui, gas), c)) / (2.0 * d);
      const double pscale = std::max(pressure(ui, gas), pressure(uj, gas));
      ok = bar.rho >= 0.0 &&
           (gas.gamma - 1.0) * (bar.ener * bar.rho - 0.5 * norm2(bar.mom)) >=
               -1e-12 * pscale * std::max(1.0, bar.rho);
    }
    out.push_back({"bar-state IDP", ok, "10^5 random pairs, Rusanov viscosity"});
  }

  // 3 + 4. limiter bounds and pressure fix on synthetic pairs
  {
    bool dmp_ok = true, fix_ok = true;
    for (int k = 0; k < 10000 && dmp_ok && fix_ok; ++k) {
      DiscreteOperators ops;
      ops.n = 2;
      ops.lumped = {1.0, 1.0};
      ops.row_ptr = {0, 2, 4};
      ops.col_idx = {0, 1, 0, 1};
      const double t = uni(0.0, 6.283185307179586);
      const Vec2 c = uni(0.05, 1.5) * Vec2{std::cos(t), std::sin(t)};
      ops.mass = {0.05, 0.05, 0.05, 0.05};
      ops.c = {-1.0 * c, c, -1.0 * c, c};
      ops.boundary.assign(2, {});
      ops.pairs = {{0, 1, 0.05, c, -1.0 * c}};

      StateField u = {detail::random_admissible(rng, gas),
                      detail::random_admissible(rng, gas)};
      const EdgeCoefficients edge = compute_edge_coefficients(u, ops, gas);
      const NodalBounds b = compute_limiter_bounds(u, ops, edge);
      State f;
      const double fscale = std::max(1.0, 2.0 * edge.d[0] * max_abs(u[0] - u[1]));
      for (int q = 0; q < 4; ++q) f[q] = fscale * uni(-2.0, 2.0);
      const LimitedFluxes lim = limit_antidiffusion(ops, edge, {{f}}, b);

      const double two_d = 2.0 * edge.d[0];
      const State& fs = lim.fstar[0];
      const double rs_ij = edge.bar_ij[0].rho + fs.rho / two_d;
      const double rs_ji = edge.bar_ji[0].rho - fs.rho / two_d;
      const double rtol = 1e-12 * (b.rho_max[0] - b.rho_min[0] + 1.0);
      dmp_ok = rs_ij >= b.rho_min[0] - rtol && rs_ij <= b.rho_max[0] + rtol &&
               rs_ji >= b.rho_min[1] - rtol && rs_ji <= b.rho_max[1] + rtol;
      for (int q = 0; q < 3 && dmp_ok; ++q) {
        const double fq = q == 0 ? fs.mom.x : (q == 1 ? fs.mom.y : fs.ener);
        const double bij = detail::bar_component(edge.bar_ij[0], q);
        const double bji = detail::bar_component(edge.bar_ji[0], q);
        const double tol = 1e-12 * (std::abs(bij) + std::abs(bji) + std::abs(fq) + 1.0);
        dmp_ok = bij + fq / two_d >= rs_ij * b.phi_min[q][0] - tol &&
                 bij + fq / two_d <= rs_ij * b.phi_max[q][0] + tol &&
                 bji - fq / two_d >= rs_ji * b.phi_min[q][1] - tol &&
                 bji - fq / two_d <= rs_ji * b.phi_max[q][1] + tol;
      }

      const double alpha = lim.alpha[0];
      const State star_ij = edge.bar_ij[0] + (alpha / two_d) * fs;
      const State star_ji = edge.bar_ji[0] - (alpha / two_d) * fs;
      const double pscale = std::max(pressure(u[0], gas), pressure(u[1], gas));
      fix_ok =
          alpha >= 0.0 && alpha <= 1.0 && star_ij.rho >= -1e-12 &&
          star_ji.rho >= -1e-12 &&
          (gas.gamma - 1.0) * (star_ij.ener * star_ij.rho - 0.5 * norm2(star_ij.mom)) >=
              -1e-12 * pscale * std::max(1.0, star_ij.rho) &&
          (gas.gamma - 1.0) * (star_ji.ener * star_ji.rho - 0.5 * norm2(star_ji.mom)) >=
              -1e-12 * pscale * std::max(1.0, star_ji.rho);
    }
    out.push_back({"limiter discrete maximum principles", dmp_ok, "10^4 synthetic pairs"});
    out.push_back({"pressure fix keeps bar states admissible", fix_ok, "10^4 synthetic pairs"});
  }

  // 5. free-stream preservation on a generated channel
  {
    const BenchmarkCase c = builtin("gamm", gas);
    const Mesh mesh = generate_channel(12, 4, c.x0, c.x1, c.walls);
    const DiscreteOperators ops = assemble(mesh);
    BcTable bcs;
    for (const auto& [id, name] : mesh.patch_names)
      bcs[id] = BoundaryCondition::farfield(c.free_stream, gas);
    const StateField u(ops.n, c.free_stream);
    const StateField r = low_order_residual(u, ops, bcs, gas);
    bool ok = true;
    for (const State& ri : r) ok = ok && max_abs(ri) <= 1e-12;
    out.push_back({"free-stream preservation", ok, "constant state, farfield everywhere"});
  }

  // 6. discrete conservation across Newton iterates on a torus
  {
    const Mesh strip = generate_periodic_strip(6, 6, 1.0, 1.0);
    const DiscreteOperators ops = apply_periodic(assemble(strip), strip.periodic);
    StateField u(ops.n);
    for (auto& s : u) s = detail::random_admissible(rng, gas);
    State ref{};
    for (int i = 0; i < ops.n; ++i) ref += ops.lumped[i] * u[i];
    SolverConfig cfg;
    cfg.lin_tol = 1e-13;
    cfg.lin_max_iter = 4000;
    bool ok = true;
    for (int step = 0; step < 5 && ok; ++step) {
      const EdgeCoefficients e = compute_edge_coefficients(u, ops, gas);
      const double dt = compute_dt(e, ops, 100.0);
      const NewtonResult nres =
          newton_step(u, dt, ops, {}, gas, cfg, [&](const StateField& it) {
            State total{};
            for (int i = 0; i < ops.n; ++i) total += ops.lumped[i] * it[i];
            ok = ok && max_abs(total - ref) <= 1e-11 * std::max(1.0, max_abs(ref));
          });
      u = nres.u;
    }
    out.push_back({"conservation across Newton iterates", ok, "periodic 6x6, CFL 100"});
  }

  return out;
}

}  // namespace mcl2d
