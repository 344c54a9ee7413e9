#pragma once

#include <map>
#include <vector>

#include "mcl2d/assembly.hpp"
#include "mcl2d/core.hpp"
#include "mcl2d/euler.hpp"

// Invariant-domain-preserving low-order semi-discretization: Rusanov graph
// viscosity, bar states, and weakly imposed boundary conditions via the
// local Lax-Friedrichs flux with an algebraic splitting b~ = B(u) u + b(u^).

namespace mcl2d {

struct ZeroViscosityEdge : Error { using Error::Error; };
struct InadmissibleExternalState : Error { using Error::Error; };
struct MissingBoundaryCondition : Error { using Error::Error; };

enum class BcKind { farfield, supersonic_outlet, reflecting_wall, subsonic_outlet_pressure };

struct BoundaryCondition {
  BcKind kind = BcKind::supersonic_outlet;
  State data{};                  // free-stream state for farfield
  double outlet_pressure = 0.0;  // prescribed static pressure

  static BoundaryCondition farfield(const State& free_stream, const GasModel& g) {
    if (!admissible(free_stream, g))
      throw InadmissibleExternalState("farfield: free-stream state not admissible");
    return {BcKind::farfield, free_stream, 0.0};
  }
  static BoundaryCondition supersonic_outlet() {
    return {BcKind::supersonic_outlet, {}, 0.0};
  }
  static BoundaryCondition reflecting_wall() {
    return {BcKind::reflecting_wall, {}, 0.0};
  }
  static BoundaryCondition subsonic_outlet(double pressure) {
    if (!(pressure > 0.0))
      throw InadmissibleExternalState("subsonic outlet: pressure must be positive");
    return {BcKind::subsonic_outlet_pressure, {}, pressure};
  }
};

using BcTable = std::map<int, BoundaryCondition>;  // patch id -> condition

// reflects the momentum components: u^ = B^ u with B^ = diag(1, I-2nn^T, 1)
inline Mat4 reflection_matrix(Vec2 n) {
  Mat4 b = Mat4::identity();
  b(1, 1) = 1.0 - 2.0 * n.x * n.x;
  b(1, 2) = -2.0 * n.x * n.y;
  b(2, 1) = -2.0 * n.y * n.x;
  b(2, 2) = 1.0 - 2.0 * n.y * n.y;
  return b;
}

inline State external_state(const BoundaryCondition& bc, const State& ui, Vec2 n,
                            const GasModel& g) {
  switch (bc.kind) {
    case BcKind::farfield:
      return bc.data;
    case BcKind::supersonic_outlet:
      return ui;
    case BcKind::reflecting_wall:
      return reflection_matrix(n) * ui;
    case BcKind::subsonic_outlet_pressure: {
      // keep density and velocity, recompute the energy for the target pressure
      if (!(ui.rho > 0.0))
        throw InadmissibleExternalState("pressure outlet: internal density <= 0");
      State ext = ui;
      ext.ener = bc.outlet_pressure / (g.gamma - 1.0) + 0.5 * norm2(ui.mom) / ui.rho;
      return ext;
    }
  }
  throw Error("external_state: unknown boundary kind");
}

struct BoundaryTerm {
  State b_tilde{};  // full weak boundary contribution
  Mat4 block{};     // implicit part: contribution to B_ii
  State b_hat{};    // explicit part, b_tilde = block * u_i + b_hat
};

// One straight boundary segment of weight w = int_e phi_i ds and outward
// normal n. Uses the local Lax-Friedrichs flux with the two-state Rusanov
// speed lambda_n = lambda(u_i, u^_i; n).
inline BoundaryTerm boundary_term(const State& ui, const BoundaryCondition& bc,
                                  double w, Vec2 n, const GasModel& g) {
  const State ext = external_state(bc, ui, n, g);
  const double lam = guarded_rusanov_speed(ui, ext, n, g);

  BoundaryTerm out;
  out.b_tilde = w * (0.5 * (dot(flux(ui, g), n) - dot(flux(ext, g), n)) +
                     0.5 * lam * (ext - ui));

  const bool transformation =
      bc.kind == BcKind::reflecting_wall || bc.kind == BcKind::supersonic_outlet;
  if (transformation) {
    // fully implicit: u^ = B^ u_i, conservation holds in every iterate
    const Mat4 bhat = bc.kind == BcKind::reflecting_wall ? reflection_matrix(n)
                                                         : Mat4::identity();
    const Mat4 na_int = directional_jacobian(ui, n, g);
    const Mat4 na_ext = directional_jacobian(ext, n, g);
    out.block = w * (0.5 * (na_int - na_ext * bhat) +
                     (0.5 * lam) * (bhat - Mat4::identity()));
    out.b_hat = State{};
  } else {
    out.block = w * (0.5 * directional_jacobian(ui, n, g) -
                     Mat4::scaled_identity(0.5 * lam));
    out.b_hat = w * (-0.5 * dot(flux(ext, g), n) + 0.5 * lam * ext);
  }
  return out;
}

// --------------------------------------------------------------------------
// Graph viscosity and bar states, stored per undirected stencil pair

struct EdgeCoefficients {
  std::vector<double> d;          // d_ij = d_ji >= 0
  std::vector<double> lambda_ij;  // Rusanov speed along n_ij (0 if c_ij = 0)
  std::vector<double> lambda_ji;
  std::vector<State> bar_ij;
  std::vector<State> bar_ji;
  std::vector<double> sum_d;  // per node: sum_{j in N_i*} d_ij = -d_ii
};

inline EdgeCoefficients compute_edge_coefficients(const StateField& u,
                                                  const DiscreteOperators& ops,
                                                  const GasModel& g) {
  const std::size_t np = ops.pairs.size();
  EdgeCoefficients e;
  e.d.resize(np);
  e.lambda_ij.resize(np);
  e.lambda_ji.resize(np);
  e.bar_ij.resize(np);
  e.bar_ji.resize(np);
  e.sum_d.assign(ops.n, 0.0);

  std::vector<Flux> f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) f[i] = flux(u[i], g);

  for (std::size_t p = 0; p < np; ++p) {
    const auto& pr = ops.pairs[p];
    const State& uii = u[pr.i];
    const State& ujj = u[pr.j];
    const double len_ij = norm(pr.c_ij);
    const double len_ji = norm(pr.c_ji);

    double lij = 0.0, lji = 0.0;
    if (len_ij > 0.0) lij = guarded_rusanov_speed(uii, ujj, pr.c_ij / len_ij, g);
    if (len_ji > 0.0) lji = guarded_rusanov_speed(ujj, uii, pr.c_ji / len_ji, g);
    const double d = std::max(lij * len_ij, lji * len_ji);
    e.lambda_ij[p] = lij;
    e.lambda_ji[p] = lji;
    e.d[p] = d;
    e.sum_d[pr.i] += d;
    e.sum_d[pr.j] += d;

    const State mid = 0.5 * (uii + ujj);
    if (d > 0.0) {
      const State df_ij = dot(f[pr.j], pr.c_ij) - dot(f[pr.i], pr.c_ij);
      const State df_ji = dot(f[pr.i], pr.c_ji) - dot(f[pr.j], pr.c_ji);
      e.bar_ij[p] = mid - df_ij / (2.0 * d);
      e.bar_ji[p] = mid - df_ji / (2.0 * d);
    } else {
      if (len_ij > 0.0 || len_ji > 0.0)
        throw ZeroViscosityEdge("compute_edge_coefficients: vacuum pair with c_ij != 0");
      // isolated pair (c_ij = c_ji = 0) contributes nothing; keep the mean
      e.bar_ij[p] = mid;
      e.bar_ji[p] = mid;
    }
  }
  return e;
}

// --------------------------------------------------------------------------
// Low-order steady-state residual
//   (R_L)_i = b~_i + sum_j [d_ij (u_j - u_i) - (f_j - f_i).c_ij]

inline const BoundaryCondition& bc_for_patch(const BcTable& bcs, int patch) {
  const auto it = bcs.find(patch);
  if (it == bcs.end())
    throw MissingBoundaryCondition("no boundary condition for patch " +
                                   std::to_string(patch));
  return it->second;
}

inline StateField low_order_residual(const StateField& u, const DiscreteOperators& ops,
                                     const EdgeCoefficients& edge, const BcTable& bcs,
                                     const GasModel& g) {
  StateField r(u.size());
  std::vector<Flux> f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) f[i] = flux(u[i], g);

  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const auto& pr = ops.pairs[p];
    const double d = edge.d[p];
    const State du = u[pr.j] - u[pr.i];
    r[pr.i] += d * du - (dot(f[pr.j], pr.c_ij) - dot(f[pr.i], pr.c_ij));
    r[pr.j] -= d * du + (dot(f[pr.i], pr.c_ji) - dot(f[pr.j], pr.c_ji));
  }
  for (int i = 0; i < ops.n; ++i)
    for (const auto& seg : ops.boundary[i])
      r[i] += boundary_term(u[i], bc_for_patch(bcs, seg.patch), seg.weight,
                            seg.normal, g)
                  .b_tilde;
  return r;
}

inline StateField low_order_residual(const StateField& u, const DiscreteOperators& ops,
                                     const BcTable& bcs, const GasModel& g) {
  return low_order_residual(u, ops, compute_edge_coefficients(u, ops, g), bcs, g);
}

}  // namespace mcl2d
