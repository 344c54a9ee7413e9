#pragma once

#include <array>
#include <vector>

#include "mcl2d/low_order.hpp"

// Sequential monolithic convex limiting. Per stencil pair, the target flux
// built from low-order time derivatives is limited in the fixed order
// density -> v1 -> v2 -> specific total energy (discrete product rule),
// then scaled by a scalar pressure-positivity factor alpha_ij = alpha_ji.
// Sign convention throughout: u-bar*_ij = u-bar_ij + f*_ij / (2 d_ij).

namespace mcl2d {

struct DegenerateBarDensity : Error { using Error::Error; };

// pairs with 2 d_ij below this threshold carry no antidiffusion at all
constexpr double kViscosityGuard = 1e-140;

inline StateField low_order_time_derivatives(const StateField& u,
                                             const DiscreteOperators& ops,
                                             const EdgeCoefficients& edge,
                                             const BcTable& bcs, const GasModel& g) {
  StateField r = low_order_residual(u, ops, edge, bcs, g);
  for (int i = 0; i < ops.n; ++i) r[i] *= 1.0 / ops.lumped[i];
  return r;
}

inline StateField low_order_time_derivatives(const StateField& u,
                                             const DiscreteOperators& ops,
                                             const BcTable& bcs, const GasModel& g) {
  return low_order_time_derivatives(u, ops, compute_edge_coefficients(u, ops, g), bcs,
                                    g);
}

// f_ij = m_ij (udot_i - udot_j) + d_ij (u_i - u_j), stored once per pair in
// the i < j orientation; f_ji = -f_ij by construction.
struct TargetFluxes {
  std::vector<State> f;
};

inline TargetFluxes target_fluxes(const StateField& u, const StateField& udot,
                                  const DiscreteOperators& ops,
                                  const EdgeCoefficients& edge) {
  TargetFluxes t;
  t.f.resize(ops.pairs.size());
  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const auto& pr = ops.pairs[p];
    t.f[p] = pr.m * (udot[pr.i] - udot[pr.j]) + edge.d[p] * (u[pr.i] - u[pr.j]);
  }
  return t;
}

// --------------------------------------------------------------------------
// Local bounds: nodal values over N_i plus bar states over the pair stencil

struct NodalBounds {
  std::vector<double> rho_min, rho_max;
  // phi in {v1, v2, E}
  std::array<std::vector<double>, 3> phi_min, phi_max;
};

namespace detail {

inline double phi_of(const State& s, int which) {
  // specific quantity phi = (rho phi) / rho
  const double q = which == 0 ? s.mom.x : (which == 1 ? s.mom.y : s.ener);
  return q / s.rho;
}

inline double bar_component(const State& s, int which) {
  return which == 0 ? s.mom.x : (which == 1 ? s.mom.y : s.ener);
}

}  // namespace detail

inline NodalBounds compute_limiter_bounds(const StateField& u,
                                          const DiscreteOperators& ops,
                                          const EdgeCoefficients& edge) {
  NodalBounds b;
  b.rho_min.resize(ops.n);
  b.rho_max.resize(ops.n);
  for (int q = 0; q < 3; ++q) {
    b.phi_min[q].resize(ops.n);
    b.phi_max[q].resize(ops.n);
  }
  for (int i = 0; i < ops.n; ++i) {
    if (!(u[i].rho > 0.0))
      throw DegenerateBarDensity("limiter bounds: nodal density <= 0 at node " +
                                 std::to_string(i));
    b.rho_min[i] = b.rho_max[i] = u[i].rho;
    for (int q = 0; q < 3; ++q)
      b.phi_min[q][i] = b.phi_max[q][i] = detail::phi_of(u[i], q);
  }

  auto include = [](double v, double& lo, double& hi) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };

  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const auto& pr = ops.pairs[p];
    // neighbour nodal values
    include(u[pr.j].rho, b.rho_min[pr.i], b.rho_max[pr.i]);
    include(u[pr.i].rho, b.rho_min[pr.j], b.rho_max[pr.j]);
    for (int q = 0; q < 3; ++q) {
      include(detail::phi_of(u[pr.j], q), b.phi_min[q][pr.i], b.phi_max[q][pr.i]);
      include(detail::phi_of(u[pr.i], q), b.phi_min[q][pr.j], b.phi_max[q][pr.j]);
    }
    if (2.0 * edge.d[p] <= kViscosityGuard) continue;  // pair carries nothing

    const State& bij = edge.bar_ij[p];
    const State& bji = edge.bar_ji[p];
    include(bij.rho, b.rho_min[pr.i], b.rho_max[pr.i]);
    include(bji.rho, b.rho_min[pr.j], b.rho_max[pr.j]);
    const double rho_sum = bij.rho + bji.rho;
    if (!(rho_sum > 0.0))
      throw DegenerateBarDensity("limiter bounds: bar-state density sum <= 0");
    for (int q = 0; q < 3; ++q) {
      const double phi_bar =
          (detail::bar_component(bij, q) + detail::bar_component(bji, q)) / rho_sum;
      include(phi_bar, b.phi_min[q][pr.i], b.phi_max[q][pr.i]);
      include(phi_bar, b.phi_min[q][pr.j], b.phi_max[q][pr.j]);
    }
  }
  return b;
}

// --------------------------------------------------------------------------
// Per-pair limiter stages

inline double limit_density(double f_rho, double two_d, double bar_rho_ij,
                            double bar_rho_ji, double rho_i_min, double rho_i_max,
                            double rho_j_min, double rho_j_max) {
  if (f_rho > 0.0)
    return std::min(f_rho,
                    two_d * std::min(rho_i_max - bar_rho_ij, bar_rho_ji - rho_j_min));
  return std::max(f_rho,
                  two_d * std::max(rho_i_min - bar_rho_ij, bar_rho_ji - rho_j_max));
}

// discrete product rule for phi with the already-limited density flux
inline double limit_product(double f_rhophi, double rho_star_ij, double rho_star_ji,
                            double two_d, double bar_rhophi_ij, double bar_rhophi_ji,
                            double bar_rho_ij, double bar_rho_ji, double phi_i_min,
                            double phi_i_max, double phi_j_min, double phi_j_max) {
  const double rho_sum = bar_rho_ij + bar_rho_ji;
  if (!(rho_sum > 0.0))
    throw DegenerateBarDensity("limit_product: bar-state density sum <= 0");
  const double phi_bar = (bar_rhophi_ij + bar_rhophi_ji) / rho_sum;

  const double offset = two_d * (bar_rhophi_ij - rho_star_ij * phi_bar);
  const double gij = f_rhophi + offset;
  const double gmax = std::min(two_d * rho_star_ij * (phi_i_max - phi_bar),
                               two_d * rho_star_ji * (phi_bar - phi_j_min));
  const double gmin = std::max(two_d * rho_star_ij * (phi_i_min - phi_bar),
                               two_d * rho_star_ji * (phi_bar - phi_j_max));
  const double gstar = gij > 0.0 ? std::min(gij, gmax) : std::max(gij, gmin);
  return gstar - offset;
}

// Scalar pressure fix: alpha_ij = alpha_ji in [0,1] such that the linear
// sufficient condition alpha R_ij^max <= min(Q_ij, Q_ji) holds.
inline double pressure_fix(const State& fstar, double two_d, const State& bar_ij,
                           const State& bar_ji) {
  const auto q_of = [two_d](const State& bar) {
    // (2d)^2 rho-bar [ (rho E)-bar - |(rho v)-bar|^2 / (2 rho-bar) ]
    return two_d * two_d * (bar.rho * bar.ener - 0.5 * norm2(bar.mom));
  };
  const double quad = std::max(0.0, 0.5 * norm2(fstar.mom) - fstar.ener * fstar.rho);
  const double rmax =
      two_d * (std::max(norm(bar_ij.mom), norm(bar_ji.mom)) * norm(fstar.mom) +
               std::max(bar_ij.rho, bar_ji.rho) * std::abs(fstar.ener) +
               std::max(bar_ij.ener, bar_ji.ener) * std::abs(fstar.rho)) +
      quad;
  const double qmin = std::min(q_of(bar_ij), q_of(bar_ji));
  if (rmax > qmin) return std::clamp(qmin / rmax, 0.0, 1.0);
  return 1.0;
}

// --------------------------------------------------------------------------
// Full sequential pipeline over all pairs

struct LimitedFluxes {
  std::vector<State> fstar;   // prelimited flux, i < j orientation
  std::vector<double> alpha;  // pressure-fix factor
};

inline LimitedFluxes limit_antidiffusion(const DiscreteOperators& ops,
                                         const EdgeCoefficients& edge,
                                         const TargetFluxes& targets,
                                         const NodalBounds& b) {
  LimitedFluxes out;
  out.fstar.assign(ops.pairs.size(), State{});
  out.alpha.assign(ops.pairs.size(), 1.0);

  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const auto& pr = ops.pairs[p];
    const double two_d = 2.0 * edge.d[p];
    if (two_d <= kViscosityGuard) continue;  // keep f* = 0, alpha = 1

    const State& bij = edge.bar_ij[p];
    const State& bji = edge.bar_ji[p];
    const State& f = targets.f[p];

    State fs;
    fs.rho = limit_density(f.rho, two_d, bij.rho, bji.rho, b.rho_min[pr.i],
                           b.rho_max[pr.i], b.rho_min[pr.j], b.rho_max[pr.j]);
    const double rho_star_ij = bij.rho + fs.rho / two_d;
    const double rho_star_ji = bji.rho - fs.rho / two_d;
    for (int q = 0; q < 3; ++q) {
      const double fq = detail::bar_component(f, q);
      const double limited = limit_product(
          fq, rho_star_ij, rho_star_ji, two_d, detail::bar_component(bij, q),
          detail::bar_component(bji, q), bij.rho, bji.rho, b.phi_min[q][pr.i],
          b.phi_max[q][pr.i], b.phi_min[q][pr.j], b.phi_max[q][pr.j]);
      if (q == 0) fs.mom.x = limited;
      else if (q == 1) fs.mom.y = limited;
      else fs.ener = limited;
    }
    out.fstar[p] = fs;
    out.alpha[p] = pressure_fix(fs, two_d, bij, bji);
  }
  return out;
}

// F*_i = sum_j alpha_ij f*_ij, antisymmetric accumulation over pairs
inline StateField accumulate_antidiffusion(const DiscreteOperators& ops,
                                           const std::vector<State>& f,
                                           const std::vector<double>& alpha) {
  StateField F(ops.n);
  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const State af = alpha[p] * f[p];
    F[ops.pairs[p].i] += af;
    F[ops.pairs[p].j] -= af;
  }
  return F;
}

inline StateField corrected_antidiffusion(const StateField& u,
                                          const DiscreteOperators& ops,
                                          const EdgeCoefficients& edge,
                                          const BcTable& bcs, const GasModel& g) {
  const StateField udot = low_order_time_derivatives(u, ops, edge, bcs, g);
  const TargetFluxes targets = target_fluxes(u, udot, ops, edge);
  const NodalBounds bounds = compute_limiter_bounds(u, ops, edge);
  const LimitedFluxes lim = limit_antidiffusion(ops, edge, targets, bounds);
  return accumulate_antidiffusion(ops, lim.fstar, lim.alpha);
}

inline StateField corrected_antidiffusion(const StateField& u,
                                          const DiscreteOperators& ops,
                                          const BcTable& bcs, const GasModel& g) {
  return corrected_antidiffusion(u, ops, compute_edge_coefficients(u, ops, g), bcs, g);
}

}  // namespace mcl2d
