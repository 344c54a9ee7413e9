#include <catch2/catch_amalgamated.hpp>

#include "mcl2d/limiter.hpp"
#include "oracles.hpp"

using namespace mcl2d;

namespace {

const GasModel gas{};

State free_stream(double mach) {
  return primitive_to_conserved(1.0, {mach, 0.0}, 1.0 / gas.gamma, gas);
}

BcTable all_farfield(const State& uinf) {
  BcTable bcs;
  for (int patch : {1, 2, 3, 4}) bcs[patch] = BoundaryCondition::farfield(uinf, gas);
  return bcs;
}

// two-node operator set with a single interior-style pair
DiscreteOperators pair_ops(Vec2 c01, double m01) {
  DiscreteOperators ops;
  ops.n = 2;
  ops.lumped = {1.0, 1.0};
  ops.row_ptr = {0, 2, 4};
  ops.col_idx = {0, 1, 0, 1};
  ops.mass = {m01, m01, m01, m01};
  ops.c = {-1.0 * c01, c01, -1.0 * c01, c01};
  ops.boundary.assign(2, {});
  ops.pairs = {{0, 1, m01, c01, -1.0 * c01}};
  return ops;
}

struct PairData {
  DiscreteOperators ops;
  StateField u;
  EdgeCoefficients edge;
};

PairData random_pair(testing::RandomStates& rnd) {
  const double len = rnd.uniform(0.05, 1.5);
  const Vec2 c = len * rnd.unit_vector();
  PairData d{pair_ops(c, rnd.uniform(0.01, 0.2)), {}, {}};
  d.u = {rnd.admissible(gas), rnd.admissible(gas)};
  d.edge = compute_edge_coefficients(d.u, d.ops, gas);
  return d;
}

State random_target(testing::RandomStates& rnd, const PairData& d) {
  const double scale =
      std::max(1.0, 2.0 * d.edge.d[0] * max_abs(d.u[0] - d.u[1]));
  State f;
  for (int k = 0; k < 4; ++k) f[k] = scale * rnd.uniform(-2.0, 2.0);
  return f;
}

double q_bound(double two_d, const State& bar) {
  return two_d * two_d * bar.rho * (bar.ener - 0.5 * norm2(bar.mom) / bar.rho);
}

double p_poly(double alpha, double two_d, const State& bar, const State& f) {
  const double quad = 0.5 * norm2(f.mom) - f.ener * f.rho;
  const double lin = two_d * (dot(bar.mom, f.mom) - bar.rho * f.ener - bar.ener * f.rho);
  return quad * alpha * alpha + lin * alpha;
}

}  // namespace

TEST_CASE("low-order time derivatives") {
  const State uinf = free_stream(0.67);
  const Mesh mesh = generate_channel(6, 4, -1.0, 1.0, {[](double) { return 0.0; },
                                                       [](double) { return 1.0; }});
  const DiscreteOperators ops = assemble(mesh);
  const BcTable bcs = all_farfield(uinf);

  StateField u(ops.n, uinf);
  for (const State& ud : low_order_time_derivatives(u, ops, bcs, gas))
    CHECK(max_abs(ud) <= 1e-12);

  // m_i udot_i recovers the residual
  testing::RandomStates rnd(41);
  for (auto& s : u) s = rnd.near(uinf, gas, 0.4);
  const StateField r = low_order_residual(u, ops, bcs, gas);
  const StateField udot = low_order_time_derivatives(u, ops, bcs, gas);
  for (int i = 0; i < ops.n; ++i)
    CHECK(max_abs(ops.lumped[i] * udot[i] - r[i]) <=
          1e-13 * std::max(1.0, max_abs(r[i])));

  // periodic conservation of the mass-weighted derivative
  const Mesh strip = generate_periodic_strip(5, 5, 1.0, 1.0);
  const DiscreteOperators pops = apply_periodic(assemble(strip), strip.periodic);
  StateField up(pops.n);
  for (auto& s : up) s = rnd.admissible(gas);
  const StateField udp = low_order_time_derivatives(up, pops, {}, gas);
  State total{};
  double scale = 1.0;
  for (int i = 0; i < pops.n; ++i) {
    total += pops.lumped[i] * udp[i];
    scale = std::max(scale, max_abs(pops.lumped[i] * udp[i]));
  }
  CHECK(max_abs(total) <= 1e-12 * scale);
}

TEST_CASE("target fluxes") {
  testing::RandomStates rnd(43);
  const PairData d = random_pair(rnd);

  // uniform state: no antidiffusion
  StateField uu(2, d.u[0]);
  const EdgeCoefficients eu = compute_edge_coefficients(uu, d.ops, gas);
  StateField zero(2, State{});
  const TargetFluxes tu = target_fluxes(uu, zero, d.ops, eu);
  CHECK(max_abs(tu.f[0]) <= 1e-14);

  // equal derivatives: the mass term cancels
  StateField same_dot(2, State{0.3, {0.1, -0.2}, 0.5});
  const TargetFluxes t = target_fluxes(d.u, same_dot, d.ops, d.edge);
  const State expect = d.edge.d[0] * (d.u[0] - d.u[1]);
  CHECK(max_abs(t.f[0] - expect) <= 1e-13 * std::max(1.0, max_abs(expect)));
}

TEST_CASE("density limiter") {
  // zero flux passes through
  CHECK(limit_density(0.0, 2.0, 1.0, 1.2, 0.5, 2.0, 0.5, 2.0) == 0.0);
  // no headroom above the i bound clips to zero
  CHECK(limit_density(1.0, 2.0, 2.0, 1.0, 0.5, 2.0, 0.5, 2.0) == 0.0);

  // brute force over a grid of flux values: limited bar states in bounds
  testing::RandomStates rnd(47);
  for (int inst = 0; inst < 300; ++inst) {
    const PairData d = random_pair(rnd);
    const NodalBounds b = compute_limiter_bounds(d.u, d.ops, d.edge);
    const double two_d = 2.0 * d.edge.d[0];
    const double fscale = std::max(1.0, two_d * std::abs(d.u[0].rho - d.u[1].rho));
    for (int k = -10; k <= 10; ++k) {
      const double f = 0.35 * k * fscale;
      const double fs = limit_density(f, two_d, d.edge.bar_ij[0].rho,
                                      d.edge.bar_ji[0].rho, b.rho_min[0],
                                      b.rho_max[0], b.rho_min[1], b.rho_max[1]);
      const double tol = 1e-12 * (b.rho_max[0] - b.rho_min[0] + 1.0);
      const double rs_ij = d.edge.bar_ij[0].rho + fs / two_d;
      const double rs_ji = d.edge.bar_ji[0].rho - fs / two_d;
      CHECK(rs_ij >= b.rho_min[0] - tol);
      CHECK(rs_ij <= b.rho_max[0] + tol);
      CHECK(rs_ji >= b.rho_min[1] - tol);
      CHECK(rs_ji <= b.rho_max[1] + tol);
      // never amplifies and never flips sign
      CHECK(std::abs(fs) <= std::abs(f) + 1e-15);
      CHECK(fs * f >= 0.0);
    }
  }
}

TEST_CASE("product limiter") {
  // forcing g* = 0 yields the low-order coupling (rho phi)-bar* = rho-bar* phi-bar
  {
    const double two_d = 2.0, bar_r_ij = 1.0, bar_r_ji = 1.4;
    const double bar_q_ij = 0.7, bar_q_ji = 0.5;
    const double phi_bar = (bar_q_ij + bar_q_ji) / (bar_r_ij + bar_r_ji);
    const double rho_star_ij = 1.1, rho_star_ji = 1.3;
    const double fs = limit_product(0.9, rho_star_ij, rho_star_ji, two_d, bar_q_ij,
                                    bar_q_ji, bar_r_ij, bar_r_ji, phi_bar, phi_bar,
                                    phi_bar, phi_bar);
    CHECK(bar_q_ij + fs / two_d == Catch::Approx(rho_star_ij * phi_bar).epsilon(1e-13));
  }

  // randomized suite: the constraints hold for all pairs and both orientations.
  // Node 0's bounds get widened asymmetrically, as a larger stencil would.
  testing::RandomStates rnd(53);
  for (int inst = 0; inst < 2000; ++inst) {
    const PairData d = random_pair(rnd);
    NodalBounds b = compute_limiter_bounds(d.u, d.ops, d.edge);
    for (int q = 0; q < 3; ++q) {
      b.phi_min[q][0] -= rnd.uniform(0.0, 3.0);
      b.phi_max[q][0] += rnd.uniform(0.0, 3.0);
    }
    b.rho_min[0] = std::max(0.0, b.rho_min[0] - rnd.uniform(0.0, 1.0));
    b.rho_max[0] += rnd.uniform(0.0, 3.0);
    const TargetFluxes raw{{random_target(rnd, d)}};
    const LimitedFluxes lim = limit_antidiffusion(d.ops, d.edge, raw, b);

    const double two_d = 2.0 * d.edge.d[0];
    const State& fs = lim.fstar[0];
    const double rs_ij = d.edge.bar_ij[0].rho + fs.rho / two_d;
    const double rs_ji = d.edge.bar_ji[0].rho - fs.rho / two_d;
    for (int q = 0; q < 3; ++q) {
      const double fq = q == 0 ? fs.mom.x : (q == 1 ? fs.mom.y : fs.ener);
      const double bar_ij = detail::bar_component(d.edge.bar_ij[0], q);
      const double bar_ji = detail::bar_component(d.edge.bar_ji[0], q);
      const double tol =
          1e-12 * (std::abs(bar_ij) + std::abs(bar_ji) + std::abs(fq) + 1.0);
      const double star_ij = bar_ij + fq / two_d;
      const double star_ji = bar_ji - fq / two_d;
      CHECK(star_ij >= rs_ij * b.phi_min[q][0] - tol);
      CHECK(star_ij <= rs_ij * b.phi_max[q][0] + tol);
      CHECK(star_ji >= rs_ji * b.phi_min[q][1] - tol);
      CHECK(star_ji <= rs_ji * b.phi_max[q][1] + tol);
    }
  }
}

TEST_CASE("degenerate bar density is rejected") {
  CHECK_THROWS_AS(limit_product(1.0, 0.0, 0.0, 2.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0),
                  DegenerateBarDensity);
}

TEST_CASE("pressure fix") {
  testing::RandomStates rnd(59);

  // zero prelimited flux: alpha = 1
  {
    const PairData d = random_pair(rnd);
    CHECK(pressure_fix(State{}, 2.0 * d.edge.d[0], d.edge.bar_ij[0],
                       d.edge.bar_ji[0]) == 1.0);
  }

  int nontrivial = 0;
  for (int inst = 0; inst < 10000; ++inst) {
    const PairData d = random_pair(rnd);
    const NodalBounds b = compute_limiter_bounds(d.u, d.ops, d.edge);
    const TargetFluxes raw{{random_target(rnd, d)}};
    const LimitedFluxes lim = limit_antidiffusion(d.ops, d.edge, raw, b);
    const double two_d = 2.0 * d.edge.d[0];
    const State& fs = lim.fstar[0];
    const double alpha = lim.alpha[0];
    REQUIRE(alpha >= 0.0);
    REQUIRE(alpha <= 1.0);
    if (alpha < 1.0) ++nontrivial;

    const State star_ij = d.edge.bar_ij[0] + (alpha / two_d) * fs;
    const State star_ji = d.edge.bar_ji[0] - (alpha / two_d) * fs;
    const double pscale =
        std::max(pressure(d.u[0], gas), pressure(d.u[1], gas));
    CHECK(star_ij.rho >= -1e-12);
    CHECK(star_ji.rho >= -1e-12);
    CHECK((gas.gamma - 1.0) * (star_ij.ener * star_ij.rho - 0.5 * norm2(star_ij.mom)) >=
          -1e-12 * pscale * std::max(star_ij.rho, 1.0));
    CHECK((gas.gamma - 1.0) * (star_ji.ener * star_ji.rho - 0.5 * norm2(star_ji.mom)) >=
          -1e-12 * pscale * std::max(star_ji.rho, 1.0));

    // the chosen alpha satisfies the exact quadratic condition, both ways
    const double qtol = 1e-12 * (1.0 + std::abs(q_bound(two_d, d.edge.bar_ij[0])));
    CHECK(p_poly(alpha, two_d, d.edge.bar_ij[0], fs) <=
          q_bound(two_d, d.edge.bar_ij[0]) + qtol);
    CHECK(p_poly(alpha, two_d, d.edge.bar_ji[0], -1.0 * fs) <=
          q_bound(two_d, d.edge.bar_ji[0]) + qtol);
  }
  CHECK(nontrivial > 100);  // the suite actually exercises the fix
}

TEST_CASE("corrected antidiffusion") {
  const State uinf = free_stream(0.67);
  const Mesh mesh = generate_channel(7, 5, -1.0, 1.0, {[](double) { return 0.0; },
                                                       [](double) { return 1.0; }});
  const DiscreteOperators ops = assemble(mesh);
  const BcTable bcs = all_farfield(uinf);

  StateField u(ops.n, uinf);
  for (const State& f : corrected_antidiffusion(u, ops, bcs, gas))
    CHECK(max_abs(f) <= 1e-12);

  // pairwise antisymmetry: the total correction cancels
  testing::RandomStates rnd(61);
  for (auto& s : u) s = rnd.near(uinf, gas, 0.5);
  const StateField F = corrected_antidiffusion(u, ops, bcs, gas);
  State total{};
  double scale = 1.0;
  for (const State& f : F) {
    total += f;
    scale = std::max(scale, max_abs(f));
  }
  CHECK(max_abs(total) <= 1e-12 * scale);

  // pass-through mode: alpha = 1 and raw targets reproduce sum_j f_ij
  const EdgeCoefficients edge = compute_edge_coefficients(u, ops, gas);
  const StateField udot = low_order_time_derivatives(u, ops, edge, bcs, gas);
  const TargetFluxes targets = target_fluxes(u, udot, ops, edge);
  const std::vector<double> ones(ops.pairs.size(), 1.0);
  const StateField raw = accumulate_antidiffusion(ops, targets.f, ones);
  StateField expect(ops.n);
  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    expect[ops.pairs[p].i] += targets.f[p];
    expect[ops.pairs[p].j] -= targets.f[p];
  }
  for (int i = 0; i < ops.n; ++i) CHECK(max_abs(raw[i] - expect[i]) == 0.0);

  // vacuum-guarded pair: no division, no antidiffusion
  DiscreteOperators tiny = pair_ops({0.0, 0.0}, 0.05);
  tiny.pairs[0].c_ij = tiny.pairs[0].c_ji = Vec2{};
  for (auto& c : tiny.c) c = Vec2{};
  StateField uv = {primitive_to_conserved(1.0, {0.2, 0.0}, 0.5, gas),
                   primitive_to_conserved(2.0, {-0.1, 0.3}, 0.8, gas)};
  const EdgeCoefficients ev = compute_edge_coefficients(uv, tiny, gas);
  CHECK(ev.d[0] == 0.0);
  const StateField Fv = corrected_antidiffusion(uv, tiny, {}, gas);
  CHECK(max_abs(Fv[0]) == 0.0);
  CHECK(max_abs(Fv[1]) == 0.0);
}
