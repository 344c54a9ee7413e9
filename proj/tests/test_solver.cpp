#include <catch2/catch_amalgamated.hpp>

#include "mcl2d/solver.hpp"
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

GeometryMap flat_walls() {
  return {[](double) { return 0.0; }, [](double) { return 1.0; }};
}

GeometryMap gamm_walls() {
  return {[](double x) {
            return (x >= -0.5 && x <= 0.5) ? std::sqrt(1.69 - x * x) - 1.2 : 0.0;
          },
          [](double) { return 1.0; }};
}

}  // namespace

TEST_CASE("compute_dt matches the CFL formula") {
  const Mesh mesh = generate_channel(6, 4, -1.0, 1.0, flat_walls());
  const DiscreteOperators ops = assemble(mesh);
  testing::RandomStates rnd(101);
  StateField u(ops.n);
  for (auto& s : u) s = rnd.admissible(gas);
  const EdgeCoefficients edge = compute_edge_coefficients(u, ops, gas);

  const double dt1 = compute_dt(edge, ops, 1.0);
  CHECK(compute_dt(edge, ops, 2.0) == Catch::Approx(2.0 * dt1).epsilon(1e-15));
  CHECK(compute_dt(edge, ops, 1e4) == Catch::Approx(1e4 * dt1).epsilon(1e-15));

  // at CFL = 1 the worst node sits exactly at the threshold
  double worst = 0.0;
  for (int i = 0; i < ops.n; ++i)
    worst = std::max(worst, 2.0 * dt1 * edge.sum_d[i] / ops.lumped[i]);
  CHECK(worst == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("discrete L2 norm of the constant field is sqrt(area)") {
  const Mesh mesh = generate_channel(9, 6, -1.0, 1.0, gamm_walls());
  const DiscreteOperators ops = assemble(mesh);
  CHECK(l2h_norm(ops, std::vector<double>(ops.n, 1.0)) ==
        Catch::Approx(std::sqrt(mesh.total_area())).epsilon(1e-13));
}

TEST_CASE("step_residual: both printed forms agree") {
  const State uinf = free_stream(0.67);
  const Mesh mesh = generate_channel(7, 4, -1.0, 1.0, gamm_walls());
  const DiscreteOperators ops = assemble(mesh);
  BcTable bcs = all_farfield(uinf);
  bcs[channel_patch::lower_wall] = BoundaryCondition::reflecting_wall();
  bcs[channel_patch::upper_wall] = BoundaryCondition::reflecting_wall();
  bcs[channel_patch::outlet] = BoundaryCondition::subsonic_outlet(1.0 / gas.gamma);

  // free stream with pure farfield: everything vanishes
  {
    const BcTable far = all_farfield(uinf);
    StateField u(ops.n, uinf);
    const StateField r = step_residual(u, u, 0.7, ops, far, gas);
    for (const State& ri : r) CHECK(max_abs(ri) <= 1e-12);
  }

  testing::RandomStates rnd(103);
  StateField u_n(ops.n), u(ops.n);
  for (int i = 0; i < ops.n; ++i) {
    u_n[i] = rnd.near(uinf, gas, 0.2);
    u[i] = rnd.near(uinf, gas, 0.2);
  }
  const double dt = 0.31;
  const EdgeCoefficients edge = compute_edge_coefficients(u, ops, gas);

  const StateField direct = step_residual(u, u_n, dt, ops, edge, bcs, gas);

  // matrix form M_L u^n - J_L(u) u + dt (F*(u) + b(u^))
  const BlockSparseMatrix jac = assemble_jacobian(u, ops, edge, bcs, dt, gas);
  const StateField ju = jac.mul(u);
  const StateField fstar = corrected_antidiffusion(u, ops, edge, bcs, gas);
  const StateField bhat = boundary_data_vector(u, ops, bcs, gas);
  for (int i = 0; i < ops.n; ++i) {
    const State matrix_form =
        ops.lumped[i] * u_n[i] - ju[i] + dt * (fstar[i] + bhat[i]);
    CHECK(max_abs(matrix_form - direct[i]) <=
          1e-12 * std::max(1.0, max_abs(direct[i])));
  }
}

TEST_CASE("newton_step: free stream and stress instance") {
  const State uinf = free_stream(0.67);
  SolverConfig cfg;
  cfg.lin_tol = 1e-12;
  cfg.lin_max_iter = 2000;
  cfg.max_newton_iters = 30;

  {
    const Mesh mesh = generate_channel(6, 4, -1.0, 1.0, flat_walls());
    const DiscreteOperators ops = assemble(mesh);
    const BcTable bcs = all_farfield(uinf);
    StateField u(ops.n, uinf);
    const NewtonResult r = newton_step(u, 5.0, ops, bcs, gas, cfg);
    CHECK(r.iterations == 1);
    CHECK(r.halvings == 0);
    for (int i = 0; i < ops.n; ++i) CHECK(max_abs(r.u[i] - uinf) <= 1e-9);
  }

  // colliding streams around a near-vacuum lane: needs several iterations,
  // possibly with dt halvings, and ends admissible
  {
    const Mesh strip = generate_periodic_strip(6, 6, 1.0, 1.0);
    const DiscreteOperators ops = apply_periodic(assemble(strip), strip.periodic);
    StateField u(ops.n);
    for (int i = 0; i < ops.n; ++i) {
      const int col = i % 6;
      if (col < 2) u[i] = primitive_to_conserved(2.0, {6.0, 0.0}, 2.0, gas);
      else if (col == 2) u[i] = primitive_to_conserved(2e-5, {0.0, 0.0}, 1e-7, gas);
      else u[i] = primitive_to_conserved(2.0, {-6.0, 0.0}, 2.0, gas);
    }
    const EdgeCoefficients e = compute_edge_coefficients(u, ops, gas);

    const NewtonResult mild = newton_step(u, compute_dt(e, ops, 5.0), ops, {}, gas, cfg);
    CHECK(mild.iterations > 1);
    CHECK(mild.halvings == 0);
    CHECK(admissible(mild.u, gas));

    const NewtonResult hard =
        newton_step(u, compute_dt(e, ops, 100.0), ops, {}, gas, cfg);
    CHECK(hard.halvings >= 1);
    CHECK(admissible(hard.u, gas));
  }
}

TEST_CASE("psi_s iteration: IDP, contraction, cross-solver agreement") {
  const Mesh strip = generate_periodic_strip(5, 5, 1.0, 1.0);
  const DiscreteOperators ops = apply_periodic(assemble(strip), strip.periodic);
  const State uinf = free_stream(0.5);

  // uniform state is an immediate fixed point
  {
    StateField u(ops.n, uinf);
    const PsiResult r = psi_s_iterate(u, 1.0, 0.1, ops, {}, gas);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
  }

  testing::RandomStates rnd(107);
  StateField u0(ops.n);
  for (auto& s : u0) s = rnd.near(uinf, gas, 0.25);
  const EdgeCoefficients edge = compute_edge_coefficients(u0, ops, gas);

  // dt under the contraction condition 2 dt/m_i sum_j 2 lambda max|c| < 1
  double lam = 0.0;
  for (std::size_t p = 0; p < ops.pairs.size(); ++p)
    lam = std::max({lam, edge.lambda_ij[p], edge.lambda_ji[p]});
  double worst = 0.0;
  for (int i = 0; i < ops.n; ++i) {
    double row = 0.0;
    for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
      if (ops.pairs[p].i != i && ops.pairs[p].j != i) continue;
      row += 2.0 * lam * std::max(norm(ops.pairs[p].c_ij), norm(ops.pairs[p].c_ji));
    }
    worst = std::max(worst, 2.0 * row / ops.lumped[i]);
  }
  const double dt = 0.45 / worst;

  const PsiResult psi = psi_s_iterate(u0, 1.0, dt, ops, {}, gas);
  CHECK(psi.converged);
  REQUIRE(psi.increments.size() >= 4);
  for (std::size_t k = 2; k < psi.increments.size(); ++k)
    CHECK(psi.increments[k] < psi.increments[k - 1]);

  SolverConfig cfg;
  cfg.lin_tol = 1e-14;
  cfg.lin_max_iter = 5000;
  const NewtonResult newton = newton_fixed_point(u0, dt, ops, {}, gas, cfg, 1e-14);
  const double scale = max_abs(u0);
  for (int i = 0; i < ops.n; ++i)
    CHECK(max_abs(psi.u[i] - newton.u[i]) <= 1e-10 * scale);
}

TEST_CASE("choose_omega: candidate set, ties, brute force") {
  CHECK(omega_candidates(3, 0.5) == std::vector<double>{0.5, 0.75, 1.0});
  const auto c6 = omega_candidates(6, 0.5);
  REQUIRE(c6.size() == 6);
  for (int k = 0; k < 6; ++k) CHECK(c6[k] == Catch::Approx(0.5 + 0.1 * k).margin(1e-15));

  const State uinf = free_stream(0.67);
  const Mesh mesh = generate_channel(5, 3, -1.0, 1.0, flat_walls());
  const DiscreteOperators ops = assemble(mesh);
  const BcTable bcs = all_farfield(uinf);
  SolverConfig cfg;

  // du = 0: all candidates tie, the largest wins
  {
    StateField u(ops.n, uinf);
    const OmegaChoice c = choose_omega(u, StateField(ops.n), cfg, ops, bcs, gas);
    CHECK(c.omega == 1.0);
  }

  testing::RandomStates rnd(109);
  for (int inst = 0; inst < 200; ++inst) {
    StateField u(ops.n), du(ops.n);
    for (int i = 0; i < ops.n; ++i) {
      u[i] = rnd.near(uinf, gas, 0.3);
      du[i] = 0.05 * (rnd.near(uinf, gas, 0.3) - u[i]);
    }
    const OmegaChoice c = choose_omega(u, du, cfg, ops, bcs, gas);

    // exhaustive candidate evaluation with the same tie-break rule
    double best = std::numeric_limits<double>::infinity();
    double best_w = 1.0;
    for (const double w : omega_candidates(cfg.omega_candidates, cfg.omega_floor)) {
      StateField uc(ops.n);
      for (int i = 0; i < ops.n; ++i) uc[i] = u[i] + w * du[i];
      const double eta = entropy_residual_norm(uc, ops, bcs, gas);
      if (eta <= best) {
        best = eta;
        best_w = w;
      }
    }
    CHECK(c.omega == best_w);
  }
}

TEST_CASE("run_to_steady: trivial and coarse GAMM channel") {
  const State uinf = free_stream(0.67);
  SolverConfig cfg;
  cfg.max_pseudo_steps = 400;

  // free stream with farfield everywhere is stationary at step 0
  {
    const Mesh mesh = generate_channel(5, 3, -1.0, 1.0, flat_walls());
    const DiscreteOperators ops = assemble(mesh);
    const SteadyResult res =
        run_to_steady(StateField(ops.n, uinf), cfg, ops, all_farfield(uinf), gas);
    CHECK(res.reason == StopReason::converged);
    CHECK(res.steps == 0);
    CHECK(res.records.empty());
  }

  // coarse GAMM channel converges with the adaptive strategy
  {
    const Mesh mesh = generate_channel(24, 8, -1.0, 1.0, gamm_walls());
    const DiscreteOperators ops = assemble(mesh);
    BcTable bcs;
    bcs[channel_patch::inlet] = BoundaryCondition::farfield(uinf, gas);
    bcs[channel_patch::outlet] = BoundaryCondition::subsonic_outlet(1.0 / gas.gamma);
    bcs[channel_patch::lower_wall] = BoundaryCondition::reflecting_wall();
    bcs[channel_patch::upper_wall] = BoundaryCondition::reflecting_wall();

    const SteadyResult res =
        run_to_steady(StateField(ops.n, uinf), cfg, ops, bcs, gas);
    REQUIRE(res.reason == StopReason::converged);
    CHECK(res.records.back().residual < cfg.steady_tol);
    CHECK(admissible(res.u, gas));
    // records are well formed
    for (std::size_t k = 0; k < res.records.size(); ++k) {
      CHECK(res.records[k].step == static_cast<int>(k) + 1);
      CHECK(std::isfinite(res.records[k].residual));
      CHECK(res.records[k].dt > 0.0);
      CHECK(res.records[k].omega >= 0.5);
      CHECK(res.records[k].omega <= 1.0);
    }
  }
}

TEST_CASE("underrelaxation stays admissible by convexity") {
  testing::RandomStates rnd(113);
  for (int k = 0; k < 2000; ++k) {
    const State a = rnd.admissible(gas);
    const State b = rnd.admissible(gas);
    const double w = rnd.uniform(1e-6, 1.0);
    CHECK(admissible(a + w * (b - a), gas, 1e-13 * std::max(max_abs(a), max_abs(b))));
  }
}

TEST_CASE("all-zero viscosity is rejected") {
  const Mesh mesh = generate_channel(3, 2, 0.0, 1.0, flat_walls());
  const DiscreteOperators ops = assemble(mesh);
  EdgeCoefficients edge;
  edge.sum_d.assign(ops.n, 0.0);
  CHECK_THROWS_AS(compute_dt(edge, ops, 1.0), AllZeroViscosity);
}

TEST_CASE("frozen Jacobian still reaches an admissible iterate") {
  const Mesh strip = generate_periodic_strip(6, 6, 1.0, 1.0);
  const DiscreteOperators ops = apply_periodic(assemble(strip), strip.periodic);
  StateField u(ops.n);
  for (int i = 0; i < ops.n; ++i) {
    const int col = i % 6;
    if (col < 2) u[i] = primitive_to_conserved(2.0, {6.0, 0.0}, 2.0, gas);
    else if (col == 2) u[i] = primitive_to_conserved(2e-5, {0.0, 0.0}, 1e-7, gas);
    else u[i] = primitive_to_conserved(2.0, {-6.0, 0.0}, 2.0, gas);
  }
  SolverConfig cfg;
  cfg.lin_tol = 1e-12;
  cfg.lin_max_iter = 2000;
  cfg.max_newton_iters = 50;
  cfg.freeze_jacobian_after_first = true;
  const EdgeCoefficients e = compute_edge_coefficients(u, ops, gas);
  const NewtonResult r = newton_step(u, compute_dt(e, ops, 5.0), ops, {}, gas, cfg);
  CHECK(admissible(r.u, gas));
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.omega_fixed = 1.5;
  CHECK_THROWS_MATCHES(cfg.validate(), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("omega")));
  cfg = {};
  cfg.omega_candidates = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.steady_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}
