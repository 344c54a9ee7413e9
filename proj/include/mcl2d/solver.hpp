#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mcl2d/krylov.hpp"
#include "mcl2d/limiter.hpp"

// Pseudo-time stepping to steady state: CFL-based step size, deferred
// correction with the low-order Jacobian and the IDP stopping criterion,
// the Psi^s verification iteration, and explicit underrelaxation with
// entropy-residual-minimizing adaptive factors.

namespace mcl2d {

struct ValidationError : Error { using Error::Error; };
struct AllZeroViscosity : Error { using Error::Error; };
struct MaxNewtonIterExceeded : Error { using Error::Error; };
struct NonContractive : Error { using Error::Error; };

struct SolverConfig {
  double cfl_target = 1e4;
  double cfl_warmup = 10.0;
  double warmup_exit_ratio = 0.1;

  enum class OmegaMode { fixed, adaptive };
  OmegaMode omega_mode = OmegaMode::adaptive;
  double omega_fixed = 0.5;
  int omega_candidates = 3;   // K
  double omega_floor = 0.5;   // omega_0

  double steady_tol = 1e-8;
  double hard_tol = 1e-13;
  bool deep_convergence = false;  // gate on hard_tol instead of steady_tol

  int max_pseudo_steps = 2000;
  int max_newton_iters = 10;
  bool freeze_jacobian_after_first = false;
  double idp_slack = 0.0;

  double lin_tol = 1e-8;
  int lin_max_iter = 500;

  bool record_wall_time = true;  // off for bitwise-reproducible logs

  void validate() const {
    auto bad = [](const std::string& field) {
      throw ValidationError("solver config: invalid " + field);
    };
    if (!(cfl_target > 0.0)) bad("cfl_target");
    if (!(cfl_warmup > 0.0)) bad("cfl_warmup");
    if (!(warmup_exit_ratio > 0.0 && warmup_exit_ratio <= 1.0)) bad("warmup_exit_ratio");
    if (!(omega_fixed > 0.0 && omega_fixed <= 1.0)) bad("omega");
    if (omega_candidates < 2) bad("omega_candidates");
    if (!(omega_floor > 0.0 && omega_floor < 1.0)) bad("omega_floor");
    if (!(steady_tol > 0.0)) bad("steady_tol");
    if (!(hard_tol > 0.0)) bad("hard_tol");
    if (max_pseudo_steps < 1) bad("max_pseudo_steps");
    if (max_newton_iters < 1) bad("max_newton_iters");
    if (idp_slack < 0.0) bad("idp_slack");
    if (!(lin_tol > 0.0)) bad("lin_tol");
    if (lin_max_iter < 1) bad("lin_max_iter");
  }

  double stop_tol() const { return deep_convergence ? hard_tol : steady_tol; }
};

struct ConvergenceRecord {
  int step = 0;
  double dt = 0.0;
  double residual = 0.0;          // r(u) = || M_L^-1 R*_inf(u) ||_2h
  double entropy_residual = 0.0;  // || R*_eta(u) ||_2h
  double omega = 1.0;
  int newton_iters = 0;
  int linear_iters = 0;
  double wall_ms = 0.0;
};

// --------------------------------------------------------------------------
// Discrete norms: ||w||_2h = sqrt(w^T M_C w), extended componentwise to
// block vectors.

inline double l2h_norm(const DiscreteOperators& ops, const std::vector<double>& w) {
  double q = 0.0;
  for (int i = 0; i < ops.n; ++i)
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k)
      q += ops.mass[k] * w[i] * w[ops.col_idx[k]];
  return std::sqrt(std::max(0.0, q));
}

inline double l2h_norm(const DiscreteOperators& ops, const StateField& w) {
  double q = 0.0;
  for (int i = 0; i < ops.n; ++i)
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k)
      q += ops.mass[k] * dot(w[i], w[ops.col_idx[k]]);
  return std::sqrt(std::max(0.0, q));
}

// --------------------------------------------------------------------------
// Pseudo-time step from the CFL formula max_i (2 dt / m_i) sum_j d_ij = CFL

inline double compute_dt(const EdgeCoefficients& edge, const DiscreteOperators& ops,
                         double cfl) {
  double worst = 0.0;
  for (int i = 0; i < ops.n; ++i)
    worst = std::max(worst, 2.0 * edge.sum_d[i] / ops.lumped[i]);
  if (!(worst > 0.0)) throw AllZeroViscosity("compute_dt: no viscosity anywhere");
  return cfl / worst;
}

// --------------------------------------------------------------------------
// Residuals

// R*_dt(u) = M_L (u^n - u) + dt [R_L(u) + F*(u)]
inline StateField step_residual(const StateField& u, const StateField& u_n, double dt,
                                const DiscreteOperators& ops,
                                const EdgeCoefficients& edge, const BcTable& bcs,
                                const GasModel& g) {
  StateField r = low_order_residual(u, ops, edge, bcs, g);
  const StateField fstar = corrected_antidiffusion(u, ops, edge, bcs, g);
  for (int i = 0; i < ops.n; ++i)
    r[i] = ops.lumped[i] * (u_n[i] - u[i]) + dt * (r[i] + fstar[i]);
  return r;
}

inline StateField step_residual(const StateField& u, const StateField& u_n, double dt,
                                const DiscreteOperators& ops, const BcTable& bcs,
                                const GasModel& g) {
  return step_residual(u, u_n, dt, ops, compute_edge_coefficients(u, ops, g), bcs, g);
}

struct ResidualNorms {
  double r = 0.0;    // || M_L^-1 R*_inf ||_2h
  double eta = 0.0;  // entropy residual norm, NaN if v(u) is undefined somewhere
};

inline ResidualNorms residual_norms(const StateField& u, const DiscreteOperators& ops,
                                    const EdgeCoefficients& edge, const BcTable& bcs,
                                    const GasModel& g) {
  StateField w = low_order_residual(u, ops, edge, bcs, g);
  const StateField fstar = corrected_antidiffusion(u, ops, edge, bcs, g);
  for (int i = 0; i < ops.n; ++i) w[i] = (w[i] + fstar[i]) / ops.lumped[i];

  ResidualNorms out;
  out.r = l2h_norm(ops, w);
  std::vector<double> eta(ops.n, 0.0);
  bool defined = true;
  for (int i = 0; i < ops.n && defined; ++i) {
    try {
      eta[i] = dot(entropy_variables(u[i], g), w[i]);
    } catch (const NonPositiveThermodynamicState&) {
      defined = false;
    }
  }
  out.eta = defined ? l2h_norm(ops, eta) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// (R*_eta)_i = v(u_i) . (M_L^-1 R*_inf(u))_i contracted into the L2h norm
inline double entropy_residual_norm(const StateField& u, const DiscreteOperators& ops,
                                    const EdgeCoefficients& edge, const BcTable& bcs,
                                    const GasModel& g) {
  const ResidualNorms n = residual_norms(u, ops, edge, bcs, g);
  if (std::isnan(n.eta)) {
    for (int i = 0; i < ops.n; ++i)
      if (!(u[i].rho > 0.0) || !(pressure(u[i], g) > 0.0))
        throw NonPositiveThermodynamicState(
            "entropy_residual_norm: rho or p not positive at node " +
            std::to_string(i));
  }
  return n.eta;
}

inline double entropy_residual_norm(const StateField& u, const DiscreteOperators& ops,
                                    const BcTable& bcs, const GasModel& g) {
  return entropy_residual_norm(u, ops, compute_edge_coefficients(u, ops, g), bcs, g);
}

inline double steady_residual_norm(const StateField& u, const DiscreteOperators& ops,
                                   const BcTable& bcs, const GasModel& g) {
  return residual_norms(u, ops, compute_edge_coefficients(u, ops, g), bcs, g).r;
}

// --------------------------------------------------------------------------
// Deferred-correction quasi-Newton step with IDP stopping criterion

struct NewtonResult {
  StateField u;
  int iterations = 0;
  int linear_iters = 0;
  double dt = 0.0;  // possibly halved
  int halvings = 0;
};

using IterateHook = std::function<void(const StateField&)>;

namespace detail {

// One sweep of fixed-point iterations at a given dt. With fixpoint_tol = 0
// the IDP property is the stopping criterion; otherwise iterate until the
// update stalls below fixpoint_tol * scale(u_n) (used by cross-checks).
inline bool newton_sweep(const StateField& u_n, double dt, const DiscreteOperators& ops,
                         const BcTable& bcs, const GasModel& g, const SolverConfig& cfg,
                         double fixpoint_tol, const IterateHook& hook,
                         NewtonResult& out) {
  StateField u = u_n;
  BlockSparseMatrix jac;
  const double scale = std::max(1.0, max_abs(u_n));
  const int max_iters = fixpoint_tol > 0.0 ? 200 : cfg.max_newton_iters;

  for (int k = 0; k < max_iters; ++k) {
    StateField du;
    try {
      const EdgeCoefficients edge = compute_edge_coefficients(u, ops, g);
      const StateField r = step_residual(u, u_n, dt, ops, edge, bcs, g);
      if (k == 0 || !cfg.freeze_jacobian_after_first)
        jac = assemble_jacobian(u, ops, edge, bcs, dt, g);
      auto [sol, rep] = solve(jac, r, StateField(ops.n), cfg.lin_tol, cfg.lin_max_iter);
      du = std::move(sol);
      out.linear_iters += rep.iterations;
    } catch (const InadmissibleState&) {
      return false;  // iterate too far outside G to evaluate: halve dt
    } catch (const ZeroViscosityEdge&) {
      return false;
    } catch (const DegenerateBarDensity&) {
      return false;
    } catch (const NonPositiveDensity&) {
      return false;
    } catch (const VacuumWithMomentum&) {
      return false;
    }
    for (int i = 0; i < ops.n; ++i) u[i] += du[i];
    ++out.iterations;
    if (hook) hook(u);
    if (!std::all_of(u.begin(), u.end(), [](const State& s) { return finite(s); }))
      return false;  // blow-up: caller halves dt
    if (fixpoint_tol > 0.0) {
      if (max_abs(du) <= fixpoint_tol * scale && admissible(u, g, cfg.idp_slack)) {
        out.u = u;
        out.dt = dt;
        return true;
      }
    } else if (admissible(u, g, cfg.idp_slack)) {
      out.u = u;
      out.dt = dt;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Updates u^(k+1) = u^(k) + J_L(u^(k))^-1 R*_dt(u^(k)) until the iterate is
// admissible. If max_newton_iters never yields an IDP state, dt is halved
// and the sweep restarted, up to 5 times.
inline NewtonResult newton_step(const StateField& u_n, double dt,
                                const DiscreteOperators& ops, const BcTable& bcs,
                                const GasModel& g, const SolverConfig& cfg,
                                const IterateHook& hook = {}) {
  NewtonResult out;
  double dt_try = dt;
  for (int halving = 0; halving <= 5; ++halving) {
    out.halvings = halving;
    if (detail::newton_sweep(u_n, dt_try, ops, bcs, g, cfg, 0.0, hook, out)) return out;
    dt_try *= 0.5;
  }
  throw MaxNewtonIterExceeded("newton_step: no admissible iterate after 5 dt halvings");
}

// Same iteration driven to a fixed point (verification use)
inline NewtonResult newton_fixed_point(const StateField& u_n, double dt,
                                       const DiscreteOperators& ops, const BcTable& bcs,
                                       const GasModel& g, const SolverConfig& cfg,
                                       double tol = 1e-13) {
  NewtonResult out;
  if (!detail::newton_sweep(u_n, dt, ops, bcs, g, cfg, tol, {}, out))
    throw MaxNewtonIterExceeded("newton_fixed_point: did not reach a fixed point");
  return out;
}

// --------------------------------------------------------------------------
// Psi^s fixed-point iteration (IDP by construction under the CFL-like
// condition s dt/m_i sum_j 2 d_ij <= 1)

struct PsiResult {
  StateField u;
  int iterations = 0;
  bool converged = false;
  std::vector<double> increments;  // max-norm of successive updates
};

inline PsiResult psi_s_iterate(const StateField& u_n, double s, double dt,
                               const DiscreteOperators& ops, const BcTable& bcs,
                               const GasModel& g, int max_iter = 100000,
                               double idp_slack = 0.0) {
  PsiResult out;
  StateField u = u_n;
  const double scale = std::max(1.0, max_abs(u_n));
  double prev_inc = -1.0;
  int bad_streak = 0;

  for (int k = 0; k < max_iter; ++k) {
    const EdgeCoefficients edge = compute_edge_coefficients(u, ops, g);
    StateField rl = low_order_residual(u, ops, edge, bcs, g);
    const StateField fstar = corrected_antidiffusion(u, ops, edge, bcs, g);
    StateField next(ops.n);
    for (int i = 0; i < ops.n; ++i) {
      const State gamma_i = u[i] + (s * dt / ops.lumped[i]) * (rl[i] + fstar[i]);
      next[i] = (s / (1.0 + s)) * u_n[i] + (1.0 / (1.0 + s)) * gamma_i;
    }
    if (!admissible(next, g, idp_slack))
      throw InadmissibleState("psi_s_iterate: iterate left the invariant domain");

    double inc = 0.0;
    for (int i = 0; i < ops.n; ++i) inc = std::max(inc, max_abs(next[i] - u[i]));
    out.increments.push_back(inc);
    u = next;
    ++out.iterations;

    if (inc < 1e-12 * scale) {
      out.converged = true;
      break;
    }
    if (prev_inc >= 0.0) {
      bad_streak = inc >= prev_inc ? bad_streak + 1 : 0;
      if (bad_streak >= 50)
        throw NonContractive("psi_s_iterate: increments non-decreasing for 50 steps");
    }
    prev_inc = inc;
  }
  out.u = u;
  return out;
}

// --------------------------------------------------------------------------
// Explicit underrelaxation: candidate set omega_K and the entropy-residual
// minimizer, ties broken toward the largest factor.

inline std::vector<double> omega_candidates(int K, double omega0) {
  std::vector<double> c(K);
  for (int k = 1; k <= K; ++k)
    c[k - 1] = omega0 + (k - 1) * (1.0 - omega0) / (K - 1);
  return c;
}

struct OmegaChoice {
  double omega = 1.0;
  ResidualNorms norms;  // of u^n + omega du
};

inline OmegaChoice choose_omega(const StateField& u_n, const StateField& du,
                                const SolverConfig& cfg, const DiscreteOperators& ops,
                                const BcTable& bcs, const GasModel& g) {
  const std::vector<double> cand = omega_candidates(cfg.omega_candidates, cfg.omega_floor);
  OmegaChoice best;
  best.omega = cand.back();
  best.norms.r = best.norms.eta = std::numeric_limits<double>::quiet_NaN();
  double best_eta = std::numeric_limits<double>::infinity();
  for (const double w : cand) {
    StateField uc(u_n.size());
    for (std::size_t i = 0; i < u_n.size(); ++i) uc[i] = u_n[i] + w * du[i];
    ResidualNorms norms;
    try {
      norms = residual_norms(uc, ops, compute_edge_coefficients(uc, ops, g), bcs, g);
    } catch (const InadmissibleState&) {
      continue;  // candidate state not evaluable
    } catch (const ZeroViscosityEdge&) {
      continue;
    } catch (const DegenerateBarDensity&) {
      continue;
    }
    const double eta = std::isnan(norms.eta)
                           ? std::numeric_limits<double>::infinity()
                           : norms.eta;
    if (eta <= best_eta) {  // ties go to the larger omega (candidates ascend)
      best_eta = eta;
      best.omega = w;
      best.norms = norms;
    }
  }
  return best;
}

// --------------------------------------------------------------------------
// Outer pseudo-time loop

enum class StopReason { converged, max_steps, diverged };

struct SteadyResult {
  StateField u;
  std::vector<ConvergenceRecord> records;
  StopReason reason = StopReason::max_steps;
  int steps = 0;
};

using StepHook = std::function<void(int, const StateField&)>;

inline SteadyResult run_to_steady(const StateField& u0, const SolverConfig& cfg,
                                  const DiscreteOperators& ops, const BcTable& bcs,
                                  const GasModel& g, const IterateHook& newton_hook = {},
                                  const StepHook& step_hook = {}) {
  cfg.validate();
  if (!admissible(u0, g, cfg.idp_slack))
    throw InadmissibleState("run_to_steady: initial state not admissible");

  SteadyResult out;
  out.u = u0;
  const double tol = cfg.stop_tol();

  double r_prev = steady_residual_norm(u0, ops, bcs, g);
  const double r0 = r_prev;
  double r_min = std::max(r_prev, std::numeric_limits<double>::min());
  if (r_prev < tol) {
    out.reason = StopReason::converged;
    return out;
  }

  // warm-up CFL until the relative residual drops, one-way switch
  bool warm = cfg.cfl_target > cfg.cfl_warmup;

  for (int step = 1; step <= cfg.max_pseudo_steps; ++step) {
    const auto t_start = std::chrono::steady_clock::now();
    if (warm && r_prev < cfg.warmup_exit_ratio * r0) warm = false;
    const double cfl = warm ? cfg.cfl_warmup : cfg.cfl_target;

    const EdgeCoefficients edge_n = compute_edge_coefficients(out.u, ops, g);
    const double dt = compute_dt(edge_n, ops, cfl);

    const NewtonResult nres = newton_step(out.u, dt, ops, bcs, g, cfg, newton_hook);
    StateField du(ops.n);
    for (int i = 0; i < ops.n; ++i) du[i] = nres.u[i] - out.u[i];

    OmegaChoice choice;
    if (cfg.omega_mode == SolverConfig::OmegaMode::adaptive) {
      choice = choose_omega(out.u, du, cfg, ops, bcs, g);
    } else {
      choice.omega = cfg.omega_fixed;
      StateField uc(ops.n);
      for (int i = 0; i < ops.n; ++i) uc[i] = out.u[i] + choice.omega * du[i];
      choice.norms = residual_norms(uc, ops, compute_edge_coefficients(uc, ops, g), bcs, g);
    }
    for (int i = 0; i < ops.n; ++i) out.u[i] += choice.omega * du[i];
    out.steps = step;

    if (!admissible(out.u, g, cfg.idp_slack))
      throw InadmissibleState("run_to_steady: accepted state left the invariant domain");

    const double wall_ms =
        cfg.record_wall_time
            ? std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t_start)
                  .count()
            : 0.0;
    out.records.push_back({step, nres.dt, choice.norms.r, choice.norms.eta, choice.omega,
                           nres.iterations, nres.linear_iters, wall_ms});
    if (step_hook) step_hook(step, out.u);

    const double r = choice.norms.r;
    if (!std::isfinite(r) || r > 1e6 * r_min) {
      out.reason = StopReason::diverged;
      return out;
    }
    if (r < tol) {
      out.reason = StopReason::converged;
      return out;
    }
    r_min = std::min(r_min, r);
    r_prev = r;
  }
  out.reason = StopReason::max_steps;
  return out;
}

}  // namespace mcl2d
