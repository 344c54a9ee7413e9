// Command-line driver: run benchmark cases or custom configs to steady
// state, inspect meshes, and execute the randomized property suites.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mcl2d/checks.hpp"
#include "mcl2d/io.hpp"

namespace fs = std::filesystem;
using namespace mcl2d;

namespace {

int execute_run(RunConfig cfg) {
  if (const char* env = std::getenv("MCL2D_OUTPUT_DIR")) cfg.output_dir = env;
  cfg.validate();
  cfg.solver.record_wall_time = !cfg.deterministic;

  RunSetup setup = prepare_run(cfg);
  std::printf("case %s: %d nodes, %d triangles, M_inf = %g\n", cfg.case_name.c_str(),
              setup.ops.n, setup.mesh.num_triangles(), setup.bench.mach);

  fs::create_directories(cfg.output_dir);
  const fs::path out_dir(cfg.output_dir);

  StepHook cadence;
  if (cfg.output_every > 0) {
    cadence = [&](int step, const StateField& u) {
      if (step % cfg.output_every != 0) return;
      char name[64];
      std::snprintf(name, sizeof(name), "fields_%06d.vtk", step);
      write_vtk(setup.mesh, u, cfg.gas, (out_dir / name).string());
    };
  }

  const SteadyResult res =
      run_to_steady(setup.u0, cfg.solver, setup.ops, setup.bcs, cfg.gas, {}, cadence);

  write_vtk(setup.mesh, res.u, cfg.gas, (out_dir / "fields.vtk").string());
  if (!res.records.empty())
    write_convergence_csv(res.records, (out_dir / "convergence.csv").string());

  const double final_r = res.records.empty() ? 0.0 : res.records.back().residual;
  switch (res.reason) {
    case StopReason::converged:
      std::printf("converged after %d pseudo-time steps, r(u) = %.3e\n", res.steps,
                  final_r);
      return 0;
    case StopReason::max_steps:
      std::printf("not stationary after %d steps, r(u) = %.3e\n", res.steps, final_r);
      return 2;
    case StopReason::diverged:
      std::printf("diverged after %d steps, r(u) = %.3e\n", res.steps, final_r);
      return 2;
  }
  return 1;
}

int run_from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    std::fprintf(stderr, "error: cannot open config '%s'\n", path.c_str());
    return 1;
  }
  return execute_run(parse_config(f));
}

int mesh_info(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    std::fprintf(stderr, "error: cannot open mesh '%s'\n", path.c_str());
    return 1;
  }
  const Mesh mesh = read_gmsh(f);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Vec2& v : mesh.vertices) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  std::printf("vertices:  %d\n", mesh.num_vertices());
  std::printf("triangles: %d\n", mesh.num_triangles());
  std::printf("area:      %.12g\n", mesh.total_area());
  std::printf("bbox:      [%g, %g] x [%g, %g]\n", xmin, xmax, ymin, ymax);
  std::map<int, int> edge_count;
  for (const auto& e : mesh.boundary_edges) edge_count[e.patch] += 1;
  for (const auto& [id, count] : edge_count) {
    const auto it = mesh.patch_names.find(id);
    std::printf("patch %d (%s): %d boundary edges\n", id,
                it != mesh.patch_names.end() ? it->second.c_str() : "unnamed", count);
  }
  return 0;
}

int run_checks(unsigned long long seed) {
  bool all = true;
  for (const CheckResult& c : run_property_checks(seed)) {
    std::printf("[%s] %s (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady compressible-Euler solver with monolithic convex limiting"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a config file to steady state");
  run_cmd->add_option("config", config_path, "path to a run config")->required();

  std::string case_name, mesh_path, omega_arg, out_dir;
  int nx = 0, ny = 0, steps = 0, every = 0;
  double cfl = 0.0, tol = 0.0, gamma = 0.0;
  bool deep = false, deterministic = false, freeze = false;
  auto* case_cmd = app.add_subcommand("case", "run a built-in benchmark case");
  case_cmd
      ->add_option("name", case_name,
                   "one of: gamm, nozzle_subsonic, nozzle_transonic_shock, "
                   "nozzle_transonic_supout, naca_subsonic, naca_transonic, bowshock")
      ->required();
  case_cmd->add_option("--mesh", mesh_path,
                       "MSH 2.2 mesh file (required for naca/bowshock)");
  case_cmd->add_option("--nx", nx, "channel resolution in x");
  case_cmd->add_option("--ny", ny, "channel resolution in y");
  case_cmd->add_option("--cfl", cfl, "target CFL number");
  case_cmd->add_option("--omega", omega_arg, "'adaptive' or a fixed factor in (0,1]");
  case_cmd->add_option("--steps", steps, "maximum pseudo-time steps");
  case_cmd->add_option("--tol", tol, "stationarity tolerance");
  case_cmd->add_flag("--deep", deep, "run to the deep-convergence tolerance");
  case_cmd->add_option("--out", out_dir, "output directory");
  case_cmd->add_option("--every", every, "write VTK fields every N steps");
  case_cmd->add_flag("--deterministic", deterministic, "bitwise-reproducible logs");
  case_cmd->add_flag("--freeze-jacobian", freeze, "reuse J_L(u^n) in later iterations");
  case_cmd->add_option("--gamma", gamma, "adiabatic constant");

  std::string mesh_info_path;
  auto* mesh_cmd = app.add_subcommand("mesh-info", "inspect an MSH 2.2 mesh file");
  mesh_cmd->add_option("path", mesh_info_path, "mesh file")->required();

  unsigned long long seed = 12345;
  auto* check_cmd = app.add_subcommand("check", "run the randomized property suites");
  check_cmd->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run_from_file(config_path);
    if (*mesh_cmd) return mesh_info(mesh_info_path);
    if (*check_cmd) return run_checks(seed);

    RunConfig cfg;
    cfg.case_name = case_name;
    cfg.mesh_path = mesh_path;
    cfg.nx = nx;
    cfg.ny = ny;
    if (gamma > 0.0) cfg.gas.gamma = gamma;
    cfg.solver = builtin(case_name, cfg.gas).solver;
    if (cfl > 0.0) cfg.solver.cfl_target = cfl;
    if (steps > 0) cfg.solver.max_pseudo_steps = steps;
    if (tol > 0.0) cfg.solver.steady_tol = tol;
    cfg.solver.deep_convergence = deep;
    cfg.solver.freeze_jacobian_after_first = freeze;
    if (!omega_arg.empty() && omega_arg != "adaptive") {
      cfg.solver.omega_mode = SolverConfig::OmegaMode::fixed;
      cfg.solver.omega_fixed = std::stod(omega_arg);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.output_every = every;
    cfg.deterministic = deterministic;
    return execute_run(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
