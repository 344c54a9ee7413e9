#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mcl2d/cases.hpp"
#include "mcl2d/solver.hpp"

// Run configuration (flat INI-style sections), legacy-VTK field export and
// CSV convergence logs.

namespace mcl2d {

struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct RunConfig {
  std::string case_name = "gamm";
  std::string mesh_path;  // required for imported cases, optional override
  int nx = 0, ny = 0;     // 0 keeps the case default
  GasModel gas;
  SolverConfig solver;
  std::string output_dir = "out";
  int output_every = 0;  // VTK cadence; 0 writes the final state only
  bool deterministic = false;
  int threads = 1;

  void validate() const {
    if (!(gas.gamma > 1.0)) throw ValidationError("run config: invalid gamma");
    if (nx < 0 || ny < 0) throw ValidationError("run config: invalid nx/ny");
    if (output_every < 0) throw ValidationError("run config: invalid every");
    if (threads < 1) throw ValidationError("run config: invalid threads");
    solver.validate();
  }
};

// --------------------------------------------------------------------------
// key = value parser over [case] / [solver] / [output] sections

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;

  auto fail = [&](const std::string& what) {
    throw ParseError("config line " + std::to_string(lineno) + ": " + what);
  };
  auto to_double = [&](const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) fail("bad number '" + v + "'");
      return d;
    } catch (const ParseError&) {
      throw;
    } catch (...) {
      fail("bad number '" + v + "'");
      return 0.0;
    }
  };
  auto to_int = [&](const std::string& v) {
    const double d = to_double(v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail("expected integer, got '" + v + "'");
    return i;
  };
  auto to_bool = [&](const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("expected boolean, got '" + v + "'");
    return false;
  };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "case" && section != "solver" && section != "output")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) fail("empty key or value");

    if (section == "case") {
      if (key == "name") cfg.case_name = val;
      else if (key == "mesh") cfg.mesh_path = val;
      else if (key == "nx") cfg.nx = to_int(val);
      else if (key == "ny") cfg.ny = to_int(val);
      else if (key == "gamma") cfg.gas.gamma = to_double(val);
      else fail("unknown key '" + key + "' in [case]");
    } else if (section == "solver") {
      SolverConfig& s = cfg.solver;
      if (key == "cfl_target") s.cfl_target = to_double(val);
      else if (key == "cfl_warmup") s.cfl_warmup = to_double(val);
      else if (key == "warmup_exit_ratio") s.warmup_exit_ratio = to_double(val);
      else if (key == "omega_mode") {
        if (val == "fixed") s.omega_mode = SolverConfig::OmegaMode::fixed;
        else if (val == "adaptive") s.omega_mode = SolverConfig::OmegaMode::adaptive;
        else fail("omega_mode must be fixed or adaptive");
      } else if (key == "omega") s.omega_fixed = to_double(val);
      else if (key == "omega_candidates") s.omega_candidates = to_int(val);
      else if (key == "omega_floor") s.omega_floor = to_double(val);
      else if (key == "steady_tol") s.steady_tol = to_double(val);
      else if (key == "hard_tol") s.hard_tol = to_double(val);
      else if (key == "deep_convergence") s.deep_convergence = to_bool(val);
      else if (key == "max_pseudo_steps") s.max_pseudo_steps = to_int(val);
      else if (key == "max_newton_iters") s.max_newton_iters = to_int(val);
      else if (key == "freeze_jacobian") s.freeze_jacobian_after_first = to_bool(val);
      else if (key == "idp_slack") s.idp_slack = to_double(val);
      else if (key == "lin_tol") s.lin_tol = to_double(val);
      else if (key == "lin_max_iter") s.lin_max_iter = to_int(val);
      else fail("unknown key '" + key + "' in [solver]");
    } else if (section == "output") {
      if (key == "dir") cfg.output_dir = val;
      else if (key == "every") cfg.output_every = to_int(val);
      else if (key == "deterministic") cfg.deterministic = to_bool(val);
      else if (key == "threads") cfg.threads = to_int(val);
      else fail("unknown key '" + key + "' in [output]");
    } else {
      fail("key outside of any section");
    }
  }
  cfg.validate();
  return cfg;
}

// --------------------------------------------------------------------------
// Legacy VTK ASCII export: density/pressure/mach point scalars + velocity

inline void write_vtk(const Mesh& mesh, const StateField& u, const GasModel& g,
                      std::ostream& out) {
  if (static_cast<int>(u.size()) != mesh.num_vertices())
    throw IoError("write_vtk: state size does not match the mesh");
  char buf[128];
  out << "# vtk DataFile Version 3.0\nmcl2d steady fields\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g 0\n", v.x, v.y);
    out << buf;
  }
  out << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int i = 0; i < mesh.num_triangles(); ++i) out << "5\n";

  out << "POINT_DATA " << mesh.num_vertices() << "\n";
  const auto scalar = [&](const char* name, auto&& f) {
    out << "SCALARS " << name << " double\nLOOKUP_TABLE default\n";
    for (const State& s : u) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", f(s));
      out << buf;
    }
  };
  scalar("density", [](const State& s) { return s.rho; });
  scalar("pressure", [&](const State& s) { return pressure(s, g); });
  scalar("mach", [&](const State& s) { return mach_number(s, g); });
  out << "VECTORS velocity double\n";
  for (const State& s : u) {
    const Vec2 v = velocity(s);
    std::snprintf(buf, sizeof(buf), "%.17g %.17g 0\n", v.x, v.y);
    out << buf;
  }
  if (!out) throw IoError("write_vtk: stream failure");
}

inline void write_vtk(const Mesh& mesh, const StateField& u, const GasModel& g,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_vtk: cannot open " + path);
  write_vtk(mesh, u, g, f);
}

// --------------------------------------------------------------------------
// CSV convergence log, full double precision

inline void write_convergence_csv(const std::vector<ConvergenceRecord>& records,
                                  std::ostream& out) {
  if (records.empty()) throw IoError("write_convergence_csv: no records");
  out << "step,dt,residual,entropy_residual,omega,newton_iters,linear_iters,wall_ms\n";
  char buf[256];
  for (const ConvergenceRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g\n", r.step,
                  r.dt, r.residual, r.entropy_residual, r.omega, r.newton_iters,
                  r.linear_iters, r.wall_ms);
    out << buf;
  }
  if (!out) throw IoError("write_convergence_csv: stream failure");
}

inline void write_convergence_csv(const std::vector<ConvergenceRecord>& records,
                                  const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_convergence_csv: cannot open " + path);
  write_convergence_csv(records, f);
}

// --------------------------------------------------------------------------
// Orchestration shared by the CLI subcommands

struct RunSetup {
  BenchmarkCase bench;
  Mesh mesh;
  DiscreteOperators ops;
  BcTable bcs;
  StateField u0;
};

inline RunSetup prepare_run(const RunConfig& cfg) {
  RunSetup s;
  s.bench = builtin(cfg.case_name, cfg.gas);

  if (!cfg.mesh_path.empty()) {
    std::ifstream f(cfg.mesh_path);
    if (!f) throw IoError("cannot open mesh file " + cfg.mesh_path);
    s.mesh = read_gmsh(f);
  } else if (s.bench.generated) {
    const int nx = cfg.nx > 0 ? cfg.nx : s.bench.default_nx;
    const int ny = cfg.ny > 0 ? cfg.ny : s.bench.default_ny;
    s.mesh = generate_channel(nx, ny, s.bench.x0, s.bench.x1, s.bench.walls);
  } else {
    throw ValidationError("case '" + cfg.case_name +
                          "' uses an imported mesh: pass a mesh path");
  }

  s.ops = assemble(s.mesh);
  if (!s.mesh.periodic.empty()) s.ops = apply_periodic(s.ops, s.mesh.periodic);
  s.bcs = resolve_bcs(s.bench, s.mesh);
  s.u0.assign(s.ops.n, s.bench.free_stream);  // free-stream fill
  return s;
}

}  // namespace mcl2d
