#pragma once

#include <cmath>
#include <map>
#include <string>

#include "mcl2d/low_order.hpp"
#include "mcl2d/mesh.hpp"
#include "mcl2d/solver.hpp"

// Built-in benchmark definitions: geometry, boundary conditions keyed by
// patch name, free-stream data, and solver defaults.

namespace mcl2d {

struct UnknownCase : Error { using Error::Error; };

// circular-arc bump of radius 1.3: meets y = 0 at x = +-1/2, height 0.1
inline double gamm_lower_wall(double x) {
  if (x < -0.5 || x > 0.5) return 0.0;
  return std::sqrt(1.69 - x * x) - 1.2;
}

// converging-diverging nozzle wall g(x); walls are at +-g(x)
inline double nozzle_wall(double x) {
  if (x <= 0.0 || x > 4.0) return 1.0;
  return (std::cos(0.5 * M_PI * x) + 3.0) / 4.0;
}

// NACA 0012 thickness profile; the chord closes near x = 1.00893
inline double naca0012_surface(double x) {
  const double sq = std::sqrt(x);
  return 0.6 * (0.2969 * sq - 0.126 * x - 0.3516 * x * x + 0.2843 * x * x * x -
                0.1015 * x * x * x * x);
}

constexpr double kNacaChordEnd = 1.00893;

inline State free_stream_state(double mach, double alpha_deg, double rho, double p,
                               const GasModel& g) {
  const double a = alpha_deg * M_PI / 180.0;
  const double speed = mach * std::sqrt(g.gamma * p / rho);
  return primitive_to_conserved(rho, {speed * std::cos(a), speed * std::sin(a)}, p, g);
}

struct BenchmarkCase {
  std::string name;
  double mach = 0.0;
  double alpha_deg = 0.0;
  State free_stream{};

  bool generated = true;  // channel generator vs imported MSH file
  int default_nx = 0, default_ny = 0;
  double x0 = 0.0, x1 = 0.0;
  GeometryMap walls;

  std::map<std::string, BoundaryCondition> patch_bcs;  // by patch name
  SolverConfig solver;
  std::string notes;
};

inline BenchmarkCase builtin(const std::string& name, const GasModel& g = {}) {
  BenchmarkCase c;
  c.name = name;

  const auto channel_bcs = [&](const BoundaryCondition& outlet) {
    c.patch_bcs = {{"inlet", BoundaryCondition::farfield(c.free_stream, g)},
                   {"outlet", outlet},
                   {"lower_wall", BoundaryCondition::reflecting_wall()},
                   {"upper_wall", BoundaryCondition::reflecting_wall()}};
  };

  if (name == "gamm") {
    c.mach = 0.67;
    c.free_stream = free_stream_state(c.mach, 0.0, 1.0, 1.0 / g.gamma, g);
    c.default_nx = 60;
    c.default_ny = 20;
    c.x0 = -1.0;
    c.x1 = 1.0;
    c.walls = {gamm_lower_wall, [](double) { return 1.0; }};
    channel_bcs(BoundaryCondition::subsonic_outlet(1.0 / g.gamma));
    c.notes = "transonic channel flow; supersonic pocket over the bump";
  } else if (name == "nozzle_subsonic") {
    c.mach = 0.2;
    c.free_stream = free_stream_state(c.mach, 0.0, 1.0, 1.0 / g.gamma, g);
    c.default_nx = 50;
    c.default_ny = 10;
    c.x0 = -2.0;
    c.x1 = 8.0;
    c.walls = {[](double x) { return -nozzle_wall(x); }, nozzle_wall};
    channel_bcs(BoundaryCondition::subsonic_outlet(1.0 / g.gamma));
    c.notes = "stiff low-Mach flow, smooth solution";
  } else if (name == "nozzle_transonic_shock") {
    c.mach = 0.3;
    // literature setup: p_inf = 1 instead of 1/gamma, so v_inf = sqrt(gamma) M
    c.free_stream = free_stream_state(c.mach, 0.0, 1.0, 1.0, g);
    c.default_nx = 50;
    c.default_ny = 10;
    c.x0 = -2.0;
    c.x1 = 8.0;
    c.walls = {[](double x) { return -nozzle_wall(x); }, nozzle_wall};
    channel_bcs(BoundaryCondition::subsonic_outlet(2.0 / 3.0));
    c.notes = "sonic shock in the diverging part; p_out = 2/3";
  } else if (name == "nozzle_transonic_supout") {
    c.mach = 0.8;
    c.free_stream = free_stream_state(c.mach, 0.0, 1.0, 1.0 / g.gamma, g);
    c.default_nx = 50;
    c.default_ny = 10;
    c.x0 = -2.0;
    c.x1 = 8.0;
    c.walls = {[](double x) { return -nozzle_wall(x); }, nozzle_wall};
    channel_bcs(BoundaryCondition::supersonic_outlet());
    c.notes = "diamond-shaped shocks, supersonic outlet";
  } else if (name == "naca_subsonic" || name == "naca_transonic") {
    const bool transonic = name == "naca_transonic";
    c.mach = transonic ? 0.8 : 0.5;
    c.alpha_deg = transonic ? 1.25 : 0.0;
    c.free_stream = free_stream_state(c.mach, c.alpha_deg, 1.0, 1.0 / g.gamma, g);
    c.generated = false;
    c.patch_bcs = {{"farfield", BoundaryCondition::farfield(c.free_stream, g)},
                   {"airfoil", BoundaryCondition::reflecting_wall()}};
    c.notes =
        "external flow over a NACA 0012 airfoil; requires an MSH mesh with "
        "patches 'farfield' (circle of radius 10) and 'airfoil'";
  } else if (name == "bowshock") {
    c.mach = 20.0;
    c.free_stream = free_stream_state(c.mach, 0.0, 1.0, 1.0 / g.gamma, g);
    c.generated = false;
    c.patch_bcs = {{"inlet", BoundaryCondition::farfield(c.free_stream, g)},
                   {"outlet", BoundaryCondition::supersonic_outlet()},
                   {"cylinder", BoundaryCondition::reflecting_wall()}};
    c.solver.cfl_warmup = 10.0;
    c.notes =
        "hypersonic flow around a half-cylinder of unit radius; requires an "
        "MSH mesh with patches 'inlet', 'outlet', 'cylinder'";
  } else {
    throw UnknownCase("unknown case '" + name + "'");
  }
  return c;
}

inline const std::vector<std::string>& builtin_case_names() {
  static const std::vector<std::string> names = {
      "gamm",          "nozzle_subsonic", "nozzle_transonic_shock",
      "nozzle_transonic_supout", "naca_subsonic",   "naca_transonic",
      "bowshock"};
  return names;
}

// patch-name keyed conditions resolved onto the mesh's patch ids
inline BcTable resolve_bcs(const BenchmarkCase& c, const Mesh& mesh) {
  BcTable bcs;
  for (const auto& [id, name] : mesh.patch_names) {
    const auto it = c.patch_bcs.find(name);
    if (it == c.patch_bcs.end())
      throw ValidationError("mesh patch '" + name + "' has no boundary condition in case '" +
                            c.name + "'");
    bcs[id] = it->second;
  }
  for (const auto& e : mesh.boundary_edges)
    if (bcs.find(e.patch) == bcs.end())
      throw ValidationError("boundary edge patch " + std::to_string(e.patch) +
                            " carries no physical name");
  return bcs;
}

}  // namespace mcl2d
