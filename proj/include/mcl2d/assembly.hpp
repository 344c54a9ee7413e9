#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "mcl2d/core.hpp"
#include "mcl2d/mesh.hpp"

// Mesh-dependent discrete operators of the P1 CG discretization: consistent
// and lumped mass, c_ij edge vectors, nodal stencils, boundary-edge data.
// All integrals are exact closed-form P1 results, no quadrature.

namespace mcl2d {

struct DegenerateTriangle : Error { using Error::Error; };
struct InconsistentPairing : Error { using Error::Error; };

struct DiscreteOperators {
  int n = 0;

  std::vector<double> lumped;  // m_i = sum_j m_ij

  // CSR over the nodal stencils N_i (diagonal included, columns sorted)
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> mass;  // m_ij
  std::vector<Vec2> c;       // c_ij = int phi_i grad(phi_j)

  struct BoundarySegment {
    double weight = 0.0;  // int_e phi_i ds = |e|/2
    Vec2 normal{};        // constant outward normal of the straight edge
    int patch = 0;
  };
  std::vector<std::vector<BoundarySegment>> boundary;  // per node

  // undirected stencil pairs i < j, the iteration unit of all edge kernels
  struct Pair {
    int i = 0, j = 0;
    double m = 0.0;  // m_ij
    Vec2 c_ij{}, c_ji{};
  };
  std::vector<Pair> pairs;

  // CSR position of (i,j), -1 when j is outside the stencil of i
  int find(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col_idx[k] == j) return k;
    return -1;
  }

  double total_mass() const {
    double s = 0.0;
    for (double m : lumped) s += m;
    return s;
  }

  bool has_boundary() const {
    for (const auto& b : boundary)
      if (!b.empty()) return true;
    return false;
  }
};

namespace detail {

// converts per-row maps into the CSR + pair layout
inline void build_csr(std::vector<std::map<int, std::pair<double, Vec2>>>& rows,
                      DiscreteOperators& ops) {
  const int n = static_cast<int>(rows.size());
  ops.n = n;
  ops.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    ops.row_ptr[i + 1] = ops.row_ptr[i] + static_cast<int>(rows[i].size());
  ops.col_idx.reserve(ops.row_ptr[n]);
  ops.mass.reserve(ops.row_ptr[n]);
  ops.c.reserve(ops.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, entry] : rows[i]) {
      ops.col_idx.push_back(j);
      ops.mass.push_back(entry.first);
      ops.c.push_back(entry.second);
    }
  }
  ops.lumped.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k)
      ops.lumped[i] += ops.mass[k];

  ops.pairs.clear();
  for (int i = 0; i < n; ++i) {
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k) {
      const int j = ops.col_idx[k];
      if (j <= i) continue;
      DiscreteOperators::Pair p;
      p.i = i;
      p.j = j;
      p.m = ops.mass[k];
      p.c_ij = ops.c[k];
      const int kji = ops.find(j, i);
      p.c_ji = kji >= 0 ? ops.c[kji] : Vec2{};
      ops.pairs.push_back(p);
    }
  }
}

}  // namespace detail

inline DiscreteOperators assemble(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  std::vector<std::map<int, std::pair<double, Vec2>>> rows(n);

  for (const auto& t : mesh.triangles) {
    const Vec2 p0 = mesh.vertices[t[0]];
    const Vec2 p1 = mesh.vertices[t[1]];
    const Vec2 p2 = mesh.vertices[t[2]];
    const double area = Mesh::signed_area(p0, p1, p2);
    if (!(area > 0.0)) throw DegenerateTriangle("assemble: triangle area <= 0");

    // constant P1 gradients
    const double inv2a = 1.0 / (2.0 * area);
    const Vec2 grad[3] = {{(p1.y - p2.y) * inv2a, (p2.x - p1.x) * inv2a},
                          {(p2.y - p0.y) * inv2a, (p0.x - p2.x) * inv2a},
                          {(p0.y - p1.y) * inv2a, (p1.x - p0.x) * inv2a}};

    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        auto& entry = rows[t[a]][t[b]];
        entry.first += (a == b) ? area / 6.0 : area / 12.0;
        entry.second += (area / 3.0) * grad[b];
      }
    }
  }

  DiscreteOperators ops;
  detail::build_csr(rows, ops);

  ops.boundary.assign(n, {});
  for (const auto& e : mesh.boundary_edges) {
    const double len = norm(mesh.vertices[e.b] - mesh.vertices[e.a]);
    const Vec2 nrm = boundary_normal(mesh, e);
    ops.boundary[e.a].push_back({0.5 * len, nrm, e.patch});
    ops.boundary[e.b].push_back({0.5 * len, nrm, e.patch});
  }
  return ops;
}

// Merges rows/columns of identified nodes; the result lives on the unique
// representatives and has no boundary data.
inline DiscreteOperators apply_periodic(const DiscreteOperators& ops,
                                        const std::vector<int>& pairing) {
  if (static_cast<int>(pairing.size()) != ops.n)
    throw InconsistentPairing("apply_periodic: pairing size mismatch");
  for (int v = 0; v < ops.n; ++v) {
    if (pairing[v] < 0 || pairing[v] >= ops.n || pairing[pairing[v]] != pairing[v])
      throw InconsistentPairing("apply_periodic: pairing is not idempotent");
  }

  std::vector<int> new_id(ops.n, -1);
  int nu = 0;
  for (int v = 0; v < ops.n; ++v)
    if (pairing[v] == v) new_id[v] = nu++;
  std::vector<int> to_new(ops.n);
  for (int v = 0; v < ops.n; ++v) to_new[v] = new_id[pairing[v]];

  std::vector<std::map<int, std::pair<double, Vec2>>> rows(nu);
  for (int i = 0; i < ops.n; ++i) {
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k) {
      auto& entry = rows[to_new[i]][to_new[ops.col_idx[k]]];
      entry.first += ops.mass[k];
      entry.second += ops.c[k];
    }
  }

  DiscreteOperators merged;
  detail::build_csr(rows, merged);
  merged.boundary.assign(nu, {});
  return merged;
}

}  // namespace mcl2d
