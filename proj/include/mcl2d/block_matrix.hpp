#pragma once

#include <vector>

#include "mcl2d/limiter.hpp"
#include "mcl2d/low_order.hpp"

// Block-sparse CSR storage (4x4 dense blocks over the nodal stencil graph)
// and the low-order Jacobian J_L = M_L + dt [A - B - D] built from the
// homogeneity property of the Euler flux.

namespace mcl2d {

struct BlockSparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;  // strictly increasing per row
  std::vector<Mat4> blocks;

  static BlockSparseMatrix with_pattern(const DiscreteOperators& ops) {
    BlockSparseMatrix m;
    m.n = ops.n;
    m.row_ptr = ops.row_ptr;
    m.col_idx = ops.col_idx;
    m.blocks.assign(ops.col_idx.size(), Mat4{});
    return m;
  }

  int find(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col_idx[k] == j) return k;
    return -1;
  }

  Mat4& at(int i, int j) { return blocks[find(i, j)]; }

  void mul(const StateField& x, StateField& y) const {
    for (int i = 0; i < n; ++i) {
      State acc{};
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        acc += blocks[k] * x[col_idx[k]];
      y[i] = acc;
    }
  }

  StateField mul(const StateField& x) const {
    StateField y(n);
    mul(x, y);
    return y;
  }
};

// J_L(u): diagonal block m_i I + dt [c_ii.A(u_i) - B_ii - d_ii I], off-diagonal
// dt [c_ij.A(u_j) - d_ij I]. B_ii collects the implicit boundary splitting.
inline BlockSparseMatrix assemble_jacobian(const StateField& u,
                                           const DiscreteOperators& ops,
                                           const EdgeCoefficients& edge,
                                           const BcTable& bcs, double dt,
                                           const GasModel& g) {
  BlockSparseMatrix m = BlockSparseMatrix::with_pattern(ops);

  std::vector<FluxJacobianPair> jac(ops.n);
  for (int i = 0; i < ops.n; ++i) jac[i] = flux_jacobians(u[i], g);

  for (int i = 0; i < ops.n; ++i) {
    for (int k = ops.row_ptr[i]; k < ops.row_ptr[i + 1]; ++k) {
      const int j = ops.col_idx[k];
      const Vec2 c = ops.c[k];
      Mat4 block;
      for (int e = 0; e < 16; ++e)
        block.a[e] = dt * (c.x * jac[j].a1.a[e] + c.y * jac[j].a2.a[e]);
      m.blocks[k] = block;
    }
  }

  // graph viscosity: off-diagonal -dt d_ij, diagonal +dt sum_j d_ij
  for (std::size_t p = 0; p < ops.pairs.size(); ++p) {
    const auto& pr = ops.pairs[p];
    const double dd = dt * edge.d[p];
    Mat4& bij = m.blocks[m.find(pr.i, pr.j)];
    Mat4& bji = m.blocks[m.find(pr.j, pr.i)];
    for (int e = 0; e < 4; ++e) {
      bij(e, e) -= dd;
      bji(e, e) -= dd;
    }
  }

  for (int i = 0; i < ops.n; ++i) {
    Mat4& diag = m.blocks[m.find(i, i)];
    for (int e = 0; e < 4; ++e) {
      diag(e, e) += ops.lumped[i] + dt * edge.sum_d[i];
    }
    for (const auto& seg : ops.boundary[i]) {
      const BoundaryTerm t =
          boundary_term(u[i], bc_for_patch(bcs, seg.patch), seg.weight, seg.normal, g);
      diag -= dt * t.block;
    }
  }
  return m;
}

// explicit boundary data b(u^) of the splitting b~ = B u + b(u^)
inline StateField boundary_data_vector(const StateField& u, const DiscreteOperators& ops,
                                       const BcTable& bcs, const GasModel& g) {
  StateField b(ops.n);
  for (int i = 0; i < ops.n; ++i)
    for (const auto& seg : ops.boundary[i])
      b[i] += boundary_term(u[i], bc_for_patch(bcs, seg.patch), seg.weight, seg.normal, g)
                  .b_hat;
  return b;
}

}  // namespace mcl2d
