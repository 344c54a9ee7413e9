#pragma once

#include <cmath>
#include <vector>

#include "mcl2d/block_matrix.hpp"

// Preconditioned BiCGSTAB for the nonsymmetric block systems of the
// quasi-Newton updates. Default preconditioner is block ILU(0) on the CSR
// pattern; block Jacobi (exact 4x4 diagonal inverses) is the fallback and
// the restart preconditioner after a Krylov breakdown.

namespace mcl2d {

struct LinearSolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
  bool singular_diagonal_block = false;  // ILU(0)/Jacobi hit a singular pivot
  bool jacobi_fallback = false;          // solved with the fallback preconditioner
};

enum class PrecondKind { ilu0, jacobi, none };

struct BlockPreconditioner {
  PrecondKind kind = PrecondKind::none;
  bool ok = true;
  bool singular_block = false;
  BlockSparseMatrix factors;    // ILU(0) factors, unit block lower diagonal
  std::vector<Mat4> inv_diag;   // inverted pivot blocks
  std::vector<int> diag_index;  // CSR position of each diagonal block

  void apply(const StateField& r, StateField& z) const {
    switch (kind) {
      case PrecondKind::none:
        z = r;
        return;
      case PrecondKind::jacobi:
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
        return;
      case PrecondKind::ilu0: {
        const int n = factors.n;
        // forward sweep with unit block-lower part
        for (int i = 0; i < n; ++i) {
          State acc = r[i];
          for (int k = factors.row_ptr[i]; k < factors.row_ptr[i + 1]; ++k) {
            const int j = factors.col_idx[k];
            if (j >= i) break;
            acc -= factors.blocks[k] * z[j];
          }
          z[i] = acc;
        }
        // backward sweep with the block-upper part
        for (int i = n - 1; i >= 0; --i) {
          State acc = z[i];
          for (int k = factors.row_ptr[i + 1] - 1; k >= factors.row_ptr[i]; --k) {
            const int j = factors.col_idx[k];
            if (j <= i) break;
            acc -= factors.blocks[k] * z[j];
          }
          z[i] = inv_diag[i] * acc;
        }
        return;
      }
    }
  }
};

inline BlockPreconditioner build_block_jacobi(const BlockSparseMatrix& mat) {
  BlockPreconditioner p;
  p.kind = PrecondKind::jacobi;
  p.inv_diag.resize(mat.n);
  for (int i = 0; i < mat.n; ++i) {
    const int d = mat.find(i, i);
    if (d < 0 || !invert(mat.blocks[d], p.inv_diag[i])) {
      p.singular_block = true;
      p.inv_diag[i] = Mat4::identity();
    }
  }
  return p;
}

// Block ILU(0) on the existing sparsity (IKJ ordering, natural node order).
// Falls back to block Jacobi if a pivot block is singular.
inline BlockPreconditioner build_preconditioner(const BlockSparseMatrix& mat,
                                                PrecondKind kind = PrecondKind::ilu0) {
  if (kind != PrecondKind::ilu0) {
    BlockPreconditioner p =
        kind == PrecondKind::jacobi ? build_block_jacobi(mat) : BlockPreconditioner{};
    p.kind = kind;
    return p;
  }
  BlockPreconditioner p;
  p.kind = PrecondKind::ilu0;
  p.factors = mat;
  p.inv_diag.resize(mat.n);
  p.diag_index.resize(mat.n);
  BlockSparseMatrix& f = p.factors;

  for (int i = 0; i < mat.n; ++i) {
    for (int kpos = f.row_ptr[i]; kpos < f.row_ptr[i + 1]; ++kpos) {
      const int k = f.col_idx[kpos];
      if (k >= i) break;
      f.blocks[kpos] = f.blocks[kpos] * p.inv_diag[k];
      const Mat4& lik = f.blocks[kpos];
      for (int jpos = kpos + 1; jpos < f.row_ptr[i + 1]; ++jpos) {
        const int j = f.col_idx[jpos];
        const int kj = f.find(k, j);
        if (kj >= 0) f.blocks[jpos] -= lik * f.blocks[kj];
      }
    }
    const int d = f.find(i, i);
    p.diag_index[i] = d;
    if (d < 0 || !invert(f.blocks[d], p.inv_diag[i])) {
      p.singular_block = true;
      BlockPreconditioner fallback = build_block_jacobi(mat);
      fallback.singular_block = true;
      return fallback;
    }
  }
  return p;
}

// Right-preconditioned BiCGSTAB; returns the best iterate seen. One restart
// with block-Jacobi preconditioning is attempted after a breakdown.
inline std::pair<StateField, LinearSolveReport> solve(
    const BlockSparseMatrix& mat, const StateField& rhs, const StateField& x0,
    double tol_rel, int max_iter, PrecondKind precond = PrecondKind::ilu0) {
  LinearSolveReport rep;
  StateField x = x0;
  const double norm_b = norm(rhs);
  if (norm_b == 0.0) {
    rep.converged = true;
    return {StateField(mat.n), rep};
  }
  const double target = tol_rel * norm_b;

  BlockPreconditioner prec = build_preconditioner(mat, precond);
  rep.singular_diagonal_block = prec.singular_block;
  rep.jacobi_fallback = precond == PrecondKind::ilu0 && prec.kind == PrecondKind::jacobi;

  StateField r(mat.n), v(mat.n), pvec(mat.n), phat(mat.n), shat(mat.n), t(mat.n);
  StateField best_x = x;
  double best_res = std::numeric_limits<double>::infinity();
  bool restarted = false;

  for (int attempt = 0; attempt < 2; ++attempt) {
    mat.mul(x, r);
    for (int i = 0; i < mat.n; ++i) r[i] = rhs[i] - r[i];
    StateField rhat = r;
    double res = norm(r);
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= target) break;

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(v.begin(), v.end(), State{});
    std::fill(pvec.begin(), pvec.end(), State{});
    bool broke = false;

    while (rep.iterations < max_iter) {
      const double rho_new = dot(rhat, r);
      if (!std::isfinite(rho_new) || std::abs(rho_new) < 1e-300) {
        broke = true;
        break;
      }
      const double beta = (rho_new / rho) * (alpha / omega);
      for (int i = 0; i < mat.n; ++i)
        pvec[i] = r[i] + beta * (pvec[i] - omega * v[i]);
      prec.apply(pvec, phat);
      mat.mul(phat, v);
      const double rv = dot(rhat, v);
      if (!std::isfinite(rv) || std::abs(rv) < 1e-300) {
        broke = true;
        break;
      }
      alpha = rho_new / rv;
      axpy(-alpha, v, r);  // r becomes s
      axpy(alpha, phat, x);
      ++rep.iterations;
      res = norm(r);
      if (res < best_res) {
        best_res = res;
        best_x = x;
      }
      if (res <= target) break;

      prec.apply(r, shat);
      mat.mul(shat, t);
      const double tt = dot(t, t);
      if (!(tt > 0.0) || !std::isfinite(tt)) {
        broke = true;
        break;
      }
      omega = dot(t, r) / tt;
      if (!std::isfinite(omega) || std::abs(omega) < 1e-300) {
        broke = true;
        break;
      }
      axpy(omega, shat, x);
      axpy(-omega, t, r);
      res = norm(r);
      if (res < best_res) {
        best_res = res;
        best_x = x;
      }
      if (res <= target) break;
      rho = rho_new;
    }

    if (!broke || restarted) {
      rep.breakdown = broke;
      break;
    }
    // breakdown: restart once from the best iterate with block Jacobi
    restarted = true;
    rep.breakdown = true;
    x = best_x;
    prec = build_block_jacobi(mat);
    rep.jacobi_fallback = true;
  }

  rep.rel_residual = best_res / norm_b;
  rep.converged = best_res <= target;
  if (rep.converged) rep.breakdown = false;
  return {best_x, rep};
}

}  // namespace mcl2d
