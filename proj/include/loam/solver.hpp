#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "loam/data.hpp"

namespace loam {

struct SolveReport {
  int iterations = 0;
  Real final_residual_norm = 0.0;
  bool converged = false;
  enum class Reason { rtol, atol, maxit } reason = Reason::maxit;
};

/// 2x2 table of blocks; missing entries are zero blocks.
struct BlockMat {
  std::array<std::array<MatPtr, 2>, 2> blocks{};
  std::array<int, 2> row_sizes{};
  std::array<int, 2> col_sizes{};

  int nrows() const { return row_sizes[0] + row_sizes[1]; }
  int ncols() const { return col_sizes[0] + col_sizes[1]; }
};

/// y_i = sum_j A_ij x_j on the flattened numbering. Each output row folds its
/// block-0 entries and then continues with block 1, matching the column order
/// a monolithic CSR row would use.
inline std::vector<Real> block_spmv(const BlockMat& op, std::span<const Real> x) {
  require(static_cast<int>(x.size()) == op.ncols(), ErrorKind::DimensionMismatch,
          "block spmv operand length != total column count");
  std::vector<Real> y(op.nrows(), 0.0);
  int row_offset = 0;
  for (int bi = 0; bi < 2; ++bi) {
    for (int r = 0; r < op.row_sizes[bi]; ++r) {
      Real acc = 0.0;
      int col_offset = 0;
      for (int bj = 0; bj < 2; ++bj) {
        if (const auto& block = op.blocks[bi][bj]) {
          require(block->nrows() == op.row_sizes[bi] && block->ncols() == op.col_sizes[bj],
                  ErrorKind::DimensionMismatch, "block shape inconsistent with layout");
          const auto& sp = *block->sparsity();
          const auto& vals = block->values();
          for (long k = sp.row_offsets()[r]; k < sp.row_offsets()[r + 1]; ++k)
            acc += vals[k] * x[col_offset + sp.col_indices()[k]];
        }
        col_offset += op.col_sizes[bj];
      }
      y[row_offset + r] = acc;
    }
    row_offset += op.row_sizes[bi];
  }
  return y;
}

enum class Preconditioner { None, Jacobi };

namespace detail {

using ApplyFn = std::function<void(std::span<const Real>, std::span<Real>)>;

inline std::vector<Real> jacobi_inverse_diagonal(const Mat& mat) {
  require(mat.nrows() == mat.ncols(), ErrorKind::DimensionMismatch,
          "jacobi needs a square matrix");
  std::vector<Real> inv(mat.nrows());
  for (int r = 0; r < mat.nrows(); ++r) {
    Real d = mat.at(r, r);
    require(d > 0.0, ErrorKind::IndefiniteBreakdown,
            "non-positive diagonal entry at row " + std::to_string(r) +
                "; matrix is not SPD");
    inv[r] = 1.0 / d;
  }
  return inv;
}

inline SolveReport cg_iterate(const ApplyFn& apply_op, const std::vector<Real>& inv_diag,
                              std::span<const Real> b, std::vector<Real>& x, Real rtol, Real atol,
                              int maxit) {
  const size_t n = b.size();
  require(x.size() == n, ErrorKind::DimensionMismatch, "x0 length != rhs length");

  auto norm = [](std::span<const Real> v) {
    Real acc = 0.0;
    for (Real e : v) acc += e * e;
    return std::sqrt(acc);
  };
  auto dot = [](std::span<const Real> a, std::span<const Real> c) {
    Real acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * c[i];
    return acc;
  };

  const Real target = std::max(rtol * norm(b), atol);

  std::vector<Real> r(n), z(n), p(n), q(n);
  apply_op(x, q);
  for (size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];

  auto precondition = [&](const std::vector<Real>& in, std::vector<Real>& out) {
    if (inv_diag.empty())
      out = in;
    else
      for (size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
  };

  SolveReport report;
  Real rnorm = norm(r);
  if (rnorm <= target) {
    report.converged = true;
    report.final_residual_norm = rnorm;
    report.reason = rnorm <= atol ? SolveReport::Reason::atol : SolveReport::Reason::rtol;
    return report;
  }

  precondition(r, z);
  p = z;
  Real rz = dot(r, z);

  for (int it = 1; it <= maxit; ++it) {
    apply_op(p, q);
    Real pq = dot(p, q);
    require(pq > 0.0, ErrorKind::IndefiniteBreakdown,
            "p'Ap <= 0 after " + std::to_string(it) + " iterations; matrix is not SPD");
    Real alpha = rz / pq;
    for (size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
    report.iterations = it;
    rnorm = norm(r);
    if (rnorm <= target) {
      // recurrence says converged: verify against the true residual
      apply_op(x, q);
      for (size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      rnorm = norm(r);
      if (rnorm <= target) {
        report.converged = true;
        report.final_residual_norm = rnorm;
        report.reason = rnorm <= atol ? SolveReport::Reason::atol : SolveReport::Reason::rtol;
        return report;
      }
    }
    precondition(r, z);
    Real rz_next = dot(r, z);
    Real beta = rz_next / rz;
    rz = rz_next;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  report.converged = false;
  report.final_residual_norm = rnorm;
  report.reason = SolveReport::Reason::maxit;
  return report;
}

} // namespace detail

/// Preconditioned conjugate gradients on an SPD operator. Convergence target
/// is max(rtol * ||b||_2, atol) on the residual recurrence, re-verified with
/// the true residual before reporting success. On maxit the best iterate is
/// returned with converged = false.
inline std::pair<std::vector<Real>, SolveReport>
cg_solve(const Mat& mat, std::span<const Real> b, std::vector<Real> x0 = {}, Real rtol = 1e-8,
         Real atol = 1e-14, int maxit = 1000, Preconditioner precond = Preconditioner::None) {
  require(mat.nrows() == mat.ncols(), ErrorKind::DimensionMismatch, "cg needs a square matrix");
  require(static_cast<int>(b.size()) == mat.nrows(), ErrorKind::DimensionMismatch,
          "rhs length != matrix size");
  if (x0.empty()) x0.assign(b.size(), 0.0);
  std::vector<Real> inv_diag;
  if (precond == Preconditioner::Jacobi) inv_diag = detail::jacobi_inverse_diagonal(mat);
  auto apply = [&](std::span<const Real> v, std::span<Real> out) {
    auto y = mat_spmv(mat, v);
    std::copy(y.begin(), y.end(), out.begin());
  };
  auto report = detail::cg_iterate(apply, inv_diag, b, x0, rtol, atol, maxit);
  return {std::move(x0), report};
}

/// CG on a nested block operator over the flattened numbering.
inline std::pair<std::vector<Real>, SolveReport>
cg_solve(const BlockMat& op, std::span<const Real> b, std::vector<Real> x0 = {}, Real rtol = 1e-8,
         Real atol = 1e-14, int maxit = 1000, Preconditioner precond = Preconditioner::None) {
  require(op.nrows() == op.ncols(), ErrorKind::DimensionMismatch, "cg needs a square operator");
  require(static_cast<int>(b.size()) == op.nrows(), ErrorKind::DimensionMismatch,
          "rhs length != operator size");
  if (x0.empty()) x0.assign(b.size(), 0.0);
  std::vector<Real> inv_diag;
  if (precond == Preconditioner::Jacobi) {
    inv_diag.resize(b.size());
    int offset = 0;
    for (int bi = 0; bi < 2; ++bi) {
      require(op.blocks[bi][bi] != nullptr, ErrorKind::IndefiniteBreakdown,
              "jacobi needs the diagonal blocks");
      auto block_diag = detail::jacobi_inverse_diagonal(*op.blocks[bi][bi]);
      std::copy(block_diag.begin(), block_diag.end(), inv_diag.begin() + offset);
      offset += op.row_sizes[bi];
    }
  }
  auto apply = [&](std::span<const Real> v, std::span<Real> out) {
    auto y = block_spmv(op, v);
    std::copy(y.begin(), y.end(), out.begin());
  };
  auto report = detail::cg_iterate(apply, inv_diag, b, x0, rtol, atol, maxit);
  return {std::move(x0), report};
}

} // namespace loam
