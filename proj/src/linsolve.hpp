#pragma once

#include <optional>
#include <vector>

#include "linops.hpp"

namespace palqp {

/// Sparse LDLᵀ factor of a symmetric positive semidefinite matrix with
/// pivot skipping: diagonal pivots below pivot_tol·max_diag are zeroed
/// together with their factor column, which turns chol_solve into a
/// pseudo-solve on the remaining range. Rank-deficient normal equations
/// (e.g. assignment constraints) factor without any problem rewriting.
struct CholFactor {
  Index n = 0;
  std::vector<int> perm;      // fill-reducing permutation, PMPᵀ = LDLᵀ
  std::vector<int> perm_inv;
  std::vector<int> col_ptr;   // column pointers of L (strictly lower part)
  std::vector<int> row_idx;
  std::vector<double> values;
  Vector diag;                       // D; zero on skipped pivots
  std::vector<Index> skipped;        // skipped pivot indices (original order)
  double pivot_tol = 0.0;

  Index nnz() const { return static_cast<Index>(values.size()); }
};

enum class Ordering { natural, amd };

struct CholOptions {
  double pivot_tol = 1e-13;  // relative to the largest diagonal entry
  Ordering ordering = Ordering::amd;
};

/// Symbolic + numeric factorization. Throws std::invalid_argument on an
/// asymmetric pattern request and std::runtime_error when a pivot falls
/// below −pivot_tol·max_diag (matrix not PSD).
CholFactor chol_factor(const SparseMatrix& M, const CholOptions& opt = {});

/// Pseudo-solve M·x = rhs; components in the skipped-pivot subspace are
/// set to zero.
Vector chol_solve(const CholFactor& f, const Vector& rhs);

/// Symbolic-only fill count (nnz of L) for the factor-or-iterate policy.
Index chol_fill_estimate(const SparseMatrix& M, Ordering ordering = Ordering::amd);

struct IterSolveReport {
  double residual_norm = 0.0;  // ‖rhs − op·x‖, recomputed at exit
  int iterations = 0;          // operator applications inside the loop
  bool converged = false;
  bool breakdown = false;
};

/// MINRES for self-adjoint systems with an absolute residual tolerance.
/// An optional positive diagonal acts as a Jacobi preconditioner. The
/// reported residual is always recomputed from the returned iterate.
IterSolveReport minres_solve(const LinearOperator& op, const Vector& rhs,
                             Vector& x, double tol_abs, int max_iter,
                             const std::optional<Vector>& jacobi = std::nullopt);

/// BICGSTAB for general square systems, absolute residual tolerance.
/// iterations counts operator applications (two per full BiCG step), so
/// op = the one-Q-apply Newton matrix costs at most iterations+2 Q applies
/// including the final residual check.
IterSolveReport bicgstab_solve(const LinearOperator& op, const Vector& rhs,
                               Vector& x, double tol_abs, int max_iter);

}  // namespace palqp
