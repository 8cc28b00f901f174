#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <string>

namespace palqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Abstract linear map. Concrete operators are immutable after construction
/// and their apply methods are reentrant, so a single instance can be shared
/// across concurrent solves.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual bool is_self_adjoint() const = 0;

  virtual void apply(const Vector& v, Vector& out) const = 0;

  /// Adjoint apply. Self-adjoint operators route to apply().
  virtual void apply_adjoint(const Vector& v, Vector& out) const;

  Vector apply(const Vector& v) const;
  Vector apply_adjoint(const Vector& v) const;

  /// Explicit sparse backing, if the operator is just a stored matrix.
  /// Enables submatrix extraction in the active-set Newton path.
  virtual const SparseMatrix* sparse_backing() const { return nullptr; }

  /// Short structural tag ("sparse", "qap", "lowrank_plus_diag", ...).
  virtual std::string kind() const = 0;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

/// Spectral estimates attached to a problem's quadratic operator. These feed
/// tolerance rules only, not solution accuracy, so cheap estimates suffice.
struct OperatorStats {
  double norm2_estimate = 0.0;        // largest eigenvalue
  double lambda_plus_estimate = 0.0;  // smallest eigenvalue above null cutoff
  int power_iterations_used = 0;
  int lanczos_iterations_used = 0;
};

struct SpectralConfig {
  int power_budget = 50;
  double power_rel_change = 1e-4;
  int lanczos_budget = 100;
  std::uint64_t seed = 20240901;
};

// ---- Operator factories ----

OperatorPtr zero_operator(Index n);
OperatorPtr identity_operator(Index n);
OperatorPtr diagonal_operator(Vector d);
OperatorPtr dense_operator(Matrix m, bool self_adjoint);
OperatorPtr sparse_operator(SparseMatrix m, bool self_adjoint);
OperatorPtr scaled_operator(OperatorPtr op, double alpha);

/// Block-diagonal composition diag(op, 0_{zero_tail}); used by generators
/// that pad a structured quadratic with linear-only variables.
OperatorPtr pad_operator(OperatorPtr op, Index zero_tail);

/// x ↦ vec(A·mat(x)·B − S·mat(x) − mat(x)·T) on R^{d²}, for symmetric
/// d×d inputs; the d²×d² Kronecker form is never built.
OperatorPtr qap_operator(const Matrix& A, const Matrix& B, const Matrix& S,
                         const Matrix& T);

/// s ↦ svec(Q·smat(s)·Q) − shift·s on R^{d(d+1)/2}; PSD when
/// shift = min(0, λ_min(Q⊗Q)).
OperatorPtr biq_operator(const Matrix& Q, double shift);

/// x ↦ scale·(Fc·(Fcᵀx)) + d∘x with Fc = F − col_mean·eᵀ kept implicit;
/// the dense n×n product is never formed.
OperatorPtr lowrank_plus_diag_operator(SparseMatrix F, Vector col_mean,
                                       double scale, Vector diag);

// ---- Spectral estimates ----

/// Power-iteration estimate of the largest eigenvalue of a self-adjoint PSD
/// operator. Never returns zero: floored at machine epsilon so downstream
/// tolerance divisions stay finite.
double estimate_spectral_norm(const LinearOperator& op,
                              const SpectralConfig& cfg = {});

/// Lanczos estimate of the smallest eigenvalue above the null-space cutoff
/// 1e-10·norm2. Floored at the cutoff.
double estimate_lambda_plus(const LinearOperator& op, double norm2_estimate,
                            const SpectralConfig& cfg = {});

OperatorStats compute_operator_stats(const LinearOperator& op,
                                     const SpectralConfig& cfg = {});

// ---- Symmetric vectorization ----

/// Column-stacked upper triangle with off-diagonal entries scaled by √2,
/// so that ⟨svec(X), svec(Y)⟩ = ⟨X, Y⟩_F. Throws on asymmetry beyond 1e-12.
Vector svec(const Matrix& X);
Matrix smat(const Vector& s);

Index svec_dim(Index d);
/// Position of entry (i, j), i ≤ j, inside svec ordering.
Index svec_index(Index i, Index j);

}  // namespace palqp
