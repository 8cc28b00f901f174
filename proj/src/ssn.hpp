#pragma once

#include <functional>
#include <vector>

#include "linsolve.hpp"
#include "problem.hpp"
#include "status.hpp"

namespace palqp {

struct SsnConfig {
  double eta_bar = 1e-2;  // cap on the Newton-system tolerance η_j
  double nu_exp = 0.5;    // η_j = min(η̄, ‖∇φ‖^{1+nu_exp})
  double delta_ls = 0.5;  // backtracking factor
  double rho_ls = 1e-4;   // Armijo slope fraction, in (0, 1/2)
  int max_newton_iter = 50;
  int max_ls_steps = 50;

  // Path policy: active-set-reduced SPD system while the interior block is
  // small enough and σ moderate; otherwise the one-Q-apply nonsymmetric
  // system, which stays better conditioned for large σ.
  double p_fraction_max = 0.7;
  double sigma_switch = 1e6;
  int krylov_max_iter = 1000;
  Index dense_reduced_limit = 400;  // assemble + LLT when Q is an explicit
                                    // sparse matrix and p is this small
};

/// Fixed data of one inner minimization: anchors, penalty, proximal weight.
struct SsnContext {
  const StandardQP* qp = nullptr;
  Vector x_anchor;            // multiplier estimate x̂
  WRepresentation w_anchor;   // proximal center in w (with its Q product)
  Vector y_anchor;
  double sigma = 1.0;
  double tau = 1.0;
  double norm2_q = 1.0;  // ‖Q‖₂ estimate
  double norm2_a = 1.0;  // ‖A‖₂ estimate

  double nu() const { return tau / sigma; }
};

/// Current inner iterate with the products every evaluation re-uses.
struct SsnPoint {
  WRepresentation w;
  Vector y;
  Vector a_adj_y;  // Aᵀ·y
};

struct PhiEval {
  double value = 0.0;
  Vector grad_w;  // Q-applied block; lies in Range(Q) by construction
  Vector grad_y;
  double grad_norm = 0.0;
  Vector z_point;  // x̂ − σ(Qw − Aᵀy + c)
  Vector proj_z;   // Π_C(z_point)
};

/// Objective value only (no Q applies); used by the line search.
double eval_phi_value(const SsnContext& ctx, const WRepresentation& w,
                      const Vector& y, const Vector& a_adj_y);

/// Value, gradient and the projection point. One Q apply (for Q·Π_C(z)).
PhiEval eval_phi_and_grad(const SsnContext& ctx, const SsnPoint& p);

/// Strict-interior index set of z against the box; ties at a bound go to
/// the complement (Jacobian entry zero).
struct ActivePartition {
  std::vector<Index> interior;          // P
  std::vector<unsigned char> in_interior;  // mask over all indices
  Index p = 0;
  Index n = 0;
};

ActivePartition active_partition(const Vector& z_point, const BoxSet& box);

enum class NewtonPath { reduced_spd, nonsymmetric_vhat, gradient_fallback };

struct NewtonDirection {
  Vector d_w_hat;
  Vector q_d_w;  // Q·d_w_hat
  Vector d_y;
  NewtonPath path = NewtonPath::reduced_spd;
  bool ok = false;
  double solve_residual = 0.0;  // linear-system residual achieved
  int solve_iterations = 0;
};

/// Inexact Newton direction at tolerance eta_j, by the reduced SPD system
/// on the interior block or the nonsymmetric full system; falls back to
/// steepest descent when both Krylov routes fail.
NewtonDirection newton_direction(const SsnContext& ctx, const SsnPoint& point,
                                 const PhiEval& eval,
                                 const ActivePartition& part, double eta_j,
                                 const SsnConfig& cfg);

struct ArmijoResult {
  double alpha = 1.0;
  int backtracks = 0;
  bool ok = false;
  double value = 0.0;  // φ at the accepted point
};

/// Backtracking search for the first m with
/// φ(p + δ^m d) ≤ φ(p) + ρ δ^m ⟨∇φ, d⟩. Value-only evaluations; no Q applies.
ArmijoResult armijo_search(const SsnContext& ctx, const SsnPoint& point,
                           const NewtonDirection& dir, const PhiEval& eval,
                           const Vector& a_adj_dy, const SsnConfig& cfg);

struct SsnResult {
  SsnPoint point;
  PhiEval eval;  // at the returned point
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
  bool used_fallback = false;
};

/// Caller-supplied stop test; receives the fresh evaluation at the current
/// point (outer inexactness criteria live in the caller).
using SsnExitTest = std::function<bool(const SsnPoint&, const PhiEval&)>;

SsnResult ssn_solve(const SsnContext& ctx, SsnPoint start, const SsnConfig& cfg,
                    const SsnExitTest& exit_test);

}  // namespace palqp
