#pragma once

#include <memory>
#include <vector>

#include "kkt.hpp"
#include "linsolve.hpp"
#include "problem.hpp"
#include "status.hpp"

namespace palqp {

enum class UpdateOrder { y_first, w_first };
enum class LinearSolverMode { automatic, direct, iterative };

/// Warm-start phase: symmetric Gauss-Seidel sweep over the dual blocks
/// with an augmented Lagrangian multiplier step, run at a loose tolerance.
struct Phase1Config {
  double sigma = 0.0;  // ≤ 0: scale 1 by (1+‖b‖)/(1+‖c‖)
  double tau = 1.618;  // multiplier step length, in (0, 2)
  double tol1 = 1e-4;
  int max_iter1 = 1000;
  UpdateOrder update_order = UpdateOrder::y_first;
  LinearSolverMode solver_mode = LinearSolverMode::automatic;

  // inner inexactness schedule: eps_k = min(eps0, 1/k^eps_exponent)
  double eps0 = 1e-2;
  double eps_exponent = 1.1;

  int w_max_iter = 300;  // MINRES budget for the (I+σQ) system
  int y_max_iter = 500;  // MINRES budget for the normal equations
  Index direct_m_limit = 20000;
  Index direct_fill_limit = 50000000;
  Ordering ordering = Ordering::amd;
};

struct Phase1Summary {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  KktResiduals residuals;
  double sigma = 0.0;
  std::vector<double> eta_history;
  Index chol_skipped_pivots = 0;
};

/// Solver context for the multiplier systems σAAᵀy = g; holds the Cholesky
/// factor of AAᵀ when the direct route is selected (factored once, reused
/// every iteration).
class YStepSolver {
 public:
  YStepSolver(const StandardQP& qp, double sigma, const Phase1Config& cfg);

  /// Direct: pseudo-solve through the factor. Iterative: MINRES from the
  /// warm start until ‖σAAᵀy − g‖ ≤ eps_k.
  Vector solve(const Vector& g, double eps_k, const Vector& warm,
               IterSolveReport* report = nullptr) const;

  bool direct() const { return direct_; }
  Index skipped_pivots() const { return direct_ ? static_cast<Index>(factor_.skipped.size()) : 0; }

 private:
  const StandardQP& qp_;
  double sigma_;
  bool direct_ = false;
  CholFactor factor_;
  int max_iter_;
};

/// One inexact solve of (I+σQ)ŵ = h at absolute tolerance eps_k/‖Q‖₂,
/// warm-started; returns (ŵ, Qŵ) with one extra Q apply. The projection
/// onto Range(Q) is never performed. Retries once with a doubled budget
/// before reporting failure.
WRepresentation solve_w_step(const LinearOperator& Q, const Vector& h,
                             double sigma, double eps_k, double norm2_q,
                             const Vector& warm_hat, int max_iter,
                             IterSolveReport* report = nullptr);

/// Closed-form multiplier-block update: the exact minimizer of
/// δ_C^*(−z) + (σ/2)‖z − m_center‖².
Vector update_z(const Vector& m_center, double sigma, const BoxSet& box);

/// x ← x + τσ(z − Qw + Aᵀy − c); refreshes the A·x cache.
void update_x_phase1(IterateState& state, const StandardQP& qp, double sigma,
                     double tau);

std::pair<IterateState, Phase1Summary> phase1_solve(const StandardQP& qp,
                                                    const Phase1Config& cfg,
                                                    IterateState start,
                                                    const OperatorStats& stats);

}  // namespace palqp
