#pragma once

#include <vector>

#include "kkt.hpp"
#include "ssn.hpp"
#include "status.hpp"

namespace palqp {

/// Accuracy phase: outer proximal multiplier loop with inner minimizations
/// stopped by the gradient-based inexactness tests (A) and, optionally, (B).
struct Phase2Config {
  double sigma0 = 0.0;  // ≤ 0: inherit the warm-start phase's penalty
  double sigma_max = 1e8;
  double kappa = 1.0;  // proximal-weight schedule constant
  double tol2 = 1e-6;
  int max_iter2 = 1000;
  bool use_criterion_B = true;
  double eps_scale = 0.1;    // eps_k = eps_scale·tol2·k^{-1.5}
  double delta_scale = 0.5;  // delta_k = delta_scale·k^{-1.5}
  SsnConfig ssn;
};

struct Phase2Summary {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  int newton_steps_total = 0;
  KktResiduals residuals;
  double sigma_final = 0.0;
  std::vector<double> eta_history;
};

struct CriteriaCheck {
  bool A_met = false;
  bool B_met = false;
};

/// Inexactness tests on ‖∇Ψ_k‖. The state delta is measured in the
/// block norm ‖(Δw,Δy,Δx)‖² = τ‖Δw‖²_Q + τ‖Δy‖² + ‖Δx‖².
CriteriaCheck check_criteria(double grad_norm, double state_delta_lambda,
                             double sigma_k, double tau_k, double lambda_plus,
                             double eps_k, double delta_k);

/// Penalty steering from the residual balance: grow σ by 5/4 when the dual
/// residual dominates, shrink by 4/5 when the primal side dominates.
double update_sigma(double sigma_k, const KktResiduals& res, double sigma_max);

/// τ_k = σ_k·max(1e-12, κ·k^{-2.5}).
double update_tau(int k, double sigma_k, double kappa);

std::pair<IterateState, Phase2Summary> phase2_solve(const StandardQP& qp,
                                                    const Phase2Config& cfg,
                                                    IterateState warm,
                                                    double warm_sigma,
                                                    const OperatorStats& stats);

}  // namespace palqp
