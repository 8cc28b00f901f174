#pragma once

#include "problem.hpp"

namespace palqp {

/// Relative optimality and infeasibility measures shared by both phases
/// and the benchmark harness. eta_g is signed; eta_max takes |eta_g|.
struct KktResiduals {
  double eta_p = 0.0;
  double eta_d = 0.0;
  double eta_Q = 0.0;
  double eta_C = 0.0;
  double eta_g = 0.0;
  double obj_P = 0.0;
  double obj_D = 0.0;
  double eta_max = 0.0;
  bool dual_obj_infinite = false;  // eta_g forced to 1 in that case
};

/// All five relative residuals at the given iterate. Pure function: relies
/// only on the iterate's caches plus one fresh Q·x product.
KktResiduals kkt_residuals(const IterateState& state, const StandardQP& qp);

/// Variant reusing an already-computed Q·x.
KktResiduals kkt_residuals(const IterateState& state, const Vector& qx,
                           const StandardQP& qp);

bool check_termination(const KktResiduals& res, double tol);

/// Robustness bookkeeping for benchmark comparisons: per-measure failure
/// flags against the 5e-6 residual and 5e-5 objective-deviation thresholds
/// (strict inequalities).
struct FailureFlags {
  bool eta_p = false;
  bool eta_d = false;
  bool eta_Q = false;
  bool eta_C = false;
  bool obj_p = false;
  bool obj_d = false;
  bool kkt = false;  // max of the four residuals, gap excluded

  bool any() const { return eta_p || eta_d || eta_Q || eta_C || obj_p || obj_d || kkt; }
};

FailureFlags failure_flags(const KktResiduals& res, double obj_best_P,
                           double obj_best_D);

constexpr double kFailureEtaThreshold = 5e-6;
constexpr double kFailureObjThreshold = 5e-5;

}  // namespace palqp
