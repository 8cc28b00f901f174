#include "kkt.hpp"

#include <cmath>

namespace palqp {

KktResiduals kkt_residuals(const IterateState& state, const StandardQP& qp) {
  Vector qx(state.x.size());
  qp.Q->apply(state.x, qx);
  return kkt_residuals(state, qx, qp);
}

KktResiduals kkt_residuals(const IterateState& state, const Vector& qx,
                           const StandardQP& qp) {
  KktResiduals r;
  const Vector& qw = state.w.q_w;

  r.eta_p = (state.Ax - qp.b).norm() / (1.0 + qp.b.norm());
  r.eta_d = (state.z - qw + state.A_adj_y - qp.c).norm() / (1.0 + qp.c.norm());
  r.eta_Q = (qx - qw).norm() / (1.0 + qx.norm() + qw.norm());
  r.eta_C = (state.x - project_box(state.x - state.z, qp.box)).norm() /
            (1.0 + state.x.norm() + state.z.norm());

  r.obj_P = objective_primal(state.x, qx, qp);
  r.obj_D = objective_dual(state.z, state.w, state.y, qp);
  if (std::isinf(r.obj_D)) {
    r.dual_obj_infinite = true;
    r.eta_g = 1.0;
  } else {
    r.eta_g = (r.obj_P - r.obj_D) / (1.0 + std::abs(r.obj_P) + std::abs(r.obj_D));
  }

  r.eta_max = std::max({r.eta_p, r.eta_d, r.eta_Q, r.eta_C, std::abs(r.eta_g)});
  return r;
}

bool check_termination(const KktResiduals& res, double tol) {
  return res.eta_max <= tol;
}

FailureFlags failure_flags(const KktResiduals& res, double obj_best_P,
                           double obj_best_D) {
  FailureFlags f;
  f.eta_p = res.eta_p > kFailureEtaThreshold;
  f.eta_d = res.eta_d > kFailureEtaThreshold;
  f.eta_Q = res.eta_Q > kFailureEtaThreshold;
  f.eta_C = res.eta_C > kFailureEtaThreshold;
  const double err_p =
      std::abs(res.obj_P - obj_best_P) / (1.0 + std::abs(obj_best_P));
  const double err_d =
      std::abs(res.obj_D - obj_best_D) / (1.0 + std::abs(obj_best_D));
  f.obj_p = err_p > kFailureObjThreshold;
  f.obj_d = err_d > kFailureObjThreshold;
  const double eta_kkt = std::max({res.eta_p, res.eta_d, res.eta_Q, res.eta_C});
  f.kkt = eta_kkt > kFailureEtaThreshold;
  return f;
}

}  // namespace palqp
