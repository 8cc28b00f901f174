#include "phase2.hpp"

#include <cmath>
#include <stdexcept>

namespace palqp {

namespace {

class NormalEquationsOp final : public LinearOperator {
 public:
  explicit NormalEquationsOp(const SparseMatrix& A) : A_(A) {}
  Index rows() const override { return A_.rows(); }
  Index cols() const override { return A_.rows(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    Vector t = A_.transpose() * v;
    out.noalias() = A_ * t;
  }
  std::string kind() const override { return "aat"; }

 private:
  const SparseMatrix& A_;
};

}  // namespace

CriteriaCheck check_criteria(double grad_norm, double state_delta_lambda,
                             double sigma_k, double tau_k, double lambda_plus,
                             double eps_k, double delta_k) {
  const double factor =
      std::min({1.0, std::sqrt(tau_k), std::sqrt(tau_k * lambda_plus)}) / sigma_k;
  CriteriaCheck c;
  c.A_met = grad_norm <= factor * eps_k;
  c.B_met = grad_norm <= delta_k * factor * state_delta_lambda;
  return c;
}

double update_sigma(double sigma_k, const KktResiduals& res, double sigma_max) {
  const double primal_side = std::max({res.eta_p, res.eta_Q, res.eta_C});
  double sigma = sigma_k;
  if (primal_side < 0.75 * res.eta_d) {
    sigma = 1.25 * sigma_k;
  } else if (res.eta_d < 0.75 * primal_side) {
    sigma = 0.8 * sigma_k;
  }
  return std::min(sigma, sigma_max);
}

double update_tau(int k, double sigma_k, double kappa) {
  if (k < 1) throw std::invalid_argument("update_tau: k must be >= 1");
  const double ratio =
      std::max(1e-12, kappa * std::pow(static_cast<double>(k), -2.5));
  return sigma_k * ratio;
}

std::pair<IterateState, Phase2Summary> phase2_solve(const StandardQP& qp,
                                                    const Phase2Config& cfg,
                                                    IterateState warm,
                                                    double warm_sigma,
                                                    const OperatorStats& stats) {
  qp.validate();
  IterateState st = std::move(warm);
  st.refresh_caches(qp);

  Phase2Summary summary;
  double sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : warm_sigma;
  if (sigma <= 0.0) sigma = 1.0;

  const double lambda_plus = std::max(stats.lambda_plus_estimate, 1e-300);

  // ‖A‖₂ estimate for mapping Newton-system tolerances to residual bounds.
  NormalEquationsOp aat(qp.A);
  const double norm2_a = std::sqrt(estimate_spectral_norm(aat));

  bool sigma_reduced_for_stall = false;
  int consecutive_stalls = 0;
  int k = 0;
  while (k < cfg.max_iter2) {
    ++k;
    const double tau = update_tau(k, sigma, cfg.kappa);
    const double kk = static_cast<double>(k);
    const double eps_k = cfg.eps_scale * cfg.tol2 * std::pow(kk, -1.5);
    const double delta_k = cfg.delta_scale * std::pow(kk, -1.5);

    SsnContext ctx;
    ctx.qp = &qp;
    ctx.x_anchor = st.x;
    ctx.w_anchor = st.w;
    ctx.y_anchor = st.y;
    ctx.sigma = sigma;
    ctx.tau = tau;
    ctx.norm2_q = stats.norm2_estimate;
    ctx.norm2_a = norm2_a;

    auto exit_test = [&](const SsnPoint& p, const PhiEval& e) -> bool {
      // candidate multiplier update for the Λ-norm of the state change
      Vector u = st.x + sigma * (-p.w.q_w + p.a_adj_y - qp.c);
      Vector x_next = project_box(u, qp.box);
      Vector dw = p.w.w_hat - st.w.w_hat;
      Vector qdw = p.w.q_w - st.w.q_w;
      const double delta_sq = tau * dw.dot(qdw) +
                              tau * (p.y - st.y).squaredNorm() +
                              (x_next - st.x).squaredNorm();
      CriteriaCheck c =
          check_criteria(e.grad_norm, std::sqrt(std::max(delta_sq, 0.0)), sigma,
                         tau, lambda_plus, eps_k, delta_k);
      return c.A_met && (!cfg.use_criterion_B || c.B_met);
    };

    SsnPoint start{st.w, st.y, st.A_adj_y};
    SsnResult inner = ssn_solve(ctx, std::move(start), cfg.ssn, exit_test);
    summary.newton_steps_total += inner.iterations;

    if (inner.status == SolveStatus::stalled) {
      // A single stall still carries partial progress, so commit it and let
      // the next iteration retry with fresh anchors. Two in a row earn one
      // penalty reduction; stalling again after that ends the solve.
      if (++consecutive_stalls >= 2) {
        if (sigma_reduced_for_stall) {
          summary.status = SolveStatus::stalled;
          break;
        }
        sigma_reduced_for_stall = true;
        sigma *= 0.8;
        consecutive_stalls = 0;
        continue;
      }
    } else {
      consecutive_stalls = 0;
    }

    // multiplier update and the induced z
    Vector u = st.x + sigma * (-inner.point.w.q_w + inner.point.a_adj_y - qp.c);
    Vector x_next = project_box(u, qp.box);
    st.z = (x_next - u) / sigma;
    st.x = std::move(x_next);
    st.w = inner.point.w;
    st.y = inner.point.y;
    st.A_adj_y = inner.point.a_adj_y;
    st.Ax = qp.A * st.x;
    st.phase2_iterations++;

    summary.residuals = kkt_residuals(st, qp);
    summary.eta_history.push_back(summary.residuals.eta_max);
    if (check_termination(summary.residuals, cfg.tol2)) {
      summary.status = SolveStatus::converged;
      break;
    }

    sigma = update_sigma(sigma, summary.residuals, cfg.sigma_max);
  }

  summary.iterations = k;
  summary.sigma_final = sigma;
  if (summary.eta_history.empty()) summary.residuals = kkt_residuals(st, qp);
  return {std::move(st), std::move(summary)};
}

}  // namespace palqp
