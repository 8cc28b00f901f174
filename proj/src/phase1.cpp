#include "phase1.hpp"

#include <cmath>
#include <stdexcept>

namespace palqp {

namespace {

class ShiftedOperator final : public LinearOperator {
 public:
  ShiftedOperator(const LinearOperator& q, double sigma) : q_(q), sigma_(sigma) {}
  Index rows() const override { return q_.rows(); }
  Index cols() const override { return q_.cols(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    q_.apply(v, out);
    out = v + sigma_ * out;
  }
  std::string kind() const override { return "identity_plus_sigma_q"; }

 private:
  const LinearOperator& q_;
  double sigma_;
};

class NormalEquationsOperator final : public LinearOperator {
 public:
  NormalEquationsOperator(const SparseMatrix& A, double sigma)
      : A_(A), sigma_(sigma) {}
  Index rows() const override { return A_.rows(); }
  Index cols() const override { return A_.rows(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    Vector t = A_.transpose() * v;
    out.noalias() = A_ * t;
    out *= sigma_;
  }
  std::string kind() const override { return "sigma_a_at"; }

 private:
  const SparseMatrix& A_;
  double sigma_;
};

}  // namespace

YStepSolver::YStepSolver(const StandardQP& qp, double sigma,
                         const Phase1Config& cfg)
    : qp_(qp), sigma_(sigma), max_iter_(cfg.y_max_iter) {
  const Index m = qp.m();
  bool want_direct = cfg.solver_mode != LinearSolverMode::iterative;
  if (cfg.solver_mode == LinearSolverMode::automatic && m > cfg.direct_m_limit)
    want_direct = false;
  if (want_direct) {
    SparseMatrix AAt = (qp.A * SparseMatrix(qp.A.transpose())).pruned();
    AAt.makeCompressed();
    if (cfg.solver_mode == LinearSolverMode::automatic &&
        chol_fill_estimate(AAt, cfg.ordering) > cfg.direct_fill_limit) {
      want_direct = false;
    } else {
      CholOptions copt;
      copt.ordering = cfg.ordering;
      factor_ = chol_factor(AAt, copt);
      direct_ = true;
    }
  }
}

Vector YStepSolver::solve(const Vector& g, double eps_k, const Vector& warm,
                          IterSolveReport* report) const {
  if (direct_) {
    Vector y = chol_solve(factor_, g / sigma_);
    if (report) {
      Vector r = g - sigma_ * (qp_.A * Vector(qp_.A.transpose() * y));
      report->residual_norm = r.norm();
      report->iterations = 0;
      report->converged = true;
    }
    return y;
  }
  NormalEquationsOperator op(qp_.A, sigma_);
  Vector y = warm;
  IterSolveReport rep = minres_solve(op, g, y, eps_k, max_iter_);
  if (!rep.converged) {
    rep = minres_solve(op, g, y, eps_k, 2 * max_iter_);
  }
  if (report) *report = rep;
  return y;
}

WRepresentation solve_w_step(const LinearOperator& Q, const Vector& h,
                             double sigma, double eps_k, double norm2_q,
                             const Vector& warm_hat, int max_iter,
                             IterSolveReport* report) {
  ShiftedOperator op(Q, sigma);
  const double tol = eps_k / std::max(norm2_q, 1e-300);
  WRepresentation w;
  w.w_hat = warm_hat;
  IterSolveReport rep = minres_solve(op, h, w.w_hat, tol, max_iter);
  if (!rep.converged) {
    rep = minres_solve(op, h, w.w_hat, tol, 2 * max_iter);
  }
  w.q_w.resize(h.size());
  Q.apply(w.w_hat, w.q_w);
  if (report) *report = rep;
  return w;
}

Vector update_z(const Vector& m_center, double sigma, const BoxSet& box) {
  Vector proj = project_box(-sigma * m_center, box);
  return m_center + proj / sigma;
}

void update_x_phase1(IterateState& state, const StandardQP& qp, double sigma,
                     double tau) {
  Vector resid = state.z - state.w.q_w + state.A_adj_y - qp.c;
  state.x += tau * sigma * resid;
  state.Ax = qp.A * state.x;
}

std::pair<IterateState, Phase1Summary> phase1_solve(const StandardQP& qp,
                                                    const Phase1Config& cfg,
                                                    IterateState start,
                                                    const OperatorStats& stats) {
  qp.validate();
  if (!(cfg.tau > 0.0 && cfg.tau < 2.0))
    throw std::invalid_argument("phase1: tau must lie in (0, 2)");

  const double sigma = cfg.sigma > 0.0
                           ? cfg.sigma
                           : (1.0 + qp.b.norm()) / (1.0 + qp.c.norm());

  IterateState st = std::move(start);
  st.refresh_caches(qp);

  Phase1Summary summary;
  summary.sigma = sigma;
  summary.eta_history.reserve(cfg.max_iter1);

  YStepSolver y_solver(qp, sigma, cfg);
  summary.chol_skipped_pivots = y_solver.skipped_pivots();

  const double norm2_q = stats.norm2_estimate;
  const auto& Q = *qp.Q;

  auto assemble_g = [&](const Vector& z, const Vector& qw) {
    // normal-equations right-hand side (b − Ax) − σA(z − Qw − c)
    Vector t = z - qw - qp.c;
    return Vector((qp.b - st.Ax) - sigma * (qp.A * t));
  };
  auto assemble_h = [&](const Vector& z, const Vector& a_adj_y) {
    // right-hand side of (I+σQ)w = h from the dual block minimization
    return Vector(st.x + sigma * (z + a_adj_y - qp.c));
  };

  bool stalled = false;
  int k = 0;
  while (k < cfg.max_iter1) {
    ++k;
    const double eps_k =
        std::min(cfg.eps0, 1.0 / std::pow(static_cast<double>(k), cfg.eps_exponent));

    IterSolveReport w_rep;
    if (cfg.update_order == UpdateOrder::y_first) {
      // sweep ȳ → w̄ → z → w → y
      Vector y_bar =
          y_solver.solve(assemble_g(st.z, st.w.q_w), eps_k, st.y, nullptr);
      Vector a_adj_ybar = qp.A.transpose() * y_bar;

      WRepresentation w_bar =
          solve_w_step(Q, assemble_h(st.z, a_adj_ybar), sigma, eps_k, norm2_q,
                       st.w.w_hat, cfg.w_max_iter, &w_rep);
      if (!w_rep.converged) {
        stalled = true;
        break;
      }

      Vector m_center = w_bar.q_w - a_adj_ybar + qp.c - st.x / sigma;
      st.z = update_z(m_center, sigma, qp.box);

      st.w = solve_w_step(Q, assemble_h(st.z, a_adj_ybar), sigma, eps_k,
                          norm2_q, w_bar.w_hat, cfg.w_max_iter, &w_rep);
      if (!w_rep.converged) {
        stalled = true;
        break;
      }

      st.y = y_solver.solve(assemble_g(st.z, st.w.q_w), eps_k, y_bar, nullptr);
      st.A_adj_y = qp.A.transpose() * st.y;
    } else {
      // sweep w̄ → ȳ → z → y → w
      WRepresentation w_bar =
          solve_w_step(Q, assemble_h(st.z, st.A_adj_y), sigma, eps_k, norm2_q,
                       st.w.w_hat, cfg.w_max_iter, &w_rep);
      if (!w_rep.converged) {
        stalled = true;
        break;
      }

      Vector y_bar =
          y_solver.solve(assemble_g(st.z, w_bar.q_w), eps_k, st.y, nullptr);
      Vector a_adj_ybar = qp.A.transpose() * y_bar;

      Vector m_center = w_bar.q_w - a_adj_ybar + qp.c - st.x / sigma;
      st.z = update_z(m_center, sigma, qp.box);

      st.y = y_solver.solve(assemble_g(st.z, w_bar.q_w), eps_k, y_bar, nullptr);
      st.A_adj_y = qp.A.transpose() * st.y;

      st.w = solve_w_step(Q, assemble_h(st.z, st.A_adj_y), sigma, eps_k,
                          norm2_q, w_bar.w_hat, cfg.w_max_iter, &w_rep);
      if (!w_rep.converged) {
        stalled = true;
        break;
      }
    }

    update_x_phase1(st, qp, sigma, cfg.tau);
    st.phase1_iterations++;

    summary.residuals = kkt_residuals(st, qp);
    summary.eta_history.push_back(summary.residuals.eta_max);
    if (check_termination(summary.residuals, cfg.tol1)) {
      summary.status = SolveStatus::converged;
      break;
    }
  }

  summary.iterations = k;
  if (stalled) {
    summary.status = SolveStatus::stalled;
    summary.residuals = kkt_residuals(st, qp);
  } else if (summary.status != SolveStatus::converged) {
    summary.status = SolveStatus::max_iterations;
    if (summary.eta_history.empty()) summary.residuals = kkt_residuals(st, qp);
  }
  return {std::move(st), std::move(summary)};
}

}  // namespace palqp
