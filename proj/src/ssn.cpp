#include "ssn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace palqp {

namespace {

Vector gather(const Vector& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

void scatter_into(const Vector& small, const std::vector<Index>& idx, Vector& out) {
  for (size_t i = 0; i < idx.size(); ++i) out[idx[i]] = small[static_cast<Index>(i)];
}

// Reduced SPD operator (1+ν)I_p + σQ_PP + ν⁻¹(1+ν)σ A_PᵀA_P, with the
// submatrices realized as masked full applies so matrix-free Q works.
class ReducedOperator final : public LinearOperator {
 public:
  ReducedOperator(const SsnContext& ctx, const ActivePartition& part)
      : ctx_(ctx), part_(part) {}
  Index rows() const override { return part_.p; }
  Index cols() const override { return part_.p; }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    const Index n = ctx_.qp->n();
    const double nu = ctx_.nu();
    const double sigma = ctx_.sigma;
    Vector full = Vector::Zero(n);
    scatter_into(v, part_.interior, full);
    Vector qfull(n);
    ctx_.qp->Q->apply(full, qfull);
    Vector av = ctx_.qp->A * full;
    Vector atav = ctx_.qp->A.transpose() * av;
    out = (1.0 + nu) * v + sigma * gather(qfull, part_.interior) +
          (1.0 + nu) / nu * sigma * gather(atav, part_.interior);
  }
  std::string kind() const override { return "ssn_reduced"; }

 private:
  const SsnContext& ctx_;
  const ActivePartition& part_;
};

// One-Q-apply Newton matrix on (u; v):
//   ((1+ν)u + σ·t ; ν·v − σ·A·t),  t = mask_P(Q·u − Aᵀ·v).
class VhatOperator final : public LinearOperator {
 public:
  VhatOperator(const SsnContext& ctx, const ActivePartition& part)
      : ctx_(ctx), part_(part) {}
  Index rows() const override { return ctx_.qp->n() + ctx_.qp->m(); }
  Index cols() const override { return rows(); }
  bool is_self_adjoint() const override { return false; }
  void apply(const Vector& uv, Vector& out) const override {
    const Index n = ctx_.qp->n();
    const Index m = ctx_.qp->m();
    const double nu = ctx_.nu();
    const double sigma = ctx_.sigma;
    Vector u = uv.head(n);
    Vector v = uv.tail(m);
    Vector qu(n);
    ctx_.qp->Q->apply(u, qu);
    Vector t = qu - ctx_.qp->A.transpose() * v;
    for (Index i = 0; i < n; ++i) {
      if (!part_.in_interior[i]) t[i] = 0.0;
    }
    out.resize(n + m);
    out.head(n) = (1.0 + nu) * u + sigma * t;
    out.tail(m) = nu * v - sigma * (ctx_.qp->A * t);
  }
  std::string kind() const override { return "ssn_vhat"; }

 private:
  const SsnContext& ctx_;
  const ActivePartition& part_;
};

}  // namespace

double eval_phi_value(const SsnContext& ctx, const WRepresentation& w,
                      const Vector& y, const Vector& a_adj_y) {
  const StandardQP& qp = *ctx.qp;
  const double sigma = ctx.sigma;
  const double nu = ctx.nu();

  Vector grad_center = w.q_w - a_adj_y + qp.c;  // Qw − Aᵀy + c
  Vector z = ctx.x_anchor - sigma * grad_center;
  Vector proj = project_box(z, qp.box);

  double value = -grad_center.dot(proj) -
                 (proj - ctx.x_anchor).squaredNorm() / (2.0 * sigma) +
                 0.5 * w.w_hat.dot(w.q_w) - qp.b.dot(y);

  Vector dw = w.w_hat - ctx.w_anchor.w_hat;
  Vector qdw = w.q_w - ctx.w_anchor.q_w;
  value += 0.5 * nu * (dw.dot(qdw) + (y - ctx.y_anchor).squaredNorm());
  return value;
}

PhiEval eval_phi_and_grad(const SsnContext& ctx, const SsnPoint& p) {
  const StandardQP& qp = *ctx.qp;
  const double sigma = ctx.sigma;
  const double nu = ctx.nu();

  PhiEval e;
  Vector grad_center = p.w.q_w - p.a_adj_y + qp.c;
  e.z_point = ctx.x_anchor - sigma * grad_center;
  e.proj_z = project_box(e.z_point, qp.box);

  e.value = -grad_center.dot(e.proj_z) -
            (e.proj_z - ctx.x_anchor).squaredNorm() / (2.0 * sigma) +
            0.5 * p.w.w_hat.dot(p.w.q_w) - qp.b.dot(p.y);
  Vector dw = p.w.w_hat - ctx.w_anchor.w_hat;
  Vector qdw = p.w.q_w - ctx.w_anchor.q_w;
  e.value += 0.5 * nu * (dw.dot(qdw) + (p.y - ctx.y_anchor).squaredNorm());

  Vector q_proj(qp.n());
  qp.Q->apply(e.proj_z, q_proj);
  e.grad_w = (1.0 + nu) * p.w.q_w - q_proj - nu * ctx.w_anchor.q_w;
  e.grad_y = -qp.b + qp.A * e.proj_z + nu * (p.y - ctx.y_anchor);
  e.grad_norm = std::sqrt(e.grad_w.squaredNorm() + e.grad_y.squaredNorm());
  return e;
}

ActivePartition active_partition(const Vector& z_point, const BoxSet& box) {
  if (z_point.size() != box.size())
    throw std::invalid_argument("active_partition: length mismatch");
  ActivePartition part;
  part.n = z_point.size();
  part.in_interior.assign(part.n, 0);
  for (Index i = 0; i < part.n; ++i) {
    if (box.lower[i] < z_point[i] && z_point[i] < box.upper[i]) {
      part.in_interior[i] = 1;
      part.interior.push_back(i);
    }
  }
  part.p = static_cast<Index>(part.interior.size());
  return part;
}

NewtonDirection newton_direction(const SsnContext& ctx, const SsnPoint& point,
                                 const PhiEval& eval,
                                 const ActivePartition& part, double eta_j,
                                 const SsnConfig& cfg) {
  const StandardQP& qp = *ctx.qp;
  const Index n = qp.n();
  const double sigma = ctx.sigma;
  const double nu = ctx.nu();

  // (Q·r1; r2) = −∇φ. Only Q·r1 is determined by the true Newton system, so
  // writing r1 with the carried ŵ vectors changes nothing downstream.
  Vector r1 = eval.proj_z + nu * ctx.w_anchor.w_hat - (1.0 + nu) * point.w.w_hat;
  Vector r2 = -eval.grad_y;

  NewtonDirection dir;

  const bool use_reduced =
      part.p <= cfg.p_fraction_max * static_cast<double>(n) &&
      sigma <= cfg.sigma_switch;

  if (use_reduced) {
    // d_w on the complement is explicit.
    Vector d_w = Vector::Zero(n);
    Vector r1_z_full = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (!part.in_interior[i]) {
        d_w[i] = r1[i] / (1.0 + nu);
        r1_z_full[i] = r1[i];
      }
    }

    if (part.p == 0) {
      dir.d_y = r2 / nu;
      dir.d_w_hat = d_w;
      dir.q_d_w.resize(n);
      qp.Q->apply(dir.d_w_hat, dir.q_d_w);
      dir.path = NewtonPath::reduced_spd;
      dir.ok = true;
      return dir;
    }

    Vector q_r1z(n);
    qp.Q->apply(r1_z_full, q_r1z);
    Vector r1_bar =
        gather(r1, part.interior) - sigma / (1.0 + nu) * gather(q_r1z, part.interior);
    // A_P·(Q_PZ r1^Z): mask the product to the interior block, then apply A.
    Vector q_r1z_masked = Vector::Zero(n);
    for (Index i : part.interior) q_r1z_masked[i] = q_r1z[i];
    Vector r2_bar = r2 + sigma / (1.0 + nu) * (qp.A * q_r1z_masked);

    // t = A_P r̄₁ + r̄₂
    Vector r1_bar_full = Vector::Zero(n);
    scatter_into(r1_bar, part.interior, r1_bar_full);
    Vector t = qp.A * r1_bar_full + r2_bar;
    Vector rhs = r1_bar + sigma / nu * gather(qp.A.transpose() * t, part.interior);

    Vector d_w_p(part.p);
    bool solved = false;
    const SparseMatrix* qs = qp.Q->sparse_backing();
    if (qs && part.p <= cfg.dense_reduced_limit) {
      // Assemble the p×p system densely and factor it.
      Matrix M = Matrix::Zero(part.p, part.p);
      for (Index jj = 0; jj < part.p; ++jj) {
        const Index col = part.interior[jj];
        for (SparseMatrix::InnerIterator it(*qs, col); it; ++it) {
          if (part.in_interior[it.row()]) {
            // position of it.row() inside the interior list
            const auto pos = std::lower_bound(part.interior.begin(),
                                              part.interior.end(), it.row()) -
                             part.interior.begin();
            M(pos, jj) += sigma * it.value();
          }
        }
      }
      Matrix Ap(qp.m(), part.p);
      for (Index jj = 0; jj < part.p; ++jj) {
        Ap.col(jj) = Vector(qp.A.col(part.interior[jj]));
      }
      M.noalias() += (1.0 + nu) / nu * sigma * Ap.transpose() * Ap;
      M.diagonal().array() += 1.0 + nu;
      Eigen::LLT<Matrix> llt(M);
      if (llt.info() == Eigen::Success) {
        d_w_p = llt.solve(rhs);
        dir.solve_residual = (M * d_w_p - rhs).norm();
        solved = dir.solve_residual <= std::max(eta_j, 1e-9 * rhs.norm());
      }
    }
    if (!solved) {
      ReducedOperator op(ctx, part);
      const double bound =
          std::sqrt(ctx.norm2_q * ctx.norm2_q + ctx.norm2_a * ctx.norm2_a);
      const double tol = eta_j / std::max(bound, 1.0);
      d_w_p.setZero(part.p);
      IterSolveReport rep =
          minres_solve(op, rhs, d_w_p, tol, cfg.krylov_max_iter);
      dir.solve_residual = rep.residual_norm;
      dir.solve_iterations = rep.iterations;
      solved = rep.converged;
    }

    if (solved) {
      scatter_into(d_w_p, part.interior, d_w);
      Vector d_w_p_full = Vector::Zero(n);
      scatter_into(d_w_p, part.interior, d_w_p_full);
      Vector ap_dwp = qp.A * d_w_p_full;
      dir.d_y = (t - (1.0 + nu) * ap_dwp) / nu;
      dir.d_w_hat = d_w;
      dir.q_d_w.resize(n);
      qp.Q->apply(dir.d_w_hat, dir.q_d_w);
      dir.path = NewtonPath::reduced_spd;
      dir.ok = true;
      return dir;
    }
  }

  // Nonsymmetric route on the full system.
  {
    VhatOperator op(ctx, part);
    Vector rhs(n + qp.m());
    rhs << r1, r2;
    Vector sol = Vector::Zero(n + qp.m());
    const double tol = eta_j / std::max(ctx.norm2_q, 1.0);
    IterSolveReport rep = bicgstab_solve(op, rhs, sol, tol, cfg.krylov_max_iter);
    dir.solve_residual = rep.residual_norm;
    dir.solve_iterations = rep.iterations;
    if (rep.converged) {
      dir.d_w_hat = sol.head(n);
      dir.d_y = sol.tail(qp.m());
      dir.q_d_w.resize(n);
      qp.Q->apply(dir.d_w_hat, dir.q_d_w);
      dir.path = NewtonPath::nonsymmetric_vhat;
      dir.ok = true;
      return dir;
    }
  }

  // Both Krylov routes failed: steepest descent keeps the outer loop alive.
  dir.d_w_hat = -eval.grad_w;
  dir.d_y = -eval.grad_y;
  dir.q_d_w.resize(n);
  qp.Q->apply(dir.d_w_hat, dir.q_d_w);
  dir.path = NewtonPath::gradient_fallback;
  dir.ok = false;
  return dir;
}

ArmijoResult armijo_search(const SsnContext& ctx, const SsnPoint& point,
                           const NewtonDirection& dir, const PhiEval& eval,
                           const Vector& a_adj_dy, const SsnConfig& cfg) {
  ArmijoResult res;
  const double slope = eval.grad_w.dot(dir.d_w_hat) + eval.grad_y.dot(dir.d_y);
  if (!(slope < 0.0)) {
    res.ok = false;  // non-descent direction: broken Newton solve upstream
    return res;
  }

  double alpha = 1.0;
  WRepresentation w_trial;
  for (int m = 0; m <= cfg.max_ls_steps; ++m) {
    w_trial.w_hat = point.w.w_hat + alpha * dir.d_w_hat;
    w_trial.q_w = point.w.q_w + alpha * dir.q_d_w;
    Vector y_trial = point.y + alpha * dir.d_y;
    Vector a_adj_y_trial = point.a_adj_y + alpha * a_adj_dy;
    const double val = eval_phi_value(ctx, w_trial, y_trial, a_adj_y_trial);
    if (val <= eval.value + cfg.rho_ls * alpha * slope) {
      res.alpha = alpha;
      res.backtracks = m;
      res.ok = true;
      res.value = val;
      return res;
    }
    alpha *= cfg.delta_ls;
  }
  res.ok = false;
  res.backtracks = cfg.max_ls_steps;
  return res;
}

SsnResult ssn_solve(const SsnContext& ctx, SsnPoint start, const SsnConfig& cfg,
                    const SsnExitTest& exit_test) {
  SsnResult out;
  out.point = std::move(start);
  out.eval = eval_phi_and_grad(ctx, out.point);

  int consecutive_ls_failures = 0;
  for (int j = 0; j < cfg.max_newton_iter; ++j) {
    if (exit_test(out.point, out.eval)) {
      out.status = SolveStatus::converged;
      return out;
    }

    const double eta_j =
        std::min(cfg.eta_bar, std::pow(out.eval.grad_norm, 1.0 + cfg.nu_exp));
    ActivePartition part = active_partition(out.eval.z_point, ctx.qp->box);
    NewtonDirection dir =
        newton_direction(ctx, out.point, out.eval, part, eta_j, cfg);
    if (dir.path == NewtonPath::gradient_fallback) out.used_fallback = true;

    Vector a_adj_dy = ctx.qp->A.transpose() * dir.d_y;
    ArmijoResult ls = armijo_search(ctx, out.point, dir, out.eval, a_adj_dy, cfg);
    if (!ls.ok && dir.path != NewtonPath::gradient_fallback) {
      // Newton step rejected: retry once along steepest descent.
      dir.d_w_hat = -out.eval.grad_w;
      dir.d_y = -out.eval.grad_y;
      ctx.qp->Q->apply(dir.d_w_hat, dir.q_d_w);
      dir.path = NewtonPath::gradient_fallback;
      out.used_fallback = true;
      a_adj_dy = ctx.qp->A.transpose() * dir.d_y;
      ls = armijo_search(ctx, out.point, dir, out.eval, a_adj_dy, cfg);
    }
    if (!ls.ok) {
      if (++consecutive_ls_failures >= 2) {
        out.status = SolveStatus::stalled;
        return out;
      }
      out.iterations = j + 1;
      continue;
    }
    consecutive_ls_failures = 0;

    out.point.w.w_hat += ls.alpha * dir.d_w_hat;
    out.point.w.q_w += ls.alpha * dir.q_d_w;
    out.point.y += ls.alpha * dir.d_y;
    out.point.a_adj_y += ls.alpha * a_adj_dy;
    out.iterations = j + 1;
    out.eval = eval_phi_and_grad(ctx, out.point);
  }

  out.status = exit_test(out.point, out.eval) ? SolveStatus::converged
                                              : SolveStatus::max_iterations;
  return out;
}

}  // namespace palqp
