#include "linsolve.hpp"

#include <Eigen/OrderingMethods>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace palqp {

namespace {

// Permuted pattern of the upper triangle of M, column compressed:
// column k holds rows i < k of P·M·Pᵀ; diagonal values kept separately.
struct PermutedUpper {
  std::vector<int> col_ptr;
  std::vector<int> row_idx;
  std::vector<double> values;
  Vector diag;
};

PermutedUpper build_permuted_upper(const SparseMatrix& M,
                                   const std::vector<int>& perm_inv) {
  const Index n = M.rows();
  PermutedUpper up;
  up.diag = Vector::Zero(n);
  std::vector<int> counts(n, 0);
  for (Index c = 0; c < M.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
      int pi = perm_inv[it.row()];
      int pj = perm_inv[it.col()];
      if (pi == pj) {
        up.diag[pi] = it.value();
      } else if (pi < pj) {
        counts[pj]++;
      }
    }
  }
  up.col_ptr.assign(n + 1, 0);
  for (Index k = 0; k < n; ++k) up.col_ptr[k + 1] = up.col_ptr[k] + counts[k];
  up.row_idx.resize(up.col_ptr[n]);
  up.values.resize(up.col_ptr[n]);
  std::vector<int> next(up.col_ptr.begin(), up.col_ptr.end() - 1);
  for (Index c = 0; c < M.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
      int pi = perm_inv[it.row()];
      int pj = perm_inv[it.col()];
      if (pi < pj) {
        up.row_idx[next[pj]] = pi;
        up.values[next[pj]] = it.value();
        next[pj]++;
      }
    }
  }
  return up;
}

std::vector<int> make_permutation(const SparseMatrix& M, Ordering ordering) {
  const Index n = M.rows();
  std::vector<int> perm(n);
  if (ordering == Ordering::natural) {
    for (Index i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    return perm;
  }
  Eigen::AMDOrdering<int> amd;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P;
  SparseMatrix Msym = M.selfadjointView<Eigen::Lower>();
  amd(Msym, P);
  // P.indices()[i] is the new position of original index i; perm[k] is the
  // original index placed at position k.
  for (Index i = 0; i < n; ++i) perm[P.indices()[i]] = static_cast<int>(i);
  return perm;
}

// Elimination tree and per-column counts of L from the permuted upper pattern.
void symbolic_analysis(const PermutedUpper& up, Index n,
                       std::vector<int>& parent, std::vector<int>& l_count) {
  parent.assign(n, -1);
  l_count.assign(n, 0);
  std::vector<int> flag(n, -1);
  for (Index k = 0; k < n; ++k) {
    flag[k] = static_cast<int>(k);
    for (int p = up.col_ptr[k]; p < up.col_ptr[k + 1]; ++p) {
      int i = up.row_idx[p];
      while (flag[i] != static_cast<int>(k)) {
        if (parent[i] == -1) parent[i] = static_cast<int>(k);
        l_count[i]++;  // L(k, i) becomes a nonzero of column i
        flag[i] = static_cast<int>(k);
        i = parent[i];
      }
    }
  }
}

}  // namespace

Index chol_fill_estimate(const SparseMatrix& M, Ordering ordering) {
  if (M.rows() != M.cols()) throw std::invalid_argument("chol: not square");
  const Index n = M.rows();
  std::vector<int> perm = make_permutation(M, ordering);
  std::vector<int> perm_inv(n);
  for (Index i = 0; i < n; ++i) perm_inv[perm[i]] = static_cast<int>(i);
  PermutedUpper up = build_permuted_upper(M, perm_inv);
  std::vector<int> parent, l_count;
  symbolic_analysis(up, n, parent, l_count);
  Index total = 0;
  for (int c : l_count) total += c;
  return total + n;
}

CholFactor chol_factor(const SparseMatrix& M, const CholOptions& opt) {
  if (M.rows() != M.cols()) throw std::invalid_argument("chol: not square");
  const Index n = M.rows();

  CholFactor f;
  f.n = n;
  f.pivot_tol = opt.pivot_tol;
  f.perm = make_permutation(M, opt.ordering);
  f.perm_inv.resize(n);
  for (Index i = 0; i < n; ++i) f.perm_inv[f.perm[i]] = static_cast<int>(i);

  PermutedUpper up = build_permuted_upper(M, f.perm_inv);
  std::vector<int> parent, l_count;
  symbolic_analysis(up, n, parent, l_count);

  f.col_ptr.assign(n + 1, 0);
  for (Index k = 0; k < n; ++k) f.col_ptr[k + 1] = f.col_ptr[k] + l_count[k];
  f.row_idx.assign(f.col_ptr[n], 0);
  f.values.assign(f.col_ptr[n], 0.0);
  f.diag = Vector::Zero(n);

  const double max_diag = (n > 0) ? up.diag.cwiseAbs().maxCoeff() : 0.0;
  const double skip_threshold = opt.pivot_tol * std::max(max_diag, 1e-300);

  // Up-looking numeric factorization: step k computes row k of L. A column
  // whose pivot was skipped carries zeros, so later rows see it as absent.
  std::vector<double> y(n, 0.0);
  std::vector<int> pattern(n), flag(n, -1), l_next(n);
  std::vector<bool> skip(n, false);
  for (Index k = 0; k < n; ++k) l_next[k] = f.col_ptr[k];

  for (Index k = 0; k < n; ++k) {
    int top = static_cast<int>(n);
    flag[k] = static_cast<int>(k);
    for (int p = up.col_ptr[k]; p < up.col_ptr[k + 1]; ++p) {
      int i = up.row_idx[p];
      y[i] += up.values[p];
      int len = 0;
      while (flag[i] != static_cast<int>(k)) {
        pattern[len++] = i;
        flag[i] = static_cast<int>(k);
        i = parent[i];
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double dk = up.diag[k];
    for (int t = top; t < static_cast<int>(n); ++t) {
      const int j = pattern[t];
      const double yj = y[j];
      y[j] = 0.0;
      const double lkj = skip[j] ? 0.0 : yj / f.diag[j];
      for (int p = f.col_ptr[j]; p < l_next[j]; ++p) {
        y[f.row_idx[p]] -= f.values[p] * yj;
      }
      dk -= lkj * yj;
      f.row_idx[l_next[j]] = static_cast<int>(k);
      f.values[l_next[j]] = lkj;
      l_next[j]++;
    }
    if (dk < -skip_threshold) {
      throw std::runtime_error(
          "chol_factor: matrix is not positive semidefinite (pivot " +
          std::to_string(dk) + " at step " + std::to_string(k) + ")");
    }
    if (dk < skip_threshold) {
      skip[k] = true;
      f.diag[k] = 0.0;
      f.skipped.push_back(k);
    } else {
      f.diag[k] = dk;
    }
  }
  return f;
}

Vector chol_solve(const CholFactor& f, const Vector& rhs) {
  if (rhs.size() != f.n) throw std::invalid_argument("chol_solve: rhs length");
  const Index n = f.n;
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = rhs[f.perm[i]];
  // forward: L z = y (unit diagonal)
  for (Index j = 0; j < n; ++j) {
    const double yj = y[j];
    if (yj == 0.0) continue;
    for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) {
      y[f.row_idx[p]] -= f.values[p] * yj;
    }
  }
  // diagonal pseudo-inverse: skipped pivots zero their component
  for (Index j = 0; j < n; ++j) {
    y[j] = (f.diag[j] > 0.0) ? y[j] / f.diag[j] : 0.0;
  }
  // backward: Lᵀ x = z
  for (Index j = n - 1; j >= 0; --j) {
    double acc = y[j];
    for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) {
      acc -= f.values[p] * y[f.row_idx[p]];
    }
    y[j] = acc;
    if (j == 0) break;
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[f.perm[i]] = y[i];
  return x;
}

IterSolveReport minres_solve(const LinearOperator& op, const Vector& rhs,
                             Vector& x, double tol_abs, int max_iter,
                             const std::optional<Vector>& jacobi) {
  const Index n = rhs.size();
  IterSolveReport rep;
  if (x.size() != n) x = Vector::Zero(n);

  Vector minv;
  double m_max = 1.0;
  if (jacobi) {
    Vector mpos = jacobi->cwiseMax(1e-300);
    minv = mpos.cwiseInverse();
    m_max = mpos.maxCoeff();
  }
  auto precond = [&](const Vector& v) -> Vector {
    return jacobi ? Vector(minv.cwiseProduct(v)) : v;
  };
  auto true_residual = [&](const Vector& xx) -> double {
    Vector ax(n);
    op.apply(xx, ax);
    rep.iterations++;
    return (rhs - ax).norm();
  };

  Vector r1 = rhs;
  if (x.squaredNorm() > 0.0) {
    Vector ax(n);
    op.apply(x, ax);
    rep.iterations++;
    r1 -= ax;
  }
  rep.residual_norm = r1.norm();
  if (rep.residual_norm <= tol_abs) {
    rep.converged = true;
    return rep;
  }

  Vector y = precond(r1);
  double beta1sq = r1.dot(y);
  if (beta1sq <= 0.0) {
    rep.breakdown = true;
    return rep;
  }
  double beta = std::sqrt(beta1sq);
  double oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta;
  double cs = -1.0, sn = 0.0;
  Vector r2 = r1;
  Vector w = Vector::Zero(n), w1 = Vector::Zero(n), w2 = Vector::Zero(n);

  // phibar tracks the M⁻¹-norm of the residual; the loop exits through a
  // true-residual check so the report never lies.
  double target = tol_abs / std::sqrt(m_max);

  Vector v(n), av(n);
  while (rep.iterations < max_iter) {
    v = y / beta;
    op.apply(v, av);
    rep.iterations++;
    y = av;
    if (oldb > 0.0) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = precond(r2);
    oldb = beta;
    const double betasq = r2.dot(y);
    if (betasq < 0.0) {
      rep.breakdown = true;
      break;
    }
    beta = std::sqrt(betasq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    if (phibar <= target || beta <= 1e-300) {
      const double tr = true_residual(x);
      rep.residual_norm = tr;
      if (tr <= tol_abs) {
        rep.converged = true;
        return rep;
      }
      if (beta <= 1e-300) {
        rep.breakdown = true;  // Krylov space exhausted short of the target
        return rep;
      }
      target *= 0.25;  // recurrence estimate was optimistic; keep going
    }
  }

  rep.residual_norm = true_residual(x);
  rep.converged = rep.residual_norm <= tol_abs;
  return rep;
}

IterSolveReport bicgstab_solve(const LinearOperator& op, const Vector& rhs,
                               Vector& x, double tol_abs, int max_iter) {
  const Index n = rhs.size();
  IterSolveReport rep;
  if (x.size() != n) x = Vector::Zero(n);

  Vector r(n);
  if (x.squaredNorm() > 0.0) {
    op.apply(x, r);
    rep.iterations++;
    r = rhs - r;
  } else {
    r = rhs;
  }
  double res = r.norm();
  Vector best_x = x;
  double best_res = res;
  if (res <= tol_abs) {
    rep.converged = true;
    rep.residual_norm = res;
    return rep;
  }

  const Vector r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Vector p = Vector::Zero(n), v = Vector::Zero(n), t(n);
  bool first = true;

  while (rep.iterations < max_iter) {
    const double rho_next = r0.dot(r);
    if (std::abs(rho_next) < 1e-300 * std::max(1.0, res * res)) {
      rep.breakdown = true;  // rho breakdown; best iterate is returned
      break;
    }
    if (first) {
      p = r;
      first = false;
    } else {
      const double beta = (rho_next / rho) * (alpha / omega);
      p = r + beta * (p - omega * v);
    }
    rho = rho_next;

    op.apply(p, v);
    rep.iterations++;
    const double r0v = r0.dot(v);
    if (std::abs(r0v) < 1e-300) {
      rep.breakdown = true;
      break;
    }
    alpha = rho / r0v;
    Vector s = r - alpha * v;
    x += alpha * p;
    res = s.norm();
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= tol_abs || rep.iterations >= max_iter) {
      r = s;
      break;
    }

    op.apply(s, t);
    rep.iterations++;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) {
      rep.breakdown = true;
      r = s;
      break;
    }
    omega = t.dot(s) / tt;
    x += omega * s;
    r = s - omega * t;
    res = r.norm();
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= tol_abs) break;
    if (std::abs(omega) < 1e-300) {
      rep.breakdown = true;
      break;
    }
  }

  if (best_res < res) x = best_x;
  // Recompute the true residual so the report is trustworthy.
  Vector ax(n);
  op.apply(x, ax);
  rep.residual_norm = (rhs - ax).norm();
  rep.converged = rep.residual_norm <= tol_abs;
  return rep;
}

}  // namespace palqp
