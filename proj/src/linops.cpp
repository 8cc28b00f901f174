#include "linops.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace palqp {

void LinearOperator::apply_adjoint(const Vector& v, Vector& out) const {
  if (!is_self_adjoint()) {
    throw std::logic_error("operator '" + kind() +
                           "' does not implement apply_adjoint");
  }
  apply(v, out);
}

Vector LinearOperator::apply(const Vector& v) const {
  Vector out(rows());
  apply(v, out);
  return out;
}

Vector LinearOperator::apply_adjoint(const Vector& v) const {
  Vector out(cols());
  apply_adjoint(v, out);
  return out;
}

namespace {

class ZeroOperator final : public LinearOperator {
 public:
  explicit ZeroOperator(Index n) : n_(n) {}
  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    if (v.size() != n_) throw std::invalid_argument("zero operator: size");
    out.setZero(n_);
  }
  std::string kind() const override { return "zero"; }

 private:
  Index n_;
};

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(Vector d) : d_(std::move(d)) {}
  Index rows() const override { return d_.size(); }
  Index cols() const override { return d_.size(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    if (v.size() != d_.size())
      throw std::invalid_argument("diagonal operator: size");
    out = d_.cwiseProduct(v);
  }
  std::string kind() const override { return "diagonal"; }

 private:
  Vector d_;
};

class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(Matrix m, bool sa) : m_(std::move(m)), self_adjoint_(sa) {
    if (self_adjoint_ && m_.rows() != m_.cols())
      throw std::invalid_argument("dense operator: self-adjoint but not square");
  }
  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  bool is_self_adjoint() const override { return self_adjoint_; }
  void apply(const Vector& v, Vector& out) const override {
    out.noalias() = m_ * v;
  }
  void apply_adjoint(const Vector& v, Vector& out) const override {
    out.noalias() = m_.transpose() * v;
  }
  std::string kind() const override { return "dense"; }

 private:
  Matrix m_;
  bool self_adjoint_;
};

class SparseOperator final : public LinearOperator {
 public:
  SparseOperator(SparseMatrix m, bool sa) : m_(std::move(m)), self_adjoint_(sa) {
    m_.makeCompressed();
  }
  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  bool is_self_adjoint() const override { return self_adjoint_; }
  void apply(const Vector& v, Vector& out) const override {
    out.noalias() = m_ * v;
  }
  void apply_adjoint(const Vector& v, Vector& out) const override {
    out.noalias() = m_.transpose() * v;
  }
  const SparseMatrix* sparse_backing() const override { return &m_; }
  std::string kind() const override { return "sparse"; }

 private:
  SparseMatrix m_;
  bool self_adjoint_;
};

class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(OperatorPtr op, double alpha)
      : op_(std::move(op)), alpha_(alpha) {}
  Index rows() const override { return op_->rows(); }
  Index cols() const override { return op_->cols(); }
  bool is_self_adjoint() const override { return op_->is_self_adjoint(); }
  void apply(const Vector& v, Vector& out) const override {
    op_->apply(v, out);
    out *= alpha_;
  }
  void apply_adjoint(const Vector& v, Vector& out) const override {
    op_->apply_adjoint(v, out);
    out *= alpha_;
  }
  std::string kind() const override { return "scaled:" + op_->kind(); }

 private:
  OperatorPtr op_;
  double alpha_;
};

class PaddedOperator final : public LinearOperator {
 public:
  PaddedOperator(OperatorPtr op, Index tail) : op_(std::move(op)), tail_(tail) {
    if (op_->rows() != op_->cols() || !op_->is_self_adjoint())
      throw std::invalid_argument("pad_operator: head block must be self-adjoint");
  }
  Index rows() const override { return op_->rows() + tail_; }
  Index cols() const override { return rows(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    const Index h = op_->rows();
    if (v.size() != h + tail_) throw std::invalid_argument("pad_operator: size");
    out.resize(h + tail_);
    Vector head = v.head(h);
    Vector ohead(h);
    op_->apply(head, ohead);
    out.head(h) = ohead;
    out.tail(tail_).setZero();
  }
  std::string kind() const override { return "padded:" + op_->kind(); }

 private:
  OperatorPtr op_;
  Index tail_;
};

class QapOperator final : public LinearOperator {
 public:
  QapOperator(Matrix A, Matrix B, Matrix S, Matrix T)
      : A_(std::move(A)), B_(std::move(B)), S_(std::move(S)), T_(std::move(T)) {
    d_ = A_.rows();
    if (A_.cols() != d_ || B_.rows() != d_ || B_.cols() != d_ ||
        S_.rows() != d_ || S_.cols() != d_ || T_.rows() != d_ ||
        T_.cols() != d_) {
      throw std::invalid_argument("qap_operator: inputs must all be d×d");
    }
  }
  Index rows() const override { return d_ * d_; }
  Index cols() const override { return d_ * d_; }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    if (v.size() != d_ * d_) throw std::invalid_argument("qap_operator: size");
    Eigen::Map<const Matrix> X(v.data(), d_, d_);
    out.resize(d_ * d_);
    Eigen::Map<Matrix> Y(out.data(), d_, d_);
    Y.noalias() = A_ * X * B_;
    Y.noalias() -= S_ * X;
    Y.noalias() -= X * T_;
  }
  std::string kind() const override { return "qap"; }

 private:
  Matrix A_, B_, S_, T_;
  Index d_;
};

class BiqOperator final : public LinearOperator {
 public:
  BiqOperator(Matrix Q, double shift) : Q_(std::move(Q)), shift_(shift) {
    d_ = Q_.rows();
    if (Q_.cols() != d_) throw std::invalid_argument("biq_operator: Q not square");
  }
  Index rows() const override { return svec_dim(d_); }
  Index cols() const override { return svec_dim(d_); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    Matrix X = smat(v);
    if (X.rows() != d_) throw std::invalid_argument("biq_operator: size");
    Matrix Y = Q_ * X * Q_;
    // Q·X·Q is symmetric up to roundoff; symmetrize so svec stays valid.
    Y = 0.5 * (Y + Y.transpose()).eval();
    out = svec(Y);
    out -= shift_ * v;
  }
  std::string kind() const override { return "biq"; }

 private:
  Matrix Q_;
  double shift_;
  Index d_;
};

class LowRankPlusDiagOperator final : public LinearOperator {
 public:
  LowRankPlusDiagOperator(SparseMatrix F, Vector mean, double scale, Vector diag)
      : F_(std::move(F)),
        mean_(std::move(mean)),
        scale_(scale),
        diag_(std::move(diag)) {
    if (F_.rows() != mean_.size() || F_.rows() != diag_.size())
      throw std::invalid_argument("lowrank_plus_diag: size mismatch");
    F_.makeCompressed();
  }
  Index rows() const override { return F_.rows(); }
  Index cols() const override { return F_.rows(); }
  bool is_self_adjoint() const override { return true; }
  void apply(const Vector& v, Vector& out) const override {
    // Fc = F − mean·eᵀ, so Fcᵀv = Fᵀv − ⟨mean, v⟩·e and
    // Fc·u = F·u − mean·(eᵀu).
    Vector u = F_.transpose() * v;
    u.array() -= mean_.dot(v);
    out.noalias() = F_ * u;
    out -= mean_ * u.sum();
    out *= scale_;
    out += diag_.cwiseProduct(v);
  }
  std::string kind() const override { return "lowrank_plus_diag"; }

 private:
  SparseMatrix F_;
  Vector mean_;
  double scale_;
  Vector diag_;
};

}  // namespace

OperatorPtr zero_operator(Index n) { return std::make_shared<ZeroOperator>(n); }

OperatorPtr identity_operator(Index n) {
  return std::make_shared<DiagonalOperator>(Vector::Ones(n));
}

OperatorPtr diagonal_operator(Vector d) {
  return std::make_shared<DiagonalOperator>(std::move(d));
}

OperatorPtr dense_operator(Matrix m, bool self_adjoint) {
  return std::make_shared<DenseOperator>(std::move(m), self_adjoint);
}

OperatorPtr sparse_operator(SparseMatrix m, bool self_adjoint) {
  return std::make_shared<SparseOperator>(std::move(m), self_adjoint);
}

OperatorPtr scaled_operator(OperatorPtr op, double alpha) {
  return std::make_shared<ScaledOperator>(std::move(op), alpha);
}

OperatorPtr pad_operator(OperatorPtr op, Index zero_tail) {
  return std::make_shared<PaddedOperator>(std::move(op), zero_tail);
}

OperatorPtr qap_operator(const Matrix& A, const Matrix& B, const Matrix& S,
                         const Matrix& T) {
  return std::make_shared<QapOperator>(A, B, S, T);
}

OperatorPtr biq_operator(const Matrix& Q, double shift) {
  return std::make_shared<BiqOperator>(Q, shift);
}

OperatorPtr lowrank_plus_diag_operator(SparseMatrix F, Vector col_mean,
                                       double scale, Vector diag) {
  return std::make_shared<LowRankPlusDiagOperator>(
      std::move(F), std::move(col_mean), scale, std::move(diag));
}

double estimate_spectral_norm(const LinearOperator& op,
                              const SpectralConfig& cfg) {
  const Index n = op.cols();
  const double floor = std::numeric_limits<double>::epsilon();
  if (n == 0) return floor;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  double nv = v.norm();
  if (nv == 0.0) return floor;
  v /= nv;

  double lambda = 0.0;
  Vector w(n);
  for (int it = 0; it < cfg.power_budget; ++it) {
    op.apply(v, w);
    double nw = w.norm();
    if (nw <= floor) return floor;  // hit (numerical) null space
    double next = v.dot(w);         // Rayleigh quotient, v normalized
    v = w / nw;
    if (it > 0 && std::abs(next - lambda) <= cfg.power_rel_change *
                                                 std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(std::abs(lambda), floor);
}

double estimate_lambda_plus(const LinearOperator& op, double norm2_estimate,
                            const SpectralConfig& cfg) {
  const Index n = op.cols();
  const double cutoff = 1e-10 * norm2_estimate;
  if (n == 0) return cutoff;

  std::mt19937_64 rng(cfg.seed + 1);
  std::normal_distribution<double> gauss;
  Vector q(n);
  for (Index i = 0; i < n; ++i) q[i] = gauss(rng);
  q /= q.norm();

  const int budget = static_cast<int>(std::min<Index>(cfg.lanczos_budget, n));
  std::vector<Vector> basis;
  basis.reserve(budget);
  std::vector<double> alpha, beta;  // tridiagonal entries

  Vector w(n);
  for (int j = 0; j < budget; ++j) {
    basis.push_back(q);
    op.apply(q, w);
    if (j > 0) w -= beta.back() * basis[j - 1];
    double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    // Full reorthogonalization; the budget is small.
    for (const auto& b : basis) w -= b.dot(w) * b;
    double nb = w.norm();
    if (nb <= 1e-14 * std::max(1.0, norm2_estimate)) break;  // invariant subspace
    beta.push_back(nb);
    q = w / nb;
  }

  const int k = static_cast<int>(alpha.size());
  if (k == 0) return cutoff;
  Matrix T = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    double r = es.eigenvalues()[i];
    if (r > cutoff && r < best) best = r;
  }
  if (!std::isfinite(best)) return cutoff;
  return std::min(best, std::max(norm2_estimate, cutoff));
}

OperatorStats compute_operator_stats(const LinearOperator& op,
                                     const SpectralConfig& cfg) {
  OperatorStats st;
  st.norm2_estimate = estimate_spectral_norm(op, cfg);
  st.lambda_plus_estimate = estimate_lambda_plus(op, st.norm2_estimate, cfg);
  st.power_iterations_used = cfg.power_budget;
  st.lanczos_iterations_used = cfg.lanczos_budget;
  return st;
}

Index svec_dim(Index d) { return d * (d + 1) / 2; }

Index svec_index(Index i, Index j) {
  // entry (i, j) with i ≤ j, columns stacked
  return j * (j + 1) / 2 + i;
}

Vector svec(const Matrix& X) {
  const Index d = X.rows();
  if (X.cols() != d) throw std::invalid_argument("svec: not square");
  const double scale = 1.0 + X.cwiseAbs().maxCoeff();
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("svec: matrix not symmetric");
  static const double rt2 = std::sqrt(2.0);
  Vector s(svec_dim(d));
  Index k = 0;
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < j; ++i) s[k++] = rt2 * X(i, j);
    s[k++] = X(j, j);
  }
  return s;
}

Matrix smat(const Vector& s) {
  // invert m(m+1)/2 = size
  const Index m = s.size();
  const Index d = static_cast<Index>((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0 + 0.5);
  if (svec_dim(d) != m) throw std::invalid_argument("smat: invalid length");
  static const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Matrix X(d, d);
  Index k = 0;
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < j; ++i) {
      X(i, j) = X(j, i) = inv_rt2 * s[k++];
    }
    X(j, j) = s[k++];
  }
  return X;
}

}  // namespace palqp
