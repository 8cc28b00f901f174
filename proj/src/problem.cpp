#include "problem.hpp"

#include <cmath>
#include <stdexcept>

namespace palqp {

BoxSet::BoxSet(Vector l, Vector u) : lower(std::move(l)), upper(std::move(u)) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("BoxSet: bound length mismatch");
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw std::invalid_argument("BoxSet: lower > upper at index " +
                                  std::to_string(i));
  }
}

BoxSet BoxSet::free_box(Index n) {
  return BoxSet(Vector::Constant(n, -kInf), Vector::Constant(n, kInf));
}

BoxSet BoxSet::nonnegative(Index n) {
  return BoxSet(Vector::Zero(n), Vector::Constant(n, kInf));
}

BoxSet BoxSet::concat(const BoxSet& other) const {
  Vector l(lower.size() + other.lower.size());
  Vector u(l.size());
  l << lower, other.lower;
  u << upper, other.upper;
  return BoxSet(std::move(l), std::move(u));
}

Vector project_box(const Vector& v, const BoxSet& box) {
  if (v.size() != box.size())
    throw std::invalid_argument("project_box: length mismatch");
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

double support_function_box(const Vector& y, const BoxSet& box) {
  if (y.size() != box.size())
    throw std::invalid_argument("support_function_box: length mismatch");
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (yi > 0.0) {
      if (std::isinf(box.upper[i])) return kInf;
      total += box.upper[i] * yi;
    } else if (yi < 0.0) {
      if (std::isinf(box.lower[i])) return kInf;
      total += box.lower[i] * yi;
    }
    // yi == 0 contributes 0 even against an infinite bound
  }
  return total;
}

void StandardQP::validate() const {
  if (!Q) throw std::invalid_argument("StandardQP: missing Q");
  const Index nn = A.cols();
  if (Q->rows() != nn || Q->cols() != nn)
    throw std::invalid_argument("StandardQP: Q dimension mismatch");
  if (!Q->is_self_adjoint())
    throw std::invalid_argument("StandardQP: Q must be self-adjoint");
  if (b.size() != A.rows()) throw std::invalid_argument("StandardQP: b length");
  if (c.size() != nn) throw std::invalid_argument("StandardQP: c length");
  if (box.size() != nn) throw std::invalid_argument("StandardQP: box length");
}

void GeneralQP::validate() const {
  if (!Qp) throw std::invalid_argument("GeneralQP: missing Qp");
  const Index nn = cp.size();
  if (Qp->rows() != nn || Qp->cols() != nn)
    throw std::invalid_argument("GeneralQP: Qp dimension mismatch");
  if (A_E.rows() != b_E.size()) throw std::invalid_argument("GeneralQP: b_E length");
  if (A_I.rows() != b_I.size()) throw std::invalid_argument("GeneralQP: b_I length");
  if ((A_E.rows() > 0 && A_E.cols() != nn) || (A_I.rows() > 0 && A_I.cols() != nn))
    throw std::invalid_argument("GeneralQP: constraint width mismatch");
  if (box.size() != nn) throw std::invalid_argument("GeneralQP: box length");
}

StandardizedQP to_standard_form(const GeneralQP& gp) {
  gp.validate();
  const Index N = gp.N();
  const Index mE = gp.mE();
  const Index mI = gp.mI();

  StandardizedQP out;
  out.map.n_original = N;
  out.map.n_slack = mI;
  out.map.m_equality = mE;
  out.map.m_inequality = mI;

  if (mI == 0) {
    out.qp.Q = gp.Qp;
    out.qp.A = gp.A_E;
    out.qp.A.makeCompressed();
    out.qp.b = gp.b_E;
    out.qp.c = gp.cp;
    out.qp.box = gp.box;
    out.qp.validate();
    return out;
  }

  const Index n = N + mI;
  const Index m = mE + mI;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(gp.A_E.nonZeros() + gp.A_I.nonZeros() + mI);
  for (Index cidx = 0; cidx < gp.A_E.outerSize(); ++cidx)
    for (SparseMatrix::InnerIterator it(gp.A_E, cidx); it; ++it)
      trips.emplace_back(it.row(), it.col(), it.value());
  for (Index cidx = 0; cidx < gp.A_I.outerSize(); ++cidx)
    for (SparseMatrix::InnerIterator it(gp.A_I, cidx); it; ++it)
      trips.emplace_back(mE + it.row(), it.col(), it.value());
  for (Index i = 0; i < mI; ++i)
    trips.emplace_back(mE + i, N + i, 1.0);  // A_I x + s = b_I

  SparseMatrix A(m, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Vector b(m);
  b << gp.b_E, gp.b_I;
  Vector c = Vector::Zero(n);
  c.head(N) = gp.cp;

  out.qp.Q = pad_operator(gp.Qp, mI);
  out.qp.A = std::move(A);
  out.qp.b = std::move(b);
  out.qp.c = std::move(c);
  out.qp.box = gp.box.concat(BoxSet::nonnegative(mI));
  out.qp.validate();
  return out;
}

IterateState IterateState::zero(const StandardQP& qp) {
  IterateState st;
  const Index n = qp.n();
  const Index m = qp.m();
  st.x = Vector::Zero(n);
  st.z = Vector::Zero(n);
  st.w = WRepresentation::zero(n);
  st.y = Vector::Zero(m);
  st.Ax = Vector::Zero(m);
  st.A_adj_y = Vector::Zero(n);
  return st;
}

void IterateState::refresh_caches(const StandardQP& qp) {
  Ax = qp.A * x;
  A_adj_y = qp.A.transpose() * y;
}

double objective_primal(const Vector& x, const StandardQP& qp) {
  Vector qx(x.size());
  qp.Q->apply(x, qx);
  return objective_primal(x, qx, qp);
}

double objective_primal(const Vector& x, const Vector& qx, const StandardQP& qp) {
  return 0.5 * x.dot(qx) + qp.c.dot(x);
}

double objective_dual(const Vector& z, const WRepresentation& w,
                      const Vector& y, const StandardQP& qp) {
  const double support = support_function_box(-z, qp.box);
  if (std::isinf(support)) return -kInf;
  return -support - 0.5 * w.w_hat.dot(w.q_w) + qp.b.dot(y);
}

}  // namespace palqp
