#pragma once

#include <limits>
#include <string>
#include <vector>

#include "linops.hpp"

namespace palqp {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Componentwise box l ≤ x ≤ u with IEEE ±inf for absent bounds.
/// All box arithmetic uses the convention 0·(±inf) = 0.
struct BoxSet {
  Vector lower;
  Vector upper;

  BoxSet() = default;
  BoxSet(Vector l, Vector u);

  Index size() const { return lower.size(); }
  static BoxSet free_box(Index n);
  static BoxSet nonnegative(Index n);
  BoxSet concat(const BoxSet& other) const;
};

Vector project_box(const Vector& v, const BoxSet& box);

/// Support function of the box at y: Σ u_i·max(y_i,0) + l_i·min(y_i,0),
/// with 0·inf = 0. Returns +inf when unbounded in the direction y.
double support_function_box(const Vector& y, const BoxSet& box);

/// min ½⟨x,Qx⟩ + ⟨c,x⟩  s.t.  Ax = b, x ∈ box.
struct StandardQP {
  OperatorPtr Q;
  SparseMatrix A;
  Vector b;
  Vector c;
  BoxSet box;

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  void validate() const;  // dimension consistency; throws on mismatch
};

/// General form with equality and inequality blocks:
/// min ½⟨x,Qp x⟩ + ⟨cp,x⟩  s.t.  A_E x = b_E, A_I x ≤ b_I, x ∈ box.
struct GeneralQP {
  OperatorPtr Qp;
  Vector cp;
  SparseMatrix A_E;
  Vector b_E;
  SparseMatrix A_I;
  Vector b_I;
  BoxSet box;

  Index N() const { return cp.size(); }
  Index mE() const { return A_E.rows(); }
  Index mI() const { return A_I.rows(); }

  void validate() const;
};

/// Bookkeeping to map a standard-form solution back to the general form.
/// Slacks are appended after the original variables in a fixed order.
struct StandardFormMap {
  Index n_original = 0;
  Index n_slack = 0;
  Index m_equality = 0;
  Index m_inequality = 0;

  Vector original_x(const Vector& x_std) const {
    return x_std.head(n_original);
  }
  Vector slack(const Vector& x_std) const { return x_std.tail(n_slack); }
};

struct StandardizedQP {
  StandardQP qp;
  StandardFormMap map;
};

/// Adds one slack per inequality row: n = N + m_I, m = m_E + m_I,
/// A = [A_E 0; A_I I], Q = diag(Qp, 0), c = (cp; 0), slack bounds [0, inf).
StandardizedQP to_standard_form(const GeneralQP& gp);

/// A point of Range(Q) carried as (ŵ, Qŵ). The implicit element is the
/// orthogonal projection of ŵ onto Range(Q); it is never formed, because
/// every consumer needs only Q-applied quantities and Q-inner products.
struct WRepresentation {
  Vector w_hat;
  Vector q_w;  // Q·w_hat

  static WRepresentation zero(Index n) {
    return {Vector::Zero(n), Vector::Zero(n)};
  }
};

/// Primal-dual iterate shared by both phases, with the matrix-vector
/// products both phases keep re-using.
struct IterateState {
  Vector x;
  Vector z;
  WRepresentation w;
  Vector y;

  Vector Ax;       // A·x
  Vector A_adj_y;  // Aᵀ·y
  int phase1_iterations = 0;
  int phase2_iterations = 0;

  static IterateState zero(const StandardQP& qp);
  void refresh_caches(const StandardQP& qp);
};

double objective_primal(const Vector& x, const StandardQP& qp);
double objective_primal(const Vector& x, const Vector& qx, const StandardQP& qp);

/// −δ_C^*(−z) − ½⟨w,Qw⟩ + ⟨b,y⟩; −inf when the support function diverges.
double objective_dual(const Vector& z, const WRepresentation& w,
                      const Vector& y, const StandardQP& qp);

}  // namespace palqp
