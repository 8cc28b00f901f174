#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "problem.hpp"

namespace palqp {

/// Parsed QPS/MPS problem: the general-form data plus the naming and the
/// objective constant needed to write the file back out.
struct QpsProblem {
  std::string name;
  GeneralQP qp;
  double objective_constant = 0.0;
  std::vector<std::string> variable_names;
  std::vector<std::string> equality_names;
  std::vector<std::string> inequality_names;
};

class QpsParseError : public std::runtime_error {
 public:
  explicit QpsParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Reads fixed- or free-format MPS with a QUADOBJ or QMATRIX section.
/// Sections: NAME, ROWS (N/L/G/E), COLUMNS, RHS, RANGES, BOUNDS
/// (LO/UP/FX/FR/MI/PL/BV), QUADOBJ, QMATRIX, ENDATA. Comment lines start
/// with '*'. Ranged rows are expanded into inequality pairs; G rows are
/// negated into the ≤ block. Objective sense is minimization.
QpsProblem parse_qps(const std::string& path);
QpsProblem parse_qps_stream(std::istream& in, const std::string& origin);

/// Canonical writer: equalities as E rows, inequalities as L rows, bounds
/// re-derived from the box, quadratic entries from the lower triangle.
/// Values are printed round-trip exact.
void write_qps(const QpsProblem& p, std::ostream& out);
std::string write_qps_string(const QpsProblem& p);

}  // namespace palqp
