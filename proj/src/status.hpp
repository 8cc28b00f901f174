#pragma once

namespace palqp {

enum class SolveStatus {
  converged,
  max_iterations,
  stalled,  // inner linear solver or line search stopped making progress
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iterations:
      return "max_iterations";
    case SolveStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

}  // namespace palqp
