#pragma once

#include "phase1.hpp"
#include "phase2.hpp"

namespace palqp {

struct SolverOptions {
  Phase1Config phase1;
  Phase2Config phase2;
  bool phase1_only = false;
  int verbose = 0;
  SpectralConfig spectral;
  int psd_check_samples = 8;
};

struct SolveResult {
  IterateState state;
  KktResiduals residuals;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations_phase1 = 0;
  int iterations_phase2 = 0;
  int newton_steps = 0;
  double time_seconds = 0.0;
  double sigma_final = 0.0;
  OperatorStats stats;
};

/// Two-phase solve: the Gauss-Seidel warm-start loop at tol1 / max_iter1,
/// then the proximal multiplier loop at tol2 / max_iter2 from its iterate.
SolveResult solve(const StandardQP& qp, const SolverOptions& opts = {});

/// Random-probe positive-semidefiniteness check of Q: Rayleigh quotients
/// must stay above −1e-10·‖Q‖. Throws std::invalid_argument on violation.
void check_psd(const StandardQP& qp, const OperatorStats& stats, int samples,
               std::uint64_t seed);

}  // namespace palqp
