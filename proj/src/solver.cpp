#include "solver.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace palqp {

void check_psd(const StandardQP& qp, const OperatorStats& stats, int samples,
               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const Index n = qp.n();
  Vector v(n), qv(n);
  for (int s = 0; s < samples; ++s) {
    for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
    qp.Q->apply(v, qv);
    const double rayleigh = v.dot(qv);
    if (rayleigh < -1e-10 * stats.norm2_estimate * v.squaredNorm()) {
      throw std::invalid_argument(
          "solve: quadratic operator failed the positive-semidefiniteness "
          "probe (Rayleigh quotient " + std::to_string(rayleigh) + ")");
    }
  }
}

SolveResult solve(const StandardQP& qp, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  qp.validate();

  SolveResult out;
  out.stats = compute_operator_stats(*qp.Q, opts.spectral);
  check_psd(qp, out.stats, opts.psd_check_samples, opts.spectral.seed + 17);

  auto [state1, sum1] =
      phase1_solve(qp, opts.phase1, IterateState::zero(qp), out.stats);
  out.iterations_phase1 = sum1.iterations;
  if (opts.verbose > 0) {
    std::fprintf(stderr,
                 "[palqp] phase1: %d iterations, eta=%.3e, status=%s\n",
                 sum1.iterations, sum1.residuals.eta_max, to_string(sum1.status));
  }

  if (opts.phase1_only) {
    out.state = std::move(state1);
    out.residuals = sum1.residuals;
    out.status = sum1.status;
    out.sigma_final = sum1.sigma;
  } else {
    Phase2Config p2 = opts.phase2;
    auto [state2, sum2] =
        phase2_solve(qp, p2, std::move(state1), sum1.sigma, out.stats);
    out.iterations_phase2 = sum2.iterations;
    out.newton_steps = sum2.newton_steps_total;
    out.state = std::move(state2);
    out.residuals = sum2.residuals;
    out.status = sum2.status;
    out.sigma_final = sum2.sigma_final;
    if (opts.verbose > 0) {
      std::fprintf(stderr,
                   "[palqp] phase2: %d iterations (%d newton), eta=%.3e, "
                   "status=%s\n",
                   sum2.iterations, sum2.newton_steps_total,
                   sum2.residuals.eta_max, to_string(sum2.status));
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  out.time_seconds = std::chrono::duration<double>(t1 - t0).count();
  return out;
}

}  // namespace palqp
