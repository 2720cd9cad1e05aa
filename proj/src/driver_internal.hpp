#ifndef DFO_SRC_DRIVER_INTERNAL_HPP
#define DFO_SRC_DRIVER_INTERNAL_HPP

#include <cmath>

#include "dfo/drivers.hpp"

namespace dfo::detail {

inline Index default_budget(const SolverOptions& opts, Index n) {
  return opts.max_evals ? *opts.max_evals : 500 * n;
}

inline Problem wrap_for(const Problem& problem, const SolverOptions& opts, RunRecord& record) {
  return opts.barrier ? wrap_with_barrier(problem, opts.barrier_config, record) : wrap_recording(problem, record);
}

inline void check_options(const SolverOptions& opts) {
  if (!(opts.rho_beg > 0.0) || !(opts.rho_end > 0.0) || !std::isfinite(opts.rho_beg)) {
    throw InvalidProblem("rho_beg and rho_end must be positive");
  }
  if (opts.rho_end > opts.rho_beg) throw InvalidProblem("rho_end must not exceed rho_beg");
  if (opts.max_evals && *opts.max_evals < 1) throw InvalidProblem("max_evals must be positive");
}

/// Emits a trace line when tracing is enabled.
inline void emit_trace(const SolverOptions& opts, Index iteration, Index neval, double delta, double rho,
                       double best_f, double merit) {
  if (!opts.trace) return;
  opts.trace(TraceEntry{iteration, neval, delta, rho, best_f, merit});
}

/// Thrown inside a driver loop to stop it with a status.
struct Stop {
  SolveStatus status;
};

}  // namespace dfo::detail

#endif  // DFO_SRC_DRIVER_INTERNAL_HPP
