#ifndef DFO_FRONTEND_HPP
#define DFO_FRONTEND_HPP

#include <optional>
#include <string>

#include "dfo/drivers.hpp"
#include "dfo/problem.hpp"

namespace dfo {

struct SolverChoice {
  SolverId id = SolverId::Newuoa;
  /// Set when a requested solver could not handle the problem.
  std::optional<std::string> warning;
};

/// True when `id` can handle problems of type `ptype` in dimension n.
bool capable(SolverId id, ProblemType ptype, Index n);

/// Requested solver when capable, otherwise: unconstrained -> uobyqa for
/// 2 <= n <= 8 and newuoa else; bounds -> bobyqa; linear -> lincoa; cobyla.
SolverChoice select_solver(ProblemType ptype, Index n, std::optional<SolverId> requested = std::nullopt);

/// Classifies, removes linear equalities, selects and runs a solver and maps
/// the result back to the original variables. Warnings end up in the result.
SolveResult solve(const Problem& problem, const SolverOptions& opts = {},
                  std::optional<SolverId> requested = std::nullopt);

}  // namespace dfo

#endif  // DFO_FRONTEND_HPP
