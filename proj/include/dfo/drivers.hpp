#ifndef DFO_DRIVERS_HPP
#define DFO_DRIVERS_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfo/models.hpp"
#include "dfo/problem.hpp"
#include "dfo/types.hpp"

namespace dfo {

enum class SolverId { Cobyla, Uobyqa, Newuoa, Bobyqa, Lincoa };

const char* to_string(SolverId id);
/// Case-insensitive name lookup ("cobyla", "uobyqa", ...).
std::optional<SolverId> parse_solver(std::string_view name);

enum class SolveStatus {
  RhoEndReached,
  MaxEvals,
  TargetReached,
  CallbackError,
  /// Non-finite model coefficients with the barrier disabled.
  ModelBreakdown,
};

const char* to_string(SolveStatus s);

/// One line of the optional per-iteration trace.
struct TraceEntry {
  Index iteration = 0;
  Index neval = 0;
  double delta = 0.0;
  double rho = 0.0;
  double best_f = 0.0;
  double merit = 0.0;
};

/// "iter <i> neval <k> delta <d> rho <r> best_f <f> merit <m>", 17 digits.
std::string format_trace(const TraceEntry& e);

struct SolverOptions {
  double rho_beg = 1.0;
  double rho_end = 1e-6;
  /// Interpolation points for the underdetermined models; default 2n+1.
  std::optional<Index> npt;
  /// Objective evaluations; default 500n. The initial set is always evaluated.
  std::optional<Index> max_evals;
  /// Stop once a raw objective value <= target is seen.
  std::optional<double> target;
  /// Moderated extreme barrier on (default) or off.
  bool barrier = true;
  BarrierConfig barrier_config;
  /// Map finite boxes to [-1, 1] before dispatch (frontend only).
  bool scale = false;
  std::function<void(const TraceEntry&)> trace;
};

struct SolveResult {
  Vector x;
  /// Raw objective value at x.
  double fun = 0.0;
  SolveStatus status = SolveStatus::RhoEndReached;
  Index neval = 0;
  RunRecord history;
  /// Largest constraint violation at x (0 when unconstrained).
  double constraint_violation = 0.0;
  SolverId solver = SolverId::Newuoa;
  std::vector<std::string> warnings;
  std::string message;
  /// Successive values of the resolution bound.
  std::vector<double> rho_history;
};

struct TrustRegionState {
  Vector x_k;
  double delta = 1.0;
  double rho = 1.0;
  double rho_beg = 1.0;
  double rho_end = 1e-6;
  Index neval = 0;
  struct Best {
    Vector x;
    double raw = std::numeric_limits<double>::quiet_NaN();
    double merit = kInf;
  } best;
};

/// Radius update after a trial step with reduction ratio `ratio`.
void update_radius(TrustRegionState& state, double ratio);

/// Next resolution bound: rho_end when rho <= 16 rho_end, sqrt(rho rho_end)
/// when rho <= 250 rho_end, rho / 10 otherwise.
double next_rho(double rho, double rho_end);

/// Index of the point to replace by `trial`: maximizes |den_j| times
/// max(1, (|y_j - x_k| / max(delta, rho))^p) with p = 6 for the KKT variant and
/// 3 otherwise. Never the center. Throws AllTinyDenominators.
Index select_drop_tr(const InterpolationSet& set, const Vector& trial, const TrustRegionState& state);

/// Tracks the best evaluation: lowest merit, ties broken by lowest raw value.
class BestTracker {
 public:
  /// Returns true when the candidate became the best point.
  bool offer(const Vector& x, double raw, double merit);
  bool has_value() const { return has_; }
  const Vector& x() const { return x_; }
  double raw() const { return raw_; }
  double merit() const { return merit_; }

 private:
  bool has_ = false;
  Vector x_;
  double raw_ = std::numeric_limits<double>::quiet_NaN();
  double merit_ = kInf;
};

/// Unconstrained problems; underdetermined quadratic models.
SolveResult run_newuoa(const Problem& problem, const SolverOptions& opts = {});
/// Bound-constrained problems; every evaluated point lies in [l, u].
SolveResult run_bobyqa(const Problem& problem, const SolverOptions& opts = {});
/// Bounds and linear inequalities; trial points of trust-region steps are feasible.
SolveResult run_lincoa(const Problem& problem, const SolverOptions& opts = {});
/// Unconstrained problems with n >= 2; fully determined quadratic models.
SolveResult run_uobyqa(const Problem& problem, const SolverOptions& opts = {});
/// Any constraints; linear models and an l-infinity merit function.
SolveResult run_cobyla(const Problem& problem, const SolverOptions& opts = {});

}  // namespace dfo

#endif  // DFO_DRIVERS_HPP
