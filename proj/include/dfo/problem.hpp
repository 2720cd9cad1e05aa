#ifndef DFO_PROBLEM_HPP
#define DFO_PROBLEM_HPP

#include <optional>
#include <vector>

#include "dfo/types.hpp"

namespace dfo {

/// Dense linear constraint block. Interpreted as `A x <= b` or `A x == b`
/// depending on where it is attached.
struct LinearConstraints {
  Matrix A;
  Vector b;
};

/// Nonlinear constraint block: `fn(x)` returns `size` values.
struct NonlinearConstraints {
  ConstraintFn fn;
  Index size = 0;
};

/// Plain description of
///
///   min f(x)  s.t.  l <= x <= u,  A_I x <= b_I,  A_E x = b_E,
///                   c_I(x) <= 0,  c_E(x) = 0.
///
/// Empty `lower` / `upper` mean unbounded. Every constraint group is optional.
struct ProblemDefinition {
  ObjectiveFn objective;
  Vector x0;
  Vector lower;
  Vector upper;
  std::optional<LinearConstraints> lin_ineq;
  std::optional<LinearConstraints> lin_eq;
  std::optional<NonlinearConstraints> nl_ineq;
  std::optional<NonlinearConstraints> nl_eq;
};

/// Validated, immutable optimization problem. Safe to share between threads
/// as long as the user callbacks are reentrant.
class Problem {
 public:
  /// Throws InvalidProblem on size mismatches, InfeasibleBounds when some
  /// lower bound exceeds the matching upper bound.
  explicit Problem(ProblemDefinition def);

  Index dim() const { return def_.x0.size(); }
  const Vector& x0() const { return def_.x0; }
  const Vector& lower() const { return def_.lower; }
  const Vector& upper() const { return def_.upper; }
  const ObjectiveFn& objective() const { return def_.objective; }
  const std::optional<LinearConstraints>& lin_ineq() const { return def_.lin_ineq; }
  const std::optional<LinearConstraints>& lin_eq() const { return def_.lin_eq; }
  const std::optional<NonlinearConstraints>& nl_ineq() const { return def_.nl_ineq; }
  const std::optional<NonlinearConstraints>& nl_eq() const { return def_.nl_eq; }
  const ProblemDefinition& definition() const { return def_; }

  bool has_finite_bounds() const;
  bool has_lin_ineq() const { return def_.lin_ineq && def_.lin_ineq->A.rows() > 0; }
  bool has_lin_eq() const { return def_.lin_eq && def_.lin_eq->A.rows() > 0; }
  bool has_nl_ineq() const { return def_.nl_ineq && def_.nl_ineq->size > 0; }
  bool has_nl_eq() const { return def_.nl_eq && def_.nl_eq->size > 0; }

  /// Copy with the start point replaced.
  Problem with_x0(Vector x0) const;

 private:
  ProblemDefinition def_;
};

enum class ProblemType { Unconstrained, BoundConstrained, LinearlyConstrained, NonlinearlyConstrained };

const char* to_string(ProblemType t);

/// Most restrictive category; nonlinear dominates linear dominates bounds.
ProblemType classify(const Problem& problem);

/// x = offset + basis * z parametrizes { x : A_E x = b_E }.
struct AffineReduction {
  Matrix basis;
  Vector offset;
  Index rank = 0;

  Index reduced_dim() const { return basis.cols(); }
  Vector to_full(const Vector& z) const { return offset + basis * z; }
  Vector to_reduced(const Vector& x) const { return basis.transpose() * (x - offset); }
  /// True when every basis column is a signed unit vector.
  bool axis_aligned() const;
};

struct EqualityElimination {
  Problem reduced;
  AffineReduction map;
};

/// Removes linear equalities via a column-pivoted QR of A_E^T. Bounds on the
/// original variables transfer to z when the basis is axis aligned and become
/// linear inequalities otherwise. Throws InconsistentEqualities.
EqualityElimination eliminate_equalities(const Problem& problem);

/// Only the null-space/offset part of eliminate_equalities.
AffineReduction reduce_equalities(const LinearConstraints& eq);

struct ProjectionResult {
  Vector x;
  bool feasible = true;
  bool moved = false;
  int iterations = 0;
};

/// Euclidean projection of x0 onto {l <= x <= u, A_I x <= b_I, A_E x = b_E}
/// by a dual active-set method. Returns x0 unchanged when it is already
/// feasible or when the constraints are found inconsistent.
ProjectionResult project_start(const Vector& x0, const Vector& lower, const Vector& upper,
                               const LinearConstraints* lin_ineq,
                               const LinearConstraints* lin_eq = nullptr);

struct BarrierConfig {
  double hugefun = 1e30;
  double hugecon = 1e30;
};

/// NaN and values above hugefun map to hugefun, -inf maps to -hugefun.
double moderate(double raw, const BarrierConfig& cfg = {});

/// Constraint values: NaN maps to +hugecon (maximal violation under the
/// c(x) <= 0 convention), everything is clamped to [-hugecon, hugecon].
double moderate_constraint(double raw, const BarrierConfig& cfg = {});

/// One objective evaluation.
struct Evaluation {
  Vector x;
  double raw = 0.0;        ///< value returned by the user callback
  double value = 0.0;      ///< value seen by the solver
  double violation = 0.0;  ///< constraint violation seen by the solver
  Index index = 0;
};

/// Evaluation history of one solve. Single writer.
class RunRecord {
 public:
  void append(const Vector& x, double raw, double value);
  void set_last_violation(double v);

  Index size() const { return static_cast<Index>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const Evaluation& operator[](Index i) const { return entries_[static_cast<std::size_t>(i)]; }
  const Evaluation& back() const { return entries_.back(); }
  const std::vector<Evaluation>& entries() const { return entries_; }
  std::vector<double> raw_values() const;
  void clear() { entries_.clear(); }

 private:
  std::vector<Evaluation> entries_;
};

/// Returns a problem whose callbacks moderate every value and log each
/// objective call into `record`. `record` must outlive the returned problem.
/// Exceptions escaping a user callback are rethrown as CallbackPanic; the
/// failed call is still logged, with a NaN raw value.
Problem wrap_with_barrier(const Problem& problem, const BarrierConfig& cfg, RunRecord& record);

/// Same bookkeeping as wrap_with_barrier but values pass through unchanged.
Problem wrap_recording(const Problem& problem, RunRecord& record);

}  // namespace dfo

#endif  // DFO_PROBLEM_HPP
