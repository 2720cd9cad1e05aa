#include "dfo/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driver_internal.hpp"

namespace dfo {

namespace {

constexpr Index kUobyqaMaxDim = 8;

SolverId automatic(ProblemType ptype, Index n) {
  switch (ptype) {
    case ProblemType::Unconstrained: return (n >= 2 && n <= kUobyqaMaxDim) ? SolverId::Uobyqa : SolverId::Newuoa;
    case ProblemType::BoundConstrained: return SolverId::Bobyqa;
    case ProblemType::LinearlyConstrained: return SolverId::Lincoa;
    case ProblemType::NonlinearlyConstrained: return SolverId::Cobyla;
  }
  return SolverId::Cobyla;
}

SolveResult dispatch(SolverId id, const Problem& p, const SolverOptions& opts) {
  switch (id) {
    case SolverId::Cobyla: return run_cobyla(p, opts);
    case SolverId::Uobyqa: return run_uobyqa(p, opts);
    case SolverId::Newuoa: return run_newuoa(p, opts);
    case SolverId::Bobyqa: return run_bobyqa(p, opts);
    case SolverId::Lincoa: return run_lincoa(p, opts);
  }
  return run_cobyla(p, opts);
}

/// Coordinatewise x = center + half * z sending finite boxes to [-1, 1].
/// Mapped points are clamped to [lower, upper] to absorb roundoff.
struct BoxScaling {
  Vector center;
  Vector half;
  Vector lower;
  Vector upper;

  Vector to_original(const Vector& z) const {
    const Vector x = center + half.cwiseProduct(z);
    return lower.size() == 0 ? x : Vector(x.cwiseMax(lower).cwiseMin(upper));
  }
  Vector to_scaled(const Vector& x) const { return (x - center).cwiseQuotient(half); }
};

BoxScaling box_scaling(const Problem& p) {
  const Index n = p.dim();
  BoxScaling s{Vector::Zero(n), Vector::Ones(n), Vector::Constant(n, -kInf), Vector::Constant(n, kInf)};
  if (p.lower().size() == n) s.lower = p.lower();
  if (p.upper().size() == n) s.upper = p.upper();
  for (Index i = 0; i < n; ++i) {
    const double l = p.lower()[i];
    const double u = p.upper()[i];
    if (std::isfinite(l) && std::isfinite(u) && u > l) {
      s.center[i] = 0.5 * (l + u);
      s.half[i] = 0.5 * (u - l);
    }
  }
  return s;
}

Problem scaled_problem(const Problem& p, const BoxScaling& s) {
  const ProblemDefinition& src = p.definition();
  ProblemDefinition d;
  ObjectiveFn f = p.objective();
  d.objective = [f, s](const Vector& z) { return f(s.to_original(z)); };
  d.x0 = s.to_scaled(p.x0());
  d.lower = s.to_scaled(p.lower());
  d.upper = s.to_scaled(p.upper());
  auto scale_linear = [&s](const std::optional<LinearConstraints>& lc) -> std::optional<LinearConstraints> {
    if (!lc) return std::nullopt;
    return LinearConstraints{lc->A * s.half.asDiagonal(), lc->b - lc->A * s.center};
  };
  auto scale_nonlinear = [&s](const std::optional<NonlinearConstraints>& nc) -> std::optional<NonlinearConstraints> {
    if (!nc) return std::nullopt;
    ConstraintFn fn = nc->fn;
    return NonlinearConstraints{[fn, s](const Vector& z) { return fn(s.to_original(z)); }, nc->size};
  };
  d.lin_ineq = scale_linear(src.lin_ineq);
  d.lin_eq = scale_linear(src.lin_eq);
  d.nl_ineq = scale_nonlinear(src.nl_ineq);
  d.nl_eq = scale_nonlinear(src.nl_eq);
  return Problem(std::move(d));
}

SolveResult solve_point(const Problem& original, const Vector& x, const SolverOptions& opts, SolverId id) {
  RunRecord record;
  SolveResult res;
  res.solver = id;
  res.x = x;
  try {
    const Problem wrapped = detail::wrap_for(original, opts, record);
    wrapped.objective()(x);
    res.fun = record.back().raw;
    double v = 0.0;
    if (original.has_nl_ineq()) v = std::max(v, wrapped.nl_ineq()->fn(x).maxCoeff());
    if (original.has_nl_eq()) v = std::max(v, wrapped.nl_eq()->fn(x).cwiseAbs().maxCoeff());
    record.set_last_violation(v);
    res.constraint_violation = v;
  } catch (const CallbackPanic& e) {
    res.status = SolveStatus::CallbackError;
    res.message = e.what();
    res.fun = record.empty() ? std::numeric_limits<double>::quiet_NaN() : record.back().raw;
  }
  res.rho_history.push_back(opts.rho_end);
  res.history = record;
  res.neval = record.size();
  res.warnings.push_back("linear equalities determine the solution; no iterations were run");
  return res;
}

double linear_violation(const Problem& p, const Vector& x) {
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    v = std::max(v, p.lower()[i] - x[i]);
    v = std::max(v, x[i] - p.upper()[i]);
  }
  if (p.has_lin_ineq()) v = std::max(v, (p.lin_ineq()->A * x - p.lin_ineq()->b).maxCoeff());
  if (p.has_lin_eq()) v = std::max(v, (p.lin_eq()->A * x - p.lin_eq()->b).cwiseAbs().maxCoeff());
  return v;
}

}  // namespace

bool capable(SolverId id, ProblemType ptype, Index n) {
  switch (id) {
    case SolverId::Cobyla: return true;
    case SolverId::Uobyqa: return ptype == ProblemType::Unconstrained && n >= 2;
    case SolverId::Newuoa: return ptype == ProblemType::Unconstrained;
    case SolverId::Bobyqa: return ptype == ProblemType::Unconstrained || ptype == ProblemType::BoundConstrained;
    case SolverId::Lincoa: return ptype != ProblemType::NonlinearlyConstrained;
  }
  return false;
}

SolverChoice select_solver(ProblemType ptype, Index n, std::optional<SolverId> requested) {
  SolverChoice choice;
  if (requested && capable(*requested, ptype, n)) {
    choice.id = *requested;
    return choice;
  }
  choice.id = automatic(ptype, n);
  if (requested) {
    choice.warning = std::string(to_string(*requested)) + " cannot handle a " + to_string(ptype) +
                     " problem with n = " + std::to_string(n) + "; using " + to_string(choice.id);
  }
  return choice;
}

SolveResult solve(const Problem& problem, const SolverOptions& opts, std::optional<SolverId> requested) {
  classify(problem);
  const EqualityElimination elim = eliminate_equalities(problem);
  const Problem& work = elim.reduced;
  const Index k = work.dim();
  if (k == 0) {
    const Vector x = elim.map.to_full(Vector::Zero(0));
    SolveResult res = solve_point(problem, x, opts, requested.value_or(SolverId::Cobyla));
    res.constraint_violation = std::max(res.constraint_violation, linear_violation(problem, x));
    return res;
  }

  const ProblemType ptype = classify(work);
  const SolverChoice choice = select_solver(ptype, k, requested);

  const bool scale = opts.scale && work.has_finite_bounds();
  const BoxScaling scaling = scale ? box_scaling(work) : BoxScaling{Vector::Zero(k), Vector::Ones(k)};
  Problem inner = scale ? scaled_problem(work, scaling) : work;
  if (choice.id == SolverId::Lincoa && (inner.has_lin_ineq() || inner.has_finite_bounds())) {
    const ProjectionResult pr = project_start(inner.x0(), inner.lower(), inner.upper(),
                                              inner.has_lin_ineq() ? &*inner.lin_ineq() : nullptr);
    if (pr.moved) inner = inner.with_x0(pr.x);
  }

  SolverOptions run_opts = opts;
  SolveResult res = dispatch(choice.id, inner, run_opts);

  auto to_full = [&](const Vector& z) { return elim.map.to_full(scaling.to_original(z)); };
  res.x = to_full(res.x);
  RunRecord mapped;
  for (const Evaluation& e : res.history.entries()) {
    mapped.append(to_full(e.x), e.raw, e.value);
    mapped.set_last_violation(e.violation);
  }
  res.history = std::move(mapped);
  res.constraint_violation = std::max(res.constraint_violation, linear_violation(problem, res.x));
  if (choice.warning) res.warnings.insert(res.warnings.begin(), *choice.warning);
  return res;
}

}  // namespace dfo
