#include "dfo/problem.hpp"

#include <cmath>
#include <exception>
#include <string>
#include <utility>

namespace dfo {

namespace {

void check_linear(const std::optional<LinearConstraints>& lc, Index n, const char* what) {
  if (!lc) return;
  if (lc->A.rows() != lc->b.size()) {
    throw InvalidProblem(std::string(what) + ": row count of A does not match length of b");
  }
  if (lc->A.rows() > 0 && lc->A.cols() != n) {
    throw InvalidProblem(std::string(what) + ": column count of A does not match dimension");
  }
  if (!lc->A.allFinite() || !lc->b.allFinite()) {
    throw InvalidProblem(std::string(what) + ": non-finite coefficients");
  }
}

void check_nonlinear(const std::optional<NonlinearConstraints>& nc, const char* what) {
  if (!nc) return;
  if (nc->size < 0) throw InvalidProblem(std::string(what) + ": negative size");
  if (nc->size > 0 && !nc->fn) throw InvalidProblem(std::string(what) + ": missing callback");
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const CallbackPanic&) {
    throw;
  } catch (const std::exception& e) {
    throw CallbackPanic(e.what());
  } catch (...) {
    throw CallbackPanic("unknown exception in user callback");
  }
}

}  // namespace

Problem::Problem(ProblemDefinition def) : def_(std::move(def)) {
  const Index n = def_.x0.size();
  if (!def_.objective) throw InvalidProblem("objective callback is missing");
  if (!def_.x0.allFinite()) throw InvalidProblem("x0 must be finite");
  if (def_.lower.size() == 0) def_.lower = Vector::Constant(n, -kInf);
  if (def_.upper.size() == 0) def_.upper = Vector::Constant(n, kInf);
  if (def_.lower.size() != n || def_.upper.size() != n) {
    throw InvalidProblem("bound vectors must have the problem dimension");
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(def_.lower[i]) || std::isnan(def_.upper[i])) {
      throw InvalidProblem("bounds must not be NaN");
    }
    if (def_.lower[i] > def_.upper[i]) {
      throw InfeasibleBounds("lower bound exceeds upper bound at index " + std::to_string(i));
    }
    if (def_.lower[i] == kInf || def_.upper[i] == -kInf) {
      throw InfeasibleBounds("bound excludes every finite value at index " + std::to_string(i));
    }
  }
  check_linear(def_.lin_ineq, n, "lin_ineq");
  check_linear(def_.lin_eq, n, "lin_eq");
  check_nonlinear(def_.nl_ineq, "nl_ineq");
  check_nonlinear(def_.nl_eq, "nl_eq");
}

bool Problem::has_finite_bounds() const {
  return def_.lower.array().isFinite().any() || def_.upper.array().isFinite().any();
}

Problem Problem::with_x0(Vector x0) const {
  ProblemDefinition d = def_;
  d.x0 = std::move(x0);
  return Problem(std::move(d));
}

const char* to_string(ProblemType t) {
  switch (t) {
    case ProblemType::Unconstrained: return "unconstrained";
    case ProblemType::BoundConstrained: return "bound-constrained";
    case ProblemType::LinearlyConstrained: return "linearly-constrained";
    case ProblemType::NonlinearlyConstrained: return "nonlinearly-constrained";
  }
  return "?";
}

ProblemType classify(const Problem& problem) {
  if (problem.has_nl_ineq() || problem.has_nl_eq()) return ProblemType::NonlinearlyConstrained;
  if (problem.has_lin_ineq() || problem.has_lin_eq()) return ProblemType::LinearlyConstrained;
  if (problem.has_finite_bounds()) return ProblemType::BoundConstrained;
  return ProblemType::Unconstrained;
}

double moderate(double raw, const BarrierConfig& cfg) {
  if (std::isnan(raw) || raw > cfg.hugefun) return cfg.hugefun;
  if (raw == -kInf) return -cfg.hugefun;
  return raw;
}

double moderate_constraint(double raw, const BarrierConfig& cfg) {
  if (std::isnan(raw)) return cfg.hugecon;
  if (raw > cfg.hugecon) return cfg.hugecon;
  if (raw < -cfg.hugecon) return -cfg.hugecon;
  return raw;
}

void RunRecord::append(const Vector& x, double raw, double value) {
  Evaluation e;
  e.x = x;
  e.raw = raw;
  e.value = value;
  e.index = size();
  entries_.push_back(std::move(e));
}

void RunRecord::set_last_violation(double v) {
  if (!entries_.empty()) entries_.back().violation = v;
}

std::vector<double> RunRecord::raw_values() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.raw);
  return out;
}

namespace {

Problem wrap_impl(const Problem& problem, RunRecord& record, std::optional<BarrierConfig> cfg) {
  ProblemDefinition d = problem.definition();
  RunRecord* rec = &record;
  ObjectiveFn f = problem.objective();
  d.objective = [f, rec, cfg](const Vector& x) {
    double raw = 0.0;
    try {
      raw = guarded([&] { return f(x); });
    } catch (const CallbackPanic&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec->append(x, nan, nan);
      throw;
    }
    const double value = cfg ? moderate(raw, *cfg) : raw;
    rec->append(x, raw, value);
    return value;
  };
  auto wrap_constraints = [&](std::optional<NonlinearConstraints>& nc) {
    if (!nc || nc->size == 0) return;
    ConstraintFn fn = nc->fn;
    const Index m = nc->size;
    nc->fn = [fn, cfg, m](const Vector& x) {
      Vector c = guarded([&] { return fn(x); });
      if (c.size() != m) throw CallbackPanic("constraint callback returned a vector of wrong length");
      if (cfg) {
        for (Index i = 0; i < m; ++i) c[i] = moderate_constraint(c[i], *cfg);
      }
      return c;
    };
  };
  wrap_constraints(d.nl_ineq);
  wrap_constraints(d.nl_eq);
  return Problem(std::move(d));
}

}  // namespace

Problem wrap_with_barrier(const Problem& problem, const BarrierConfig& cfg, RunRecord& record) {
  return wrap_impl(problem, record, cfg);
}

Problem wrap_recording(const Problem& problem, RunRecord& record) {
  return wrap_impl(problem, record, std::nullopt);
}

}  // namespace dfo
