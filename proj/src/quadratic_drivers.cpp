#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "driver_internal.hpp"
#include "dfo/drivers.hpp"
#include "dfo/subproblems.hpp"

namespace dfo {

namespace {

using detail::Stop;

struct Flavor {
  SolverId id = SolverId::Newuoa;
  ModelVariant variant = ModelVariant::QuadraticKKT;
  Vector x0;
  Matrix initial_points;
  std::function<Vector(const SurrogateModel& model, const Vector& x_k, double delta)> step;
  std::function<GeometryStep(const LagrangeFunction&, const InterpolationSet&, Index, const Vector&, double)> geometry;
  std::function<bool(const Vector&)> feasible;
  std::function<void(Vector&)> clip;
};

bool less_nan_last(double a, double b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

class QuadraticLoop {
 public:
  QuadraticLoop(const ObjectiveFn& f, const RunRecord& record, Flavor& flavor, const SolverOptions& opts,
                Index budget)
      : f_(f), record_(record), fl_(flavor), opts_(opts), budget_(budget) {}

  SolveResult run() {
    SolveResult result;
    result.solver = fl_.id;
    st_.rho_beg = opts_.rho_beg;
    st_.rho_end = std::min(opts_.rho_end, opts_.rho_beg);
    st_.rho = st_.rho_beg;
    st_.delta = st_.rho_beg;
    rho_history_.push_back(st_.rho);
    try {
      loop();
    } catch (const Stop& s) {
      result.status = s.status;
    } catch (const CallbackPanic& e) {
      result.status = SolveStatus::CallbackError;
      result.message = e.what();
    }
    if (result.status == SolveStatus::ModelBreakdown && result.message.empty()) {
      result.message = "non-finite model coefficients";
    }
    if (best_.has_value()) {
      result.x = best_.x();
      result.fun = best_.raw();
    } else {
      result.x = fl_.x0;
      result.fun = std::numeric_limits<double>::quiet_NaN();
    }
    result.rho_history = rho_history_;
    return result;
  }

 private:
  bool feasible(const Vector& x) const { return !fl_.feasible || fl_.feasible(x); }

  double eval(const Vector& x) {
    if (record_.size() >= budget_) throw Stop{SolveStatus::MaxEvals};
    const double v = f_(x);
    const double raw = record_.back().raw;
    if (feasible(x)) {
      best_.offer(x, raw, v);
      if (opts_.target && raw <= *opts_.target) throw Stop{SolveStatus::TargetReached};
    }
    return v;
  }

  void rebuild() {
    try {
      if (set_.variant() == ModelVariant::QuadraticKKT) model_ = update_underdetermined(model_, set_);
      else model_ = build_full_quadratic(set_);
    } catch (const DfoError&) {
      throw Stop{SolveStatus::ModelBreakdown};
    }
    if (!model_.all_finite()) throw Stop{SolveStatus::ModelBreakdown};
  }

  void maybe_move_center(Index j) {
    const Index c = set_.center_index();
    if (j != c && feasible(set_.point(j)) && less_nan_last(set_.fvals()[j], set_.fvals()[c])) set_.set_center(j);
  }

  Index farthest(double threshold) const {
    const Vector x_k = set_.center();
    Index far = -1;
    double best = threshold;
    for (Index j = 0; j < set_.npt(); ++j) {
      if (j == set_.center_index()) continue;
      const double d = (set_.point(j) - x_k).norm();
      if (d > best) {
        best = d;
        far = j;
      }
    }
    return far;
  }

  void reduce_rho() {
    if (st_.rho <= st_.rho_end) throw Stop{SolveStatus::RhoEndReached};
    const double old = st_.rho;
    st_.rho = next_rho(st_.rho, st_.rho_end);
    st_.delta = std::max(0.5 * old, st_.rho);
    rho_history_.push_back(st_.rho);
  }

  bool include(const Vector& xt, double ft) {
    st_.x_k = set_.center();
    try {
      const Index t = select_drop_tr(set_, xt, st_);
      smw_replace(set_, t, xt, ft, nullptr, st_.delta);
      maybe_move_center(t);
    } catch (const AllTinyDenominators&) {
      return false;
    } catch (const TinyDenominator&) {
      return false;
    } catch (const DegenerateSet&) {
      return false;
    }
    rebuild();
    return true;
  }

  bool geometry_step(Index t) {
    const Vector x_k = set_.center();
    const double dist = (set_.point(t) - x_k).norm();
    double deltabar = std::max(std::min(0.1 * dist, 0.5 * st_.delta), st_.rho);
    const double threshold = 1e-12 * std::max(1.0, std::abs(set_.inverse().last_denominator));
    for (int attempt = 0; attempt < 2; ++attempt, deltabar *= 0.5) {
      LagrangeFunction lagr;
      try {
        lagr = lagrange(set_, t);
      } catch (const DfoError&) {
        return false;
      }
      GeometryStep gs = fl_.geometry(lagr, set_, t, x_k, deltabar);
      Vector xg = gs.point;
      if (fl_.clip) fl_.clip(xg);
      if (!xg.allFinite() || !((xg - x_k).norm() > 0.0)) continue;
      const double den = set_.denominators(xg)[t];
      if (!std::isfinite(den) || std::abs(den) < threshold) continue;
      const double fg = eval(xg);
      try {
        smw_replace(set_, t, xg, fg, nullptr, st_.delta);
      } catch (const DfoError&) {
        return false;
      }
      maybe_move_center(t);
      rebuild();
      return true;
    }
    return false;
  }

  void loop() {
    set_ = InterpolationSet(fl_.variant, fl_.initial_points, fl_.x0);
    const Index npt = set_.npt();
    for (Index i = 0; i < npt; ++i) set_.fvals()[i] = eval(set_.point(i));
    Index c = -1;
    for (Index i = 0; i < npt; ++i) {
      if (!feasible(set_.point(i))) continue;
      if (c < 0 || less_nan_last(set_.fvals()[i], set_.fvals()[c])) c = i;
    }
    set_.set_center(c < 0 ? 0 : c);
    model_ = SurrogateModel::zero(set_.dim(), set_.base());
    rebuild();

    for (Index iter = 1;; ++iter) {
      const Vector x_k = set_.center();
      const double fk = set_.fvals()[set_.center_index()];
      st_.x_k = x_k;
      detail::emit_trace(opts_, iter, record_.size(), st_.delta, st_.rho, best_.raw(), best_.merit());
      if ((set_.base() - x_k).norm() > 10.0 * st_.delta) {
        try {
          shift_base(set_, model_, x_k);
        } catch (const DfoError&) {
          throw Stop{SolveStatus::ModelBreakdown};
        }
      }
      Vector s = fl_.step(model_, x_k, st_.delta);
      const double sn = s.norm();
      if (!(sn >= 0.5 * st_.rho)) {
        const double old_delta = st_.delta;
        st_.delta = 0.1 * st_.delta;
        if (st_.delta <= 1.5 * st_.rho) st_.delta = st_.rho;
        const Index far = farthest(2.0 * st_.delta);
        if (far >= 0 && geometry_step(far)) continue;
        if (old_delta <= st_.rho) reduce_rho();
        continue;
      }
      Vector xt = x_k + s;
      if (fl_.clip) fl_.clip(xt);
      const double pred = model_.value(x_k) - model_.value(xt);
      const double ft = eval(xt);
      double ratio = -1.0;
      if (pred > 0.0 && std::isfinite(pred)) ratio = (fk - ft) / pred;
      if (std::isnan(ratio)) ratio = -1.0;
      const double old_delta = st_.delta;
      update_radius(st_, ratio);
      const bool included = include(xt, ft);
      if (ratio < 0.1 || !included) {
        const Index far = farthest(2.0 * std::max(st_.delta, st_.rho));
        if (far >= 0 && geometry_step(far)) continue;
        if (ratio < 0.1 && old_delta <= st_.rho) reduce_rho();
      }
    }
  }

  const ObjectiveFn& f_;
  const RunRecord& record_;
  Flavor& fl_;
  const SolverOptions& opts_;
  Index budget_;
  TrustRegionState st_;
  BestTracker best_;
  InterpolationSet set_;
  SurrogateModel model_;
  std::vector<double> rho_history_;
};

SolveResult finish(SolveResult res, const RunRecord& record) {
  res.history = record;
  res.neval = record.size();
  return res;
}

void require_unconstrained(const Problem& p, const char* who) {
  if (p.has_finite_bounds() || p.has_lin_ineq() || p.has_lin_eq() || p.has_nl_ineq() || p.has_nl_eq()) {
    throw InvalidProblem(std::string(who) + " handles unconstrained problems only");
  }
}

Vector newuoa_step(const SurrogateModel& model, const Vector& x_k, double delta) {
  const ModelEvaluation ev = evaluate(model, x_k);
  TrustRegionStep trs = truncated_cg(ev.gradient, model.H, delta);
  if (trs.on_boundary) return two_dim_refine(model, trs.step, x_k, delta);
  return trs.step;
}

}  // namespace

SolveResult run_newuoa(const Problem& problem, const SolverOptions& opts) {
  require_unconstrained(problem, "newuoa");
  detail::check_options(opts);
  const Index n = problem.dim();
  const Index npt = opts.npt.value_or(2 * n + 1);
  RunRecord record;
  const Problem wrapped = detail::wrap_for(problem, opts, record);
  Flavor fl;
  fl.id = SolverId::Newuoa;
  fl.variant = ModelVariant::QuadraticKKT;
  fl.x0 = problem.x0();
  fl.initial_points = init_set(fl.x0, opts.rho_beg, npt, fl.variant).points;
  fl.step = newuoa_step;
  fl.geometry = [](const LagrangeFunction& l, const InterpolationSet& s, Index t, const Vector& x, double db) {
    return geo_newuoa(l, s, t, x, db);
  };
  const Index budget = std::max(detail::default_budget(opts, n), npt);
  QuadraticLoop loop(wrapped.objective(), record, fl, opts, budget);
  return finish(loop.run(), record);
}

SolveResult run_uobyqa(const Problem& problem, const SolverOptions& opts) {
  require_unconstrained(problem, "uobyqa");
  detail::check_options(opts);
  const Index n = problem.dim();
  if (n < 2) throw DimensionTooSmall("uobyqa needs at least two variables");
  const Index npt = quadratic_dof(n);
  RunRecord record;
  const Problem wrapped = detail::wrap_for(problem, opts, record);
  Flavor fl;
  fl.id = SolverId::Uobyqa;
  fl.variant = ModelVariant::QuadraticFull;
  fl.x0 = problem.x0();
  fl.initial_points = init_set(fl.x0, opts.rho_beg, npt, fl.variant).points;
  fl.step = [](const SurrogateModel& model, const Vector& x_k, double delta) {
    const ModelEvaluation ev = evaluate(model, x_k);
    return more_sorensen(ev.gradient, model.H, delta).step;
  };
  fl.geometry = [](const LagrangeFunction& l, const InterpolationSet&, Index, const Vector& x, double db) {
    return geo_uobyqa(l, x, db);
  };
  const Index budget = std::max(detail::default_budget(opts, n), npt);
  QuadraticLoop loop(wrapped.objective(), record, fl, opts, budget);
  return finish(loop.run(), record);
}

SolveResult run_bobyqa(const Problem& problem, const SolverOptions& opts) {
  if (problem.has_lin_ineq() || problem.has_lin_eq() || problem.has_nl_ineq() || problem.has_nl_eq()) {
    throw InvalidProblem("bobyqa handles bound constraints only");
  }
  detail::check_options(opts);
  const Index nfull = problem.dim();
  const Vector& lo_full = problem.lower();
  const Vector& up_full = problem.upper();
  std::vector<Index> free;
  for (Index i = 0; i < nfull; ++i) {
    if (lo_full[i] < up_full[i]) free.push_back(i);
  }
  Vector base_full = problem.x0();
  for (Index i = 0; i < nfull; ++i) base_full[i] = std::clamp(base_full[i], lo_full[i], up_full[i]);

  RunRecord record;
  const Problem wrapped = detail::wrap_for(problem, opts, record);
  const ObjectiveFn fw = wrapped.objective();
  const Index n = static_cast<Index>(free.size());
  if (n == 0) {
    SolveResult res;
    res.solver = SolverId::Bobyqa;
    try {
      fw(base_full);
      res.x = base_full;
      res.fun = record.back().raw;
    } catch (const CallbackPanic& e) {
      res.status = SolveStatus::CallbackError;
      res.message = e.what();
      res.x = base_full;
      res.fun = std::numeric_limits<double>::quiet_NaN();
    }
    return finish(res, record);
  }
  auto expand = [base_full, free](const Vector& z) {
    Vector x = base_full;
    for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = z[static_cast<Index>(k)];
    return x;
  };
  Vector lo(n), up(n), z0(n);
  for (Index k = 0; k < n; ++k) {
    lo[k] = lo_full[free[k]];
    up[k] = up_full[free[k]];
    z0[k] = base_full[free[k]];
  }
  SolverOptions o = opts;
  double min_width = kInf;
  for (Index k = 0; k < n; ++k) min_width = std::min(min_width, up[k] - lo[k]);
  o.rho_beg = std::min(opts.rho_beg, 0.5 * min_width);
  o.rho_end = std::min(opts.rho_end, o.rho_beg);
  const double rho = o.rho_beg;

  // Keep x0 at least rho away from a bound unless it sits on the bound.
  std::vector<int> side(static_cast<std::size_t>(n), 0);
  for (Index k = 0; k < n; ++k) {
    if (z0[k] <= lo[k]) {
      z0[k] = lo[k];
      side[k] = -1;
    } else if (z0[k] >= up[k]) {
      z0[k] = up[k];
      side[k] = 1;
    } else if (z0[k] < lo[k] + rho) {
      z0[k] = lo[k] + rho;
    } else if (z0[k] > up[k] - rho) {
      z0[k] = up[k] - rho;
    }
  }
  const Index npt = opts.npt.value_or(2 * n + 1);
  if (npt < min_npt(ModelVariant::QuadraticKKT, n) || npt > max_npt(ModelVariant::QuadraticKKT, n)) {
    throw BadNpt("npt is outside the legal range for the free variables");
  }
  Matrix pts = z0.transpose().replicate(npt, 1);
  auto first_step = [&](Index k) { return side[k] == 1 ? -rho : rho; };
  auto second_step = [&](Index k) { return side[k] == 0 ? -rho : (side[k] == -1 ? 2.0 * rho : -2.0 * rho); };
  Index r = 1;
  for (Index k = 0; k < n && r < npt; ++k, ++r) pts(r, k) += first_step(k);
  for (Index k = 0; k < n && r < npt; ++k, ++r) pts(r, k) += second_step(k);
  for (Index gap = 1; gap <= n / 2 && r < npt; ++gap) {
    for (Index i = 0; i < n && r < npt; ++i) {
      if (2 * gap == n && i >= n / 2) break;
      const Index j = (i + gap) % n;
      pts(r, i) += first_step(i);
      pts(r, j) += first_step(j);
      ++r;
    }
  }
  for (Index i = 0; i < npt; ++i) {
    for (Index k = 0; k < n; ++k) pts(i, k) = std::clamp(pts(i, k), lo[k], up[k]);
  }

  Flavor fl;
  fl.id = SolverId::Bobyqa;
  fl.variant = ModelVariant::QuadraticKKT;
  fl.x0 = z0;
  fl.initial_points = pts;
  fl.clip = [lo, up](Vector& x) {
    for (Index k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lo[k], up[k]);
  };
  fl.step = [lo, up](const SurrogateModel& model, const Vector& x_k, double delta) {
    const ModelEvaluation ev = evaluate(model, x_k);
    CgOptions cg;
    cg.refine = true;
    return tcg_bounds(ev.gradient, model.H, delta, lo, up, x_k, cg).step;
  };
  fl.geometry = [lo, up](const LagrangeFunction& l, const InterpolationSet& s, Index t, const Vector& x, double db) {
    return geo_bobyqa(l, s, t, x, db, lo, up);
  };
  const ObjectiveFn reduced = [fw, expand](const Vector& z) { return fw(expand(z)); };
  const Index budget = std::max(detail::default_budget(opts, nfull), npt);
  QuadraticLoop loop(reduced, record, fl, o, budget);
  SolveResult res = loop.run();
  res.x = expand(res.x);
  return finish(res, record);
}

SolveResult run_lincoa(const Problem& problem, const SolverOptions& opts) {
  if (problem.has_lin_eq() || problem.has_nl_ineq() || problem.has_nl_eq()) {
    throw InvalidProblem("lincoa handles bounds and linear inequalities only");
  }
  detail::check_options(opts);
  const Index n = problem.dim();
  std::vector<Vector> rows;
  std::vector<double> rhs;
  if (problem.has_lin_ineq()) {
    for (Index i = 0; i < problem.lin_ineq()->A.rows(); ++i) {
      rows.push_back(problem.lin_ineq()->A.row(i).transpose());
      rhs.push_back(problem.lin_ineq()->b[i]);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(problem.upper()[i])) {
      rows.push_back(Vector::Unit(n, i));
      rhs.push_back(problem.upper()[i]);
    }
    if (std::isfinite(problem.lower()[i])) {
      rows.push_back(-Vector::Unit(n, i));
      rhs.push_back(-problem.lower()[i]);
    }
  }
  const Index m = static_cast<Index>(rows.size());
  Matrix A(m, n);
  Vector b(m);
  for (Index i = 0; i < m; ++i) {
    A.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    b[i] = rhs[static_cast<std::size_t>(i)];
  }

  Vector x0 = problem.x0();
  if (m > 0) {
    const ProjectionResult pr = project_start(x0, problem.lower(), problem.upper(),
                                              problem.has_lin_ineq() ? &*problem.lin_ineq() : nullptr);
    x0 = pr.x;
  }
  // The center must stay feasible; relax b where x0 is still infeasible.
  Vector bw = b;
  if (m > 0) bw = b.cwiseMax(A * x0);
  Vector tol(m);
  for (Index i = 0; i < m; ++i) tol[i] = 1e-10 * std::max(1.0, std::abs(bw[i]));

  const Index npt = opts.npt.value_or(2 * n + 1);
  RunRecord record;
  const Problem wrapped = detail::wrap_for(problem, opts, record);
  Flavor fl;
  fl.id = SolverId::Lincoa;
  fl.variant = ModelVariant::QuadraticKKT;
  fl.x0 = x0;
  fl.initial_points = init_set(x0, opts.rho_beg, npt, fl.variant).points;
  fl.feasible = [A, bw, tol](const Vector& x) {
    if (A.rows() == 0) return true;
    return ((A * x - bw).array() <= tol.array()).all();
  };
  fl.step = [A, bw](const SurrogateModel& model, const Vector& x_k, double delta) {
    const ModelEvaluation ev = evaluate(model, x_k);
    return tcg_linear(ev.gradient, model.H, delta, A, bw, x_k).step;
  };
  fl.geometry = [A, bw](const LagrangeFunction& l, const InterpolationSet& s, Index t, const Vector& x, double db) {
    return geo_lincoa(l, s, t, x, db, A, bw);
  };
  const Index budget = std::max(detail::default_budget(opts, n), npt);
  QuadraticLoop loop(wrapped.objective(), record, fl, opts, budget);
  SolveResult res = loop.run();
  if (m > 0) res.constraint_violation = std::max(0.0, (A * res.x - b).maxCoeff());
  return finish(res, record);
}

}  // namespace dfo
