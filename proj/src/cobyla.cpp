#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "driver_internal.hpp"
#include "dfo/drivers.hpp"
#include "dfo/subproblems.hpp"

namespace dfo {

namespace {

using detail::Stop;

constexpr double kMuCap = 1e12;

/// Constraint values in the c(x) >= 0 convention.
class ConstraintMap {
 public:
  explicit ConstraintMap(const Problem& p) : p_(p) {
    const Index n = p.dim();
    for (Index i = 0; i < n; ++i) {
      if (std::isfinite(p.lower()[i])) ++m_;
      if (std::isfinite(p.upper()[i])) ++m_;
    }
    if (p.has_lin_ineq()) m_ += p.lin_ineq()->A.rows();
    if (p.has_lin_eq()) m_ += 2 * p.lin_eq()->A.rows();
    if (p.has_nl_ineq()) m_ += p.nl_ineq()->size;
    if (p.has_nl_eq()) m_ += 2 * p.nl_eq()->size;
  }

  Index size() const { return m_; }

  Vector operator()(const Vector& x) const {
    Vector c(m_);
    Index k = 0;
    for (Index i = 0; i < x.size(); ++i) {
      if (std::isfinite(p_.lower()[i])) c[k++] = x[i] - p_.lower()[i];
      if (std::isfinite(p_.upper()[i])) c[k++] = p_.upper()[i] - x[i];
    }
    if (p_.has_lin_ineq()) {
      const Vector r = p_.lin_ineq()->b - p_.lin_ineq()->A * x;
      c.segment(k, r.size()) = r;
      k += r.size();
    }
    if (p_.has_lin_eq()) {
      const Vector r = p_.lin_eq()->A * x - p_.lin_eq()->b;
      c.segment(k, r.size()) = r;
      c.segment(k + r.size(), r.size()) = -r;
      k += 2 * r.size();
    }
    if (p_.has_nl_ineq()) {
      const Vector v = p_.nl_ineq()->fn(x);
      c.segment(k, v.size()) = -v;
      k += v.size();
    }
    if (p_.has_nl_eq()) {
      const Vector v = p_.nl_eq()->fn(x);
      c.segment(k, v.size()) = v;
      c.segment(k + v.size(), v.size()) = -v;
    }
    return c;
  }

 private:
  const Problem& p_;
  Index m_ = 0;
};

double violation_of(const Vector& c) {
  if (c.size() == 0) return 0.0;
  const double lo = c.minCoeff();
  if (std::isnan(lo)) return kInf;
  return std::max(0.0, -lo);
}

struct Sample {
  Vector x;
  double raw;
  double f;
  double v;
};

class CobylaLoop {
 public:
  CobylaLoop(const Problem& wrapped, RunRecord& record, const SolverOptions& opts, Index budget)
      : cons_(wrapped), f_(wrapped.objective()), record_(record), opts_(opts), budget_(budget) {}

  SolveResult run(const Vector& x0) {
    SolveResult result;
    result.solver = SolverId::Cobyla;
    rho_ = opts_.rho_beg;
    rho_end_ = std::min(opts_.rho_end, opts_.rho_beg);
    rho_history_.push_back(rho_);
    try {
      loop(x0);
    } catch (const Stop& s) {
      result.status = s.status;
    } catch (const CallbackPanic& e) {
      result.status = SolveStatus::CallbackError;
      result.message = e.what();
    }
    if (result.status == SolveStatus::ModelBreakdown && result.message.empty()) {
      result.message = "non-finite model coefficients";
    }
    const Sample* best = select_best();
    if (best != nullptr) {
      result.x = best->x;
      result.fun = best->raw;
      result.constraint_violation = best->v;
    } else {
      result.x = x0;
      result.fun = std::numeric_limits<double>::quiet_NaN();
      result.constraint_violation = samples_.empty() ? 0.0 : samples_.front().v;
    }
    result.rho_history = rho_history_;
    return result;
  }

 private:
  std::pair<double, Vector> eval(const Vector& x) {
    if (record_.size() >= budget_) throw Stop{SolveStatus::MaxEvals};
    const double fv = f_(x);
    const double raw = record_.back().raw;
    Vector c = cons_(x);
    const double v = violation_of(c);
    record_.set_last_violation(v);
    samples_.push_back(Sample{x, raw, fv, v});
    if (opts_.target && v <= 0.0 && raw <= *opts_.target) throw Stop{SolveStatus::TargetReached};
    return {fv, std::move(c)};
  }

  /// Lowest merit under the largest penalty seen, restricted to the points
  /// whose violation is within a factor two of the smallest one.
  const Sample* select_best() const {
    double vmin = kInf;
    for (const Sample& s : samples_) vmin = std::min(vmin, s.v);
    if (samples_.empty() || !std::isfinite(vmin)) return nullptr;
    const double cut = std::max(2.0 * vmin, 1e-10);
    const Sample* best = nullptr;
    double best_phi = kInf;
    for (const Sample& s : samples_) {
      if (s.v > cut || std::isnan(s.f)) continue;
      const double phi = s.f + mu_max_ * s.v;
      if (best == nullptr || phi < best_phi || (phi == best_phi && (s.v < best->v || (s.v == best->v && s.f < best->f)))) {
        best = &s;
        best_phi = phi;
      }
    }
    return best;
  }

  double merit(double f, double v) const { return f + mu_ * v; }

  double vertex_violation(Index j) const { return violation_of(set_.cvals().row(j).transpose()); }

  Index choose_center() const {
    Index c = 0;
    double phi_c = kInf;
    double v_c = kInf;
    for (Index j = 0; j < set_.npt(); ++j) {
      const double v = vertex_violation(j);
      const double phi = merit(set_.fvals()[j], v);
      if (std::isnan(phi)) continue;
      if (phi < phi_c || (phi == phi_c && v < v_c)) {
        c = j;
        phi_c = phi;
        v_c = v;
      }
    }
    return c;
  }

  void rebuild() {
    try {
      obj_ = build_linear(set_);
      cons_models_.clear();
      for (Index i = 0; i < set_.cvals().cols(); ++i) cons_models_.push_back(build_linear(set_, set_.cvals().col(i)));
    } catch (const DfoError&) {
      throw Stop{SolveStatus::ModelBreakdown};
    }
    if (!obj_.all_finite()) throw Stop{SolveStatus::ModelBreakdown};
    for (const SurrogateModel& m : cons_models_) {
      if (!m.all_finite()) throw Stop{SolveStatus::ModelBreakdown};
    }
  }

  double model_merit(const Vector& x) const {
    double v = 0.0;
    for (const SurrogateModel& m : cons_models_) v = std::max(v, -m.value(x));
    return obj_.value(x) + mu_ * v;
  }

  bool replace(Index t, const Vector& x, double f, const Vector& c) {
    try {
      smw_replace(set_, t, x, f, &c, rho_);
    } catch (const DfoError&) {
      return false;
    }
    rebuild();
    return true;
  }

  /// Index of the vertex to move away from, or -1 when the simplex is acceptable.
  Index bad_vertex() const {
    const Vector x_k = set_.center();
    Index far = -1;
    double far_d = 2.1 * rho_;
    Index flat = -1;
    double flat_s = 0.25 * rho_;
    for (Index j = 0; j < set_.npt(); ++j) {
      if (j == set_.center_index()) continue;
      const double d = (set_.point(j) - x_k).norm();
      if (d > far_d) {
        far_d = d;
        far = j;
      }
      const double gn = lagrange(set_, j).g.norm();
      const double sig = gn > 0.0 ? 1.0 / gn : kInf;
      if (sig < flat_s) {
        flat_s = sig;
        flat = j;
      }
    }
    return far >= 0 ? far : flat;
  }

  bool geometry_step(Index j) {
    const Vector x_k = set_.center();
    Vector dir;
    try {
      dir = lagrange(set_, j).g;
    } catch (const DfoError&) {
      return false;
    }
    const double dn = dir.norm();
    if (!(dn > 0.0) || !std::isfinite(dn)) return false;
    dir *= 0.5 * rho_ / dn;
    const Vector xp = x_k + dir;
    const Vector xm = x_k - dir;
    const Vector xg = model_merit(xm) < model_merit(xp) ? xm : xp;
    auto [fg, cg] = eval(xg);
    return replace(j, xg, fg, cg);
  }

  void reduce_mu() {
    if (mu_ <= 0.0) return;
    double denom = 0.0;
    const Index m = set_.cvals().cols();
    for (Index k = 0; k < m; ++k) {
      const double cmin = set_.cvals().col(k).minCoeff();
      const double cmax = set_.cvals().col(k).maxCoeff();
      if (cmin < 0.5 * cmax) {
        const double temp = std::max(cmax, 0.0) - cmin;
        denom = denom <= 0.0 ? temp : std::min(denom, temp);
      }
    }
    const double spread = set_.fvals().maxCoeff() - set_.fvals().minCoeff();
    if (denom == 0.0) mu_ = 0.0;
    else if (spread < mu_ * denom) mu_ = spread / denom;
  }

  void reduce_rho() {
    if (rho_ <= rho_end_) throw Stop{SolveStatus::RhoEndReached};
    rho_ = 0.5 * rho_;
    if (rho_ <= 1.5 * rho_end_) rho_ = rho_end_;
    rho_history_.push_back(rho_);
    reduce_mu();
  }

  void set_mu(double mu) {
    mu_ = mu;
    mu_max_ = std::max(mu_max_, mu_);
  }

  void loop(const Vector& x0) {
    const Index n = x0.size();
    const Index m = cons_.size();
    Matrix pts = x0.transpose().replicate(n + 1, 1);
    for (Index i = 0; i < n; ++i) pts(i + 1, i) += rho_;
    set_ = InterpolationSet(ModelVariant::LinearFull, pts, x0);
    set_.cvals() = Matrix::Zero(n + 1, m);
    for (Index i = 0; i <= n; ++i) {
      auto [f, c] = eval(set_.point(i));
      set_.fvals()[i] = f;
      set_.cvals().row(i) = c.transpose();
    }
    rebuild();

    bool pending = false;
    for (Index iter = 1;; ++iter) {
      set_.set_center(choose_center());
      const Index c = set_.center_index();
      const Vector x_k = set_.center();
      const double f_k = set_.fvals()[c];
      const double v_k = vertex_violation(c);
      detail::emit_trace(opts_, iter, record_.size(), rho_, rho_, f_k, merit(f_k, v_k));

      if (pending) {
        pending = false;
        const Index j = bad_vertex();
        if (j >= 0 && geometry_step(j)) continue;
        reduce_rho();
        continue;
      }

      const TrustRegionStep trs = cobyla_step(obj_, cons_models_, x_k, rho_);
      const Vector& s = trs.step;
      if (!(s.norm() >= 0.5 * rho_)) {
        pending = true;
        continue;
      }
      const double df = trs.predicted_reduction;
      const double dv = v_k - trs.linear_violation;
      if (dv > 0.0 && df < 0.0) {
        const double barmu = -df / dv;
        if (mu_ < 1.5 * barmu) {
          set_mu(std::min(2.0 * barmu, kMuCap));
          if (choose_center() != c) continue;
        }
      }
      const double pred = df + mu_ * dv;
      const Vector xt = x_k + s;
      auto [ft, ct] = eval(xt);
      const double vt = violation_of(ct);
      double ratio = -1.0;
      if (pred > 0.0 && std::isfinite(pred)) ratio = (merit(f_k, v_k) - merit(ft, vt)) / pred;
      if (std::isnan(ratio)) ratio = -1.0;

      TrustRegionState st;
      st.x_k = x_k;
      st.delta = rho_;
      st.rho = rho_;
      Index t = -1;
      try {
        t = select_drop_tr(set_, xt, st);
      } catch (const AllTinyDenominators&) {
        pending = true;
        continue;
      }
      if (!replace(t, xt, ft, ct) || ratio < 0.1) pending = true;
    }
  }

  ConstraintMap cons_;
  ObjectiveFn f_;
  RunRecord& record_;
  const SolverOptions& opts_;
  Index budget_;
  double rho_ = 1.0;
  double rho_end_ = 1e-6;
  double mu_ = 0.0;
  double mu_max_ = 0.0;
  InterpolationSet set_;
  SurrogateModel obj_;
  std::vector<SurrogateModel> cons_models_;
  std::vector<Sample> samples_;
  std::vector<double> rho_history_;
};

}  // namespace

SolveResult run_cobyla(const Problem& problem, const SolverOptions& opts) {
  detail::check_options(opts);
  const Index n = problem.dim();
  RunRecord record;
  const Problem wrapped = detail::wrap_for(problem, opts, record);
  const Index budget = std::max(detail::default_budget(opts, n), n + 1);
  CobylaLoop loop(wrapped, record, opts, budget);
  SolveResult res = loop.run(problem.x0());
  res.history = record;
  res.neval = record.size();
  return res;
}

}  // namespace dfo
