#include <cmath>
#include <limits>
#include <stdexcept>

#include "dfo/bench.hpp"
#include "dfo/frontend.hpp"

namespace dfo::bench {

namespace {

struct BudgetExhausted {};

class CountedObjective {
 public:
  CountedObjective(const ObjectiveFn& f, Index max_evals, const Vector& x0)
      : f_(f), max_(max_evals), best_x_(x0) {}

  double operator()(const Vector& x) {
    if (n_ >= max_) throw BudgetExhausted{};
    ++n_;
    const double v = f_(x);
    if (v < best_f_ || (std::isnan(best_f_) && !std::isnan(v))) {
      best_f_ = v;
      best_x_ = x;
    }
    return v;
  }

  Index count() const { return n_; }
  const Vector& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }

 private:
  const ObjectiveFn& f_;
  Index max_;
  Index n_ = 0;
  Vector best_x_;
  double best_f_ = std::numeric_limits<double>::quiet_NaN();
};

Vector fd_gradient(CountedObjective& f, const Vector& x, double fx, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    g[i] = (f(xp) - fx) / (xp[i] - x[i]);
    xp[i] = x[i];
  }
  return g;
}

struct LineSearchResult {
  bool ok = false;
  double t = 0.0;
  Vector x;
  double f = 0.0;
  Vector g;
};

/// Bisection/expansion search for a weak Wolfe point.
LineSearchResult weak_wolfe(CountedObjective& f, const Vector& x, double fx, const Vector& g, const Vector& d,
                            double t0, double c1, double c2, double h) {
  const double slope = g.dot(d);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double t = t0;
  LineSearchResult res;
  for (int it = 0; it < 50; ++it) {
    const Vector xt = x + t * d;
    const double ft = f(xt);
    if (!(ft <= fx + c1 * t * slope)) {
      hi = t;
    } else {
      Vector gt = fd_gradient(f, xt, ft, h);
      if (gt.dot(d) < c2 * slope) {
        lo = t;
      } else {
        res.ok = true;
        res.t = t;
        res.x = xt;
        res.f = ft;
        res.g = std::move(gt);
        return res;
      }
    }
    t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo;
  }
  return res;
}

}  // namespace

BaselineResult fd_minimize(FdVariant variant, const ObjectiveFn& fn, const Vector& x0, const BaselineOptions& opts) {
  if (!(opts.h > 0.0)) throw std::invalid_argument("difference step must be positive");
  CountedObjective f(fn, opts.max_evals, x0);
  BaselineResult out;
  const Index n = x0.size();
  const double c2 = variant == FdVariant::BFGS ? 0.9 : 0.1;
  try {
    Vector x = x0;
    double fx = f(x);
    if (!std::isfinite(fx)) throw BudgetExhausted{};
    Vector g = fd_gradient(f, x, fx, opts.h);
    Matrix hinv = Matrix::Identity(n, n);
    bool scaled = false;
    Vector d = -g;
    double t = 1.0 / std::max(1.0, g.norm());
    for (Index iter = 0;; ++iter) {
      if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() <= opts.gtol) break;
      if (variant == FdVariant::BFGS) {
        d = -hinv * g;
        if (!(g.dot(d) < 0.0)) {
          hinv.setIdentity();
          d = -g;
        }
        t = 1.0;
      } else if (!(g.dot(d) < 0.0)) {
        d = -g;
      }
      const LineSearchResult ls = weak_wolfe(f, x, fx, g, d, t, 1e-4, c2, opts.h);
      if (!ls.ok) break;
      const Vector s = ls.x - x;
      const Vector y = ls.g - g;
      if (variant == FdVariant::BFGS) {
        const double ys = y.dot(s);
        if (ys > 1e-12 * s.norm() * y.norm()) {
          if (!scaled) {
            hinv = (ys / y.squaredNorm()) * Matrix::Identity(n, n);
            scaled = true;
          }
          const double rho = 1.0 / ys;
          const Matrix v = Matrix::Identity(n, n) - rho * s * y.transpose();
          hinv = v * hinv * v.transpose() + rho * s * s.transpose();
        }
      } else {
        const double beta = std::max(0.0, ls.g.dot(y) / g.squaredNorm());
        const double prev_slope = g.dot(d);
        const bool restart = (iter + 1) % n == 0;
        d = restart ? Vector(-ls.g) : Vector(-ls.g + beta * d);
        const double new_slope = ls.g.dot(d);
        t = new_slope < 0.0 ? ls.t * prev_slope / new_slope : 1.0 / std::max(1.0, ls.g.norm());
      }
      x = ls.x;
      fx = ls.f;
      g = ls.g;
      out.iterations = iter + 1;
    }
  } catch (const BudgetExhausted&) {
  }
  out.x = f.best_x();
  out.fun = f.best_f();
  out.neval = f.count();
  return out;
}

SolverFn make_solver(const std::string& name) {
  if (name == "bfgs" || name == "cg") {
    const FdVariant v = name == "bfgs" ? FdVariant::BFGS : FdVariant::CG;
    return [v](const ObjectiveFn& f, const Vector& x0, Index budget) {
      BaselineOptions o;
      o.max_evals = budget;
      fd_minimize(v, f, x0, o);
    };
  }
  std::optional<SolverId> id;
  bool barrier = true;
  if (name == "pdfo-nobarrier") {
    barrier = false;
  } else if (name != "pdfo") {
    id = parse_solver(name);
    if (!id) throw std::invalid_argument("unknown solver: " + name);
  }
  return [id, barrier](const ObjectiveFn& f, const Vector& x0, Index budget) {
    ProblemDefinition d;
    d.objective = f;
    d.x0 = x0;
    SolverOptions o;
    o.max_evals = budget;
    o.barrier = barrier;
    solve(Problem(std::move(d)), o, id);
  };
}

}  // namespace dfo::bench
