#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "circle.hpp"
#include "dfo/subproblems.hpp"

namespace dfo {

namespace {

struct LineMax {
  double alpha = 0.0;
  double value = 0.0;
};

// max |p0 + a t + 0.5 c t^2| over t in [lo, hi].
LineMax line_max(double p0, double a, double c, double lo, double hi) {
  auto val = [&](double t) { return p0 + a * t + 0.5 * c * t * t; };
  LineMax best{lo, val(lo)};
  auto consider = [&](double t) {
    const double v = val(t);
    if (std::abs(v) > std::abs(best.value)) best = {t, v};
  };
  consider(hi);
  if (c != 0.0) {
    const double t = -a / c;
    if (t > lo && t < hi) consider(t);
  }
  return best;
}

GeometryStep make_step(const LagrangeFunction& lagr, Vector point, GeometryRecipe recipe) {
  GeometryStep out;
  out.lagrange_abs = std::abs(lagr.value(point));
  out.point = std::move(point);
  out.recipe = recipe;
  return out;
}

// Best point on the lines through x_k and the other interpolation points,
// restricted to the ball and to [lower, upper] when given.
bool best_line_point(const LagrangeFunction& lagr, const InterpolationSet& set, const Vector& x_k, double deltabar,
                     const Vector* lower, const Vector* upper, Vector& best_point, double& best_abs) {
  const ModelEvaluation ev = evaluate(lagr, x_k);
  bool found = false;
  for (Index j = 0; j < set.npt(); ++j) {
    Vector u = set.point(j) - x_k;
    const double un = u.norm();
    if (!(un > 0.0)) continue;
    u /= un;
    double lo = -deltabar;
    double hi = deltabar;
    if (lower != nullptr) {
      for (Index i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        double a = ((*lower)[i] - x_k[i]) / u[i];
        double b = ((*upper)[i] - x_k[i]) / u[i];
        if (a > b) std::swap(a, b);
        lo = std::max(lo, a);
        hi = std::min(hi, b);
      }
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
    }
    const LineMax lm = line_max(ev.value, ev.gradient.dot(u), u.dot(lagr.H * u), lo, hi);
    if (!found || std::abs(lm.value) > best_abs) {
      found = true;
      best_abs = std::abs(lm.value);
      best_point = x_k + lm.alpha * u;
    }
  }
  return found;
}

// Maximizes |l| over the circle of radius rad in span{d, w} around x_k.
Vector circle_max_abs(const LagrangeFunction& lagr, const Vector& x_k, const Vector& d, const Vector& w, double rad) {
  Vector u, v;
  if (!detail::orthonormal_pair(d, w, u, v)) return d;
  const ModelEvaluation ev = evaluate(lagr, x_k);
  const detail::TrigQuadratic tq = detail::restrict_to_circle(ev.gradient, lagr.H, u, v, rad);
  const double pi = std::numbers::pi;
  const double t = detail::best_angle([&](double a) { return std::abs(ev.value + tq(a)); }, -pi, pi, 128);
  return rad * (std::cos(t) * u + std::sin(t) * v);
}

void clip_to_box(Vector& x, const Vector& lower, const Vector& upper) {
  for (Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

}  // namespace

GeometryStep geo_uobyqa(const LagrangeFunction& lagr, const Vector& x_k, double deltabar) {
  const Index n = x_k.size();
  const ModelEvaluation ev = evaluate(lagr, x_k);
  const Vector& g = ev.gradient;
  const Matrix& H = lagr.H;

  Vector vdir;
  {
    Index jmax = 0;
    double best = -1.0;
    for (Index j = 0; j < n; ++j) {
      const double cn = H.col(j).squaredNorm();
      if (cn > best) {
        best = cn;
        jmax = j;
      }
    }
    vdir = H.col(jmax);
    const Vector Hv = H * vdir;
    if (Hv.norm() > 0.0) vdir = Hv;
  }
  GeometryStep best = make_step(lagr, x_k + deltabar * Vector::Unit(n, 0), GeometryRecipe::Gradient);
  auto consider = [&](const Vector& s, GeometryRecipe r) {
    const double v = std::abs(lagr.value(x_k + s));
    if (v > best.lagrange_abs) best = make_step(lagr, x_k + s, r);
  };
  const double gn = g.norm();
  const double vn = vdir.norm();
  Vector gh = gn > 0.0 ? Vector(g / gn) : Vector::Zero(n);
  Vector vh = vn > 0.0 ? Vector(vdir / vn) : Vector::Zero(n);
  if (gn > 0.0) {
    consider(deltabar * gh, GeometryRecipe::Gradient);
    consider(-deltabar * gh, GeometryRecipe::Gradient);
  }
  if (vn > 0.0) {
    consider(deltabar * vh, GeometryRecipe::Line);
    consider(-deltabar * vh, GeometryRecipe::Line);
  }
  if (gn > 0.0 && vn > 0.0) {
    const Vector s = circle_max_abs(lagr, x_k, gh, vh, deltabar);
    consider(s, GeometryRecipe::TwoDimRefined);
  }
  return best;
}

GeometryStep geo_newuoa(const LagrangeFunction& lagr, const InterpolationSet& set, Index drop, const Vector& x_k,
                        double deltabar) {
  const Index n = x_k.size();
  Vector u = set.point(drop) - x_k;
  const double un = u.norm();
  if (!(un > 0.0)) u = Vector::Unit(n, 0);
  else u /= un;
  const Vector plus = x_k + deltabar * u;
  const Vector minus = x_k - deltabar * u;
  Vector s = (lagr.value(plus) >= lagr.value(minus) ? plus : minus) - x_k;
  GeometryStep best = make_step(lagr, x_k + s, GeometryRecipe::Line);

  double current = best.lagrange_abs;
  for (int round = 0; round < 10; ++round) {
    const Vector w = lagr.gradient(x_k + s);
    const Vector cand = circle_max_abs(lagr, x_k, s, w, deltabar);
    const double v = std::abs(lagr.value(x_k + cand));
    if (!(v > current)) break;
    const double gain = v - current;
    s = cand;
    current = v;
    if (gain < 1e-2 * current) break;
  }
  if (current > best.lagrange_abs) best = make_step(lagr, x_k + s, GeometryRecipe::TwoDimRefined);
  return best;
}

GeometryStep geo_bobyqa(const LagrangeFunction& lagr, const InterpolationSet& set, Index /*drop*/, const Vector& x_k,
                        double deltabar, const Vector& lower, const Vector& upper) {
  const Index n = x_k.size();
  GeometryStep best;
  best.point = x_k;
  best.lagrange_abs = std::abs(lagr.value(x_k));
  best.recipe = GeometryRecipe::Line;

  Vector line_point;
  double line_abs = 0.0;
  if (best_line_point(lagr, set, x_k, deltabar, &lower, &upper, line_point, line_abs)) {
    clip_to_box(line_point, lower, upper);
    const GeometryStep cand = make_step(lagr, line_point, GeometryRecipe::Line);
    if (cand.lagrange_abs > best.lagrange_abs) best = cand;
  }

  // Cauchy step along +/- grad l, bent by the bounds.
  const Vector g0 = lagr.gradient(x_k);
  if (g0.norm() > 0.0) {
    for (const double sign : {1.0, -1.0}) {
      const Vector d = sign * g0;
      std::vector<bool> fixed(static_cast<std::size_t>(n), false);
      for (Index i = 0; i < n; ++i) {
        if (d[i] == 0.0 || (d[i] > 0.0 && x_k[i] >= upper[i]) || (d[i] < 0.0 && x_k[i] <= lower[i])) fixed[i] = true;
      }
      Vector s = Vector::Zero(n);
      for (Index seg = 0; seg <= n; ++seg) {
        Vector df = d;
        for (Index i = 0; i < n; ++i) {
          if (fixed[i]) df[i] = 0.0;
        }
        if (!(df.norm() > 0.0)) break;
        const double t_ball = detail::boundary_root(s, df, deltabar);
        double t_bound = kInf;
        Index ib = -1;
        for (Index i = 0; i < n; ++i) {
          if (fixed[i]) continue;
          const double lim = df[i] > 0.0 ? (upper[i] - x_k[i] - s[i]) / df[i] : (lower[i] - x_k[i] - s[i]) / df[i];
          if (lim < t_bound) {
            t_bound = std::max(0.0, lim);
            ib = i;
          }
        }
        const double tmax = std::min(t_ball, t_bound);
        const ModelEvaluation ev = evaluate(lagr, x_k + s);
        const LineMax lm = line_max(ev.value, ev.gradient.dot(df), df.dot(lagr.H * df), 0.0, tmax);
        Vector point = x_k + s + lm.alpha * df;
        clip_to_box(point, lower, upper);
        const GeometryStep cand = make_step(lagr, point, GeometryRecipe::Cauchy);
        if (cand.lagrange_abs > best.lagrange_abs) best = cand;
        if (t_ball <= t_bound || ib < 0) break;
        s += t_bound * df;
        s[ib] = (df[ib] > 0.0 ? upper[ib] : lower[ib]) - x_k[ib];
        fixed[ib] = true;
      }
    }
  }
  clip_to_box(best.point, lower, upper);
  const double sn = (best.point - x_k).norm();
  if (sn > deltabar) {
    best.point = x_k + (best.point - x_k) * (deltabar / sn);
    clip_to_box(best.point, lower, upper);
  }
  best.lagrange_abs = std::abs(lagr.value(best.point));
  return best;
}

GeometryStep geo_lincoa(const LagrangeFunction& lagr, const InterpolationSet& set, Index /*drop*/,
                        const Vector& x_k, double deltabar, const Matrix& A, const Vector& b,
                        const LincoaGeometryOptions& opts) {
  const Index n = x_k.size();
  const Index m = A.rows();
  const ModelEvaluation ev = evaluate(lagr, x_k);
  const Vector& g = ev.gradient;

  GeometryStep best = make_step(lagr, x_k + deltabar * Vector::Unit(n, 0), GeometryRecipe::Gradient);
  best.lagrange_abs = -1.0;
  Vector line_point;
  double line_abs = 0.0;
  if (best_line_point(lagr, set, x_k, deltabar, nullptr, nullptr, line_point, line_abs)) {
    best = make_step(lagr, line_point, GeometryRecipe::Line);
  }
  auto along = [&](const Vector& dir, GeometryRecipe r) {
    const Vector u = dir.normalized();
    const LineMax lm = line_max(ev.value, g.dot(u), u.dot(lagr.H * u), -deltabar, deltabar);
    return make_step(lagr, x_k + lm.alpha * u, r);
  };
  if (g.norm() > 0.0) {
    const GeometryStep grad = along(g, GeometryRecipe::Gradient);
    if (grad.lagrange_abs > best.lagrange_abs) best = grad;
  }
  if (best.lagrange_abs < 0.0) best.lagrange_abs = std::abs(lagr.value(best.point));

  if (m > 0 && g.norm() > 0.0) {
    const Vector resid = b - A * x_k;
    std::vector<Index> act;
    for (Index i = 0; i < m; ++i) {
      const double an = A.row(i).norm();
      if (an > 0.0 && resid[i] <= opts.active_factor * deltabar * an) act.push_back(i);
    }
    Vector pg = g;
    if (!act.empty()) {
      Matrix At(n, static_cast<Index>(act.size()));
      for (std::size_t c = 0; c < act.size(); ++c) At.col(static_cast<Index>(c)) = A.row(act[c]).transpose();
      Eigen::ColPivHouseholderQR<Matrix> qr(At);
      qr.setThreshold(1e-12);
      const Matrix Q = Matrix(qr.householderQ()).leftCols(qr.rank());
      pg = g - Q * (Q.transpose() * g);
    }
    if (pg.norm() > 1e-12 * g.norm()) {
      const GeometryStep proj = along(pg, GeometryRecipe::ProjectedGradient);
      bool nearly = true;
      for (Index i = 0; i < m; ++i) {
        if (A.row(i).dot(proj.point) - b[i] > opts.near_feasible * deltabar * A.row(i).norm()) nearly = false;
      }
      if (nearly && proj.lagrange_abs >= opts.min_ratio * best.lagrange_abs) best = proj;
    }
  }
  return best;
}

}  // namespace dfo
