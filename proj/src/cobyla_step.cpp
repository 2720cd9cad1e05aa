#include <algorithm>
#include <cmath>

#include "circle.hpp"
#include "dfo/subproblems.hpp"

namespace dfo {

namespace {

// Least-norm s with G s >= 1 row-wise (least-distance programming through
// NNLS). Returns false when the system has no solution, i.e. when 0 lies in
// the convex hull of the rows.
bool least_distance_direction(const Matrix& G, Vector& s) {
  const Index k = G.rows();
  const Index n = G.cols();
  Matrix E(k, n + 1);
  E.leftCols(n) = G;
  E.col(n).setOnes();
  Vector f = Vector::Zero(n + 1);
  f[n] = 1.0;
  const Vector u = nnls_cone(E, f);
  const Vector r = E.transpose() * u - f;
  if (!(std::abs(r[n]) > 1e-12) || r.norm() <= 1e-12) return false;
  s = -r.head(n) / r[n];
  return s.allFinite();
}

}  // namespace

TrustRegionStep cobyla_step(const SurrogateModel& obj, std::span<const SurrogateModel> cons, const Vector& x_k,
                            double delta) {
  const Index n = x_k.size();
  const Index m = static_cast<Index>(cons.size());
  TrustRegionStep out;
  out.step = Vector::Zero(n);
  if (!(delta > 0.0)) return out;
  const Vector g = obj.gradient(x_k);
  Vector c(m);
  Matrix A(m, n);
  for (Index i = 0; i < m; ++i) {
    c[i] = cons[static_cast<std::size_t>(i)].value(x_k);
    A.row(i) = cons[static_cast<std::size_t>(i)].gradient(x_k).transpose();
  }
  if (!g.allFinite() || !c.allFinite() || !A.allFinite()) return out;
  Vector& s = out.step;
  auto violations = [&](const Vector& step) { return Vector(-c - A * step); };
  auto max_violation = [&](const Vector& step) {
    return m > 0 ? std::max(0.0, violations(step).maxCoeff()) : 0.0;
  };
  const double cscale = 1.0 + (m > 0 ? c.cwiseAbs().maxCoeff() : 0.0);
  const double tol = 1e-13 * cscale;
  const int cap = 100 * static_cast<int>(m + n) + 10;

  // Stage 1: lower the largest linearized violation.
  double v = max_violation(s);
  std::vector<Index> active;
  for (int it = 0; it < cap && v > 0.0; ++it) {
    out.iterations += 1;
    const Vector vi = violations(s);
    active.clear();
    for (Index i = 0; i < m; ++i) {
      if (vi[i] >= v - tol) active.push_back(i);
    }
    Matrix G(static_cast<Index>(active.size()), n);
    for (std::size_t k = 0; k < active.size(); ++k) G.row(static_cast<Index>(k)) = A.row(active[k]);
    Vector dir;
    if (!least_distance_direction(G, dir)) break;
    const double t_ball = detail::boundary_root(s, dir, delta);
    double t = std::min(t_ball, v);
    for (Index j = 0; j < m; ++j) {
      if (vi[j] >= v - tol) continue;
      const double rate = 1.0 - A.row(j).dot(dir);
      if (rate > 0.0) t = std::min(t, (v - vi[j]) / rate);
    }
    t = std::max(t, 0.0);
    s += t * dir;
    v = max_violation(s);
    if (t >= t_ball) {
      out.on_boundary = true;
      break;
    }
    if (t == 0.0 && it > 0 && v > 0.0) {
      // No progress possible along the current active set.
      const Vector again = violations(s);
      std::size_t count = 0;
      for (Index i = 0; i < m; ++i) {
        if (again[i] >= v - tol) ++count;
      }
      if (count == active.size()) break;
    }
  }

  // Stage 2: lower the objective without raising the violation level.
  if (!out.on_boundary) {
    const double level = max_violation(s);
    const Vector lb = -c - Vector::Constant(m, level);
    const double gn = g.norm();
    for (int it = 0; it < cap && gn > 0.0; ++it) {
      out.iterations += 1;
      active.clear();
      for (Index i = 0; i < m; ++i) {
        if (A.row(i).dot(s) <= lb[i] + tol) active.push_back(i);
      }
      Vector p = -g;
      if (!active.empty()) {
        Matrix Aa(static_cast<Index>(active.size()), n);
        for (std::size_t k = 0; k < active.size(); ++k) Aa.row(static_cast<Index>(k)) = A.row(active[k]);
        const Vector mu = nnls_cone(Aa, g);
        p = -(g - Aa.transpose() * mu);
      }
      const double pn = p.norm();
      if (!(pn > 1e-12 * gn)) break;
      const double t_ball = detail::boundary_root(s, p, delta);
      double t = t_ball;
      Index hit = -1;
      for (Index i = 0; i < m; ++i) {
        if (std::find(active.begin(), active.end(), i) != active.end()) continue;
        const double ap = A.row(i).dot(p);
        if (ap >= -1e-14 * A.row(i).norm() * pn) continue;
        const double lim = std::max(0.0, (A.row(i).dot(s) - lb[i]) / (-ap));
        if (lim < t) {
          t = lim;
          hit = i;
        }
      }
      s += t * p;
      if (hit < 0) {
        out.on_boundary = true;
        break;
      }
    }
  }

  const double sn = s.norm();
  if (sn > delta) s *= delta / sn;
  out.active_set = active;
  out.linear_violation = max_violation(s);
  out.predicted_reduction = -g.dot(s);
  return out;
}

}  // namespace dfo
