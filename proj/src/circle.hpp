#ifndef DFO_SRC_CIRCLE_HPP
#define DFO_SRC_CIRCLE_HPP

#include <algorithm>
#include <cmath>

#include "dfo/types.hpp"

namespace dfo::detail {

/// q(t) = a cos t + b sin t + p cos^2 t + 2 r cos t sin t + q sin^2 t.
struct TrigQuadratic {
  double a = 0, b = 0, p = 0, q = 0, r = 0;

  double operator()(double t) const {
    const double c = std::cos(t);
    const double s = std::sin(t);
    return a * c + b * s + p * c * c + 2.0 * r * c * s + q * s * s;
  }
};

/// Restriction of c0 + g^T y + 0.5 y^T H y to y = rad (cos t u + sin t v).
inline TrigQuadratic restrict_to_circle(const Vector& g, const Matrix& H, const Vector& u, const Vector& v,
                                        double rad) {
  const Vector Hu = H * u;
  const Vector Hv = H * v;
  TrigQuadratic tq;
  tq.a = rad * g.dot(u);
  tq.b = rad * g.dot(v);
  tq.p = 0.5 * rad * rad * u.dot(Hu);
  tq.q = 0.5 * rad * rad * v.dot(Hv);
  tq.r = 0.5 * rad * rad * u.dot(Hv);
  return tq;
}

/// Angle in [lo, hi] maximizing score(t): uniform grid followed by a golden
/// section search in the two cells around the best grid point.
template <class Score>
double best_angle(Score&& score, double lo, double hi, int grid = 96) {
  if (!(hi > lo)) return lo;
  const double h = (hi - lo) / grid;
  int best = 0;
  double best_val = score(lo);
  for (int k = 1; k <= grid; ++k) {
    const double v = score(lo + k * h);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = lo + std::max(0, best - 1) * h;
  double b = lo + std::min(grid, best + 1) * h;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = score(x1);
  double f2 = score(x2);
  for (int it = 0; it < 80 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = score(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = score(x1);
    }
  }
  const double t = f1 > f2 ? x1 : x2;
  const double ft = std::max(f1, f2);
  return ft > best_val ? t : lo + best * h;
}

/// Orthonormal pair spanning {d, w}. Returns false when w is (numerically)
/// parallel to d.
inline bool orthonormal_pair(const Vector& d, const Vector& w, Vector& u, Vector& v) {
  const double dn = d.norm();
  if (!(dn > 0.0)) return false;
  u = d / dn;
  v = w - u.dot(w) * u;
  v -= u.dot(v) * u;
  const double vn = v.norm();
  if (!(vn > 1e-12 * w.norm()) || !(vn > 0.0)) return false;
  v /= vn;
  return true;
}

/// Largest root t >= 0 of |s + t p| = delta, assuming |s| <= delta.
inline double boundary_root(const Vector& s, const Vector& p, double delta) {
  const double pp = p.squaredNorm();
  if (!(pp > 0.0)) return 0.0;
  const double sp = s.dot(p);
  const double rest = std::max(0.0, delta * delta - s.squaredNorm());
  const double disc = std::sqrt(sp * sp + pp * rest);
  if (sp > 0.0) return rest / (sp + disc);
  return (disc - sp) / pp;
}

}  // namespace dfo::detail

#endif  // DFO_SRC_CIRCLE_HPP
