#ifndef DFO_TESTS_ORACLES_HPP
#define DFO_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dfo/models.hpp"
#include "dfo/subproblems.hpp"

namespace oracle {

using dfo::Index;
using dfo::Matrix;
using dfo::Vector;

inline Vector randn(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

inline Matrix randn(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = N(rng);
  }
  return m;
}

inline Matrix rand_sym(std::mt19937_64& rng, Index n) {
  const Matrix m = randn(rng, n, n);
  return 0.5 * (m + m.transpose());
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random quadratic f(x) = c + g^T x + 0.5 x^T H x.
struct Quadratic {
  double c = 0.0;
  Vector g;
  Matrix H;
  double operator()(const Vector& x) const { return c + g.dot(x) + 0.5 * x.dot(H * x); }
};

inline Quadratic rand_quadratic(std::mt19937_64& rng, Index n) {
  return Quadratic{uniform(rng, -1, 1), randn(rng, n), rand_sym(rng, n)};
}

/// Relative interpolation residual max |m(y) - f(y)| / (1 + |f(y)|).
inline double interpolation_residual(const dfo::InterpolationSet& set, const dfo::SurrogateModel& m,
                                     const Vector& values) {
  double r = 0.0;
  for (Index i = 0; i < set.npt(); ++i) {
    r = std::max(r, std::abs(m.value(set.point(i)) - values[i]) / (1.0 + std::abs(values[i])));
  }
  return r;
}

/// Coefficients of a model in the quadratic_basis coordinates about base.
inline Vector model_coefficients(const dfo::SurrogateModel& m) {
  const Index n = m.dim();
  Vector th(dfo::quadratic_dof(n));
  th[0] = m.c;
  th.segment(1, n) = m.g;
  Index k = n + 1;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) th[k++] = m.H(i, j);
  }
  return th;
}

/// Dense least-change solve: minimize |H - H_prev|_F subject to the
/// interpolation conditions, over all quadratic coefficients.
inline Vector least_frobenius(const Matrix& offsets, const Vector& f, const Vector& prev_theta) {
  const Index npt = offsets.rows();
  const Index n = offsets.cols();
  const Index q = dfo::quadratic_dof(n);
  Matrix Phi(npt, q);
  for (Index i = 0; i < npt; ++i) Phi.row(i) = dfo::quadratic_basis(offsets.row(i).transpose()).transpose();
  Vector w = Vector::Zero(q);
  Index k = n + 1;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) w[k++] = i == j ? 1.0 : 2.0;
  }
  Matrix K = Matrix::Zero(q + npt, q + npt);
  K.topLeftCorner(q, q) = 2.0 * w.asDiagonal();
  K.topRightCorner(q, npt) = Phi.transpose();
  K.bottomLeftCorner(npt, q) = Phi;
  Vector rhs = Vector::Zero(q + npt);
  rhs.tail(npt) = f - Phi * prev_theta;
  const Vector sol = K.fullPivLu().solve(rhs);
  return prev_theta + sol.head(q);
}

/// Global minimizer of g^T d + 0.5 d^T H d over |d| <= delta by
/// eigendecomposition and bisection on the secular equation.
inline Vector trust_region_oracle(const Vector& g, const Matrix& H, double delta) {
  const Index n = g.size();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Vector lam = es.eigenvalues();
  const Matrix Q = es.eigenvectors();
  const Vector gh = Q.transpose() * g;
  auto step = [&](double l) {
    Vector d(n);
    for (Index i = 0; i < n; ++i) {
      const double den = lam[i] + l;
      d[i] = den > 0.0 ? -gh[i] / den : 0.0;
    }
    return d;
  };
  const double lmin = lam[0];
  if (lmin > 0.0) {
    const Vector d = step(0.0);
    if (d.norm() <= delta) return Q * d;
  }
  const double lo0 = std::max(0.0, -lmin);
  const double tol = 1e-14 * (1.0 + gh.norm());
  // Hard case: the gradient has no component along the bottom eigenspace.
  double along = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (lam[i] <= lmin + 1e-12 * (1.0 + std::abs(lmin))) along += gh[i] * gh[i];
  }
  if (std::sqrt(along) <= tol) {
    Vector d(n);
    for (Index i = 0; i < n; ++i) {
      const double den = lam[i] + lo0;
      d[i] = den > 1e-12 * (1.0 + std::abs(lmin)) ? -gh[i] / den : 0.0;
    }
    if (d.norm() <= delta) {
      d[0] += std::sqrt(std::max(0.0, delta * delta - d.squaredNorm()));
      return Q * d;
    }
  }
  double lo = lo0;
  double hi = lo0 + gh.norm() / delta + 1.0;
  while (step(hi).norm() > delta) hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (step(mid).norm() > delta) lo = mid;
    else hi = mid;
  }
  return Q * step(hi);
}

inline double qvalue(const Vector& g, const Matrix& H, const Vector& d) { return g.dot(d) + 0.5 * d.dot(H * d); }

/// Random index j with |den_j| >= 0.5 max |den|, i.e. a well-poised
/// replacement of the kind the drivers make.
inline Index pick_valid_drop(const dfo::InterpolationSet& set, const Vector& xnew, std::mt19937_64& rng) {
  const Vector den = set.denominators(xnew).cwiseAbs();
  const double top = den.maxCoeff();
  std::vector<Index> ok;
  for (Index j = 0; j < den.size(); ++j) {
    if (den[j] >= 0.5 * top) ok.push_back(j);
  }
  return ok[static_cast<std::size_t>(rng() % ok.size())];
}

/// Coefficient matrix with the row/column of `drop` rebuilt for xnew.
inline Matrix assemble_replaced(const dfo::InterpolationSet& set, Index drop, const Vector& xnew) {
  Matrix pts = set.points();
  pts.row(drop) = xnew.transpose();
  dfo::InterpolationSet tmp;
  try {
    tmp = dfo::InterpolationSet(set.variant(), pts, set.base());
  } catch (const dfo::DfoError&) {
  }
  if (tmp.npt() == set.npt()) return tmp.assemble();
  return Matrix();
}

}  // namespace oracle

#endif  // DFO_TESTS_ORACLES_HPP
