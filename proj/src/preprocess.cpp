#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dfo/problem.hpp"

namespace dfo {

namespace {

constexpr double kRankTol = 1e-12;
constexpr double kConsistencyTol = 1e-10;

void snap_unit_columns(Matrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    Index hit = -1;
    bool ok = true;
    for (Index i = 0; i < basis.rows(); ++i) {
      const double v = std::abs(basis(i, j));
      if (std::abs(v - 1.0) < kRankTol) {
        if (hit >= 0) ok = false;
        hit = i;
      } else if (v > kRankTol) {
        ok = false;
      }
    }
    if (!ok || hit < 0) continue;
    const double s = basis(hit, j) > 0 ? 1.0 : -1.0;
    basis.col(j).setZero();
    basis(hit, j) = s;
  }
}

}  // namespace

bool AffineReduction::axis_aligned() const {
  std::vector<bool> used(static_cast<std::size_t>(basis.rows()), false);
  for (Index j = 0; j < basis.cols(); ++j) {
    Index hit = -1;
    for (Index i = 0; i < basis.rows(); ++i) {
      const double v = basis(i, j);
      if (v == 1.0 || v == -1.0) {
        if (hit >= 0) return false;
        hit = i;
      } else if (v != 0.0) {
        return false;
      }
    }
    if (hit < 0 || used[static_cast<std::size_t>(hit)]) return false;
    used[static_cast<std::size_t>(hit)] = true;
  }
  return true;
}

AffineReduction reduce_equalities(const LinearConstraints& eq) {
  const Index n = eq.A.cols();
  AffineReduction map;
  if (eq.A.rows() == 0) {
    map.basis = Matrix::Identity(n, n);
    map.offset = Vector::Zero(n);
    return map;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(eq.A.transpose());
  const Matrix R = qr.matrixR().template triangularView<Eigen::Upper>();
  const double threshold = kRankTol * std::max(eq.A.norm(), 1e-300);
  Index r = 0;
  for (Index i = 0; i < std::min(R.rows(), R.cols()); ++i) {
    if (std::abs(R(i, i)) > threshold) ++r;
  }
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Vector pb = qr.colsPermutation().transpose() * eq.b;

  Vector y = Vector::Zero(r);
  if (r > 0) {
    y = R.topLeftCorner(r, r).transpose().triangularView<Eigen::Lower>().solve(pb.head(r));
  }
  map.rank = r;
  map.offset = Q.leftCols(r) * y;
  map.basis = Q.rightCols(n - r);
  snap_unit_columns(map.basis);

  Matrix aug(eq.A.rows(), n + 1);
  aug << eq.A, eq.b;
  const double resid = (eq.A * map.offset - eq.b).norm();
  if (resid > kConsistencyTol * std::max(aug.norm(), 1.0)) {
    throw InconsistentEqualities("linear equality constraints are inconsistent (residual " +
                                 std::to_string(resid) + ")");
  }
  return map;
}

EqualityElimination eliminate_equalities(const Problem& problem) {
  const Index n = problem.dim();
  if (!problem.has_lin_eq()) {
    AffineReduction id;
    id.basis = Matrix::Identity(n, n);
    id.offset = Vector::Zero(n);
    return {problem, id};
  }
  AffineReduction map = reduce_equalities(*problem.lin_eq());
  const Index k = map.reduced_dim();
  const Matrix& B = map.basis;
  const Vector& off = map.offset;
  const Vector& l = problem.lower();
  const Vector& u = problem.upper();

  ProblemDefinition d;
  ObjectiveFn f = problem.objective();
  d.objective = [f, map](const Vector& z) { return f(map.to_full(z)); };
  d.x0 = map.to_reduced(problem.x0());

  std::vector<Vector> rows;
  std::vector<double> rhs;
  auto add_row = [&](const Vector& a, double b, const char* what) {
    const double scale = 1.0 + std::abs(b);
    if (a.norm() <= kRankTol) {
      if (b < -kConsistencyTol * scale) {
        throw InfeasibleBounds(std::string(what) + " cannot hold on the equality-constrained set");
      }
      return;
    }
    rows.push_back(a);
    rhs.push_back(b);
  };

  if (k > 0 && map.axis_aligned()) {
    d.lower = Vector::Constant(k, -kInf);
    d.upper = Vector::Constant(k, kInf);
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (Index j = 0; j < k; ++j) {
      Index i = 0;
      while (B(i, j) == 0.0) ++i;
      covered[static_cast<std::size_t>(i)] = true;
      if (B(i, j) > 0) {
        d.lower[j] = l[i] - off[i];
        d.upper[j] = u[i] - off[i];
      } else {
        d.lower[j] = off[i] - u[i];
        d.upper[j] = off[i] - l[i];
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (covered[static_cast<std::size_t>(i)]) continue;
      const double tol = kConsistencyTol * (1.0 + std::abs(off[i]));
      if (off[i] < l[i] - tol || off[i] > u[i] + tol) {
        throw InfeasibleBounds("fixed coordinate violates its bounds");
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      if (std::isfinite(u[i])) add_row(B.row(i).transpose(), u[i] - off[i], "upper bound");
      if (std::isfinite(l[i])) add_row(-B.row(i).transpose(), off[i] - l[i], "lower bound");
    }
  }
  if (problem.has_lin_ineq()) {
    const auto& li = *problem.lin_ineq();
    const Matrix AB = li.A * B;
    const Vector rb = li.b - li.A * off;
    for (Index i = 0; i < AB.rows(); ++i) add_row(AB.row(i).transpose(), rb[i], "linear inequality");
  }
  if (!rows.empty()) {
    LinearConstraints lc;
    lc.A.resize(static_cast<Index>(rows.size()), k);
    lc.b.resize(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      lc.A.row(static_cast<Index>(r)) = rows[r].transpose();
      lc.b[static_cast<Index>(r)] = rhs[r];
    }
    d.lin_ineq = std::move(lc);
  }
  auto compose = [&](const std::optional<NonlinearConstraints>& nc) -> std::optional<NonlinearConstraints> {
    if (!nc || nc->size == 0) return std::nullopt;
    ConstraintFn fn = nc->fn;
    return NonlinearConstraints{[fn, map](const Vector& z) { return fn(map.to_full(z)); }, nc->size};
  };
  d.nl_ineq = compose(problem.nl_ineq());
  d.nl_eq = compose(problem.nl_eq());
  return {Problem(std::move(d)), std::move(map)};
}

namespace {

// n_i^T x >= c_i, equalities are n_i^T x == c_i.
struct HalfSpaces {
  std::vector<Vector> normal;
  std::vector<double> rhs;
  std::vector<bool> equality;

  void add(Vector a, double c, bool eq) {
    normal.push_back(std::move(a));
    rhs.push_back(c);
    equality.push_back(eq);
  }
  double slack(std::size_t i, const Vector& x) const { return normal[i].dot(x) - rhs[i]; }
  double tol(std::size_t i) const { return 1e-12 * (1.0 + std::abs(rhs[i])); }
  bool satisfied(std::size_t i, const Vector& x) const {
    const double s = slack(i, x);
    return equality[i] ? std::abs(s) <= tol(i) : s >= -tol(i);
  }
};

}  // namespace

ProjectionResult project_start(const Vector& x0, const Vector& lower, const Vector& upper,
                               const LinearConstraints* lin_ineq, const LinearConstraints* lin_eq) {
  const Index n = x0.size();
  HalfSpaces hs;
  for (Index i = 0; i < n; ++i) {
    if (lower.size() == n && std::isfinite(lower[i])) hs.add(Vector::Unit(n, i), lower[i], false);
    if (upper.size() == n && std::isfinite(upper[i])) hs.add(-Vector::Unit(n, i), -upper[i], false);
  }
  if (lin_ineq) {
    for (Index i = 0; i < lin_ineq->A.rows(); ++i) {
      hs.add(-lin_ineq->A.row(i).transpose(), -lin_ineq->b[i], false);
    }
  }
  if (lin_eq) {
    for (Index i = 0; i < lin_eq->A.rows(); ++i) {
      hs.add(lin_eq->A.row(i).transpose(), lin_eq->b[i], true);
    }
  }
  ProjectionResult out;
  out.x = x0;
  const std::size_t m = hs.normal.size();
  bool feasible = true;
  for (std::size_t i = 0; i < m && feasible; ++i) feasible = hs.satisfied(i, x0);
  if (feasible) return out;

  // Goldfarb-Idnani dual active-set method for min 0.5 |x - x0|^2.
  Vector x = x0;
  std::vector<std::size_t> active;
  std::vector<Vector> active_normal;
  std::vector<double> mult;
  std::vector<bool> is_active(m, false);
  const int max_iter = static_cast<int>(std::max<Index>(100 * n, 100));
  int iter = 0;

  auto pick_violated = [&]() -> std::ptrdiff_t {
    std::ptrdiff_t best = -1;
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (is_active[i] || hs.satisfied(i, x)) continue;
      const double s = std::abs(hs.slack(i, x)) / hs.normal[i].norm();
      const double key = hs.equality[i] ? s + 1e300 : s;
      if (best < 0 || key > worst) {
        best = static_cast<std::ptrdiff_t>(i);
        worst = key;
      }
    }
    return best;
  };

  while (iter < max_iter) {
    const std::ptrdiff_t pi = pick_violated();
    if (pi < 0) {
      out.x = x;
      out.moved = true;
      out.iterations = iter;
      return out;
    }
    const auto p = static_cast<std::size_t>(pi);
    // Orient equalities so that the current point violates n_p^T x >= c_p.
    Vector np = hs.normal[p];
    double cp = hs.rhs[p];
    if (hs.equality[p] && np.dot(x) - cp > 0) {
      np = -np;
      cp = -cp;
    }
    double up = 0.0;
    bool added = false;
    while (!added && iter < max_iter) {
      ++iter;
      const Index na = static_cast<Index>(active.size());
      Vector r = Vector::Zero(na);
      Vector z = np;
      if (na > 0) {
        Matrix N(n, na);
        for (Index j = 0; j < na; ++j) N.col(j) = active_normal[static_cast<std::size_t>(j)];
        r = N.colPivHouseholderQr().solve(np);
        z = np - N * r;
      }
      double t1 = kInf;
      Index block = -1;
      for (Index j = 0; j < na; ++j) {
        const auto aj = active[static_cast<std::size_t>(j)];
        if (hs.equality[aj] || r[j] <= 0) continue;
        const double t = mult[static_cast<std::size_t>(j)] / r[j];
        if (t < t1) {
          t1 = t;
          block = j;
        }
      }
      const double zn = z.dot(np);
      const bool dependent = z.norm() <= 1e-13 * np.norm();
      double t2 = kInf;
      if (!dependent) t2 = -(np.dot(x) - cp) / zn;
      if (dependent && block < 0) {
        out.x = x0;
        out.feasible = false;
        out.iterations = iter;
        return out;
      }
      const double t = std::min(t1, t2);
      if (!dependent) x += t * z;
      for (Index j = 0; j < na; ++j) mult[static_cast<std::size_t>(j)] -= t * r[j];
      up += t;
      if (t2 <= t1) {
        active.push_back(p);
        active_normal.push_back(np);
        mult.push_back(up);
        is_active[p] = true;
        added = true;
      } else {
        const auto drop = static_cast<std::size_t>(block);
        is_active[active[drop]] = false;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        active_normal.erase(active_normal.begin() + static_cast<std::ptrdiff_t>(drop));
        mult.erase(mult.begin() + static_cast<std::ptrdiff_t>(drop));
      }
    }
  }
  // Iteration cap hit: keep the best effort only if it is feasible.
  bool ok = true;
  for (std::size_t i = 0; i < m && ok; ++i) ok = hs.satisfied(i, x);
  out.x = ok ? x : x0;
  out.feasible = ok;
  out.moved = ok;
  out.iterations = iter;
  return out;
}

}  // namespace dfo
