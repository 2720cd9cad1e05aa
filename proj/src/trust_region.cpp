#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "circle.hpp"
#include "dfo/subproblems.hpp"

namespace dfo {

namespace {

using detail::boundary_root;

double quad_reduction(const Vector& g, const Matrix& H, const Vector& s) {
  return -(g.dot(s) + 0.5 * s.dot(H * s));
}

Vector probe_vector(Index n) {
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  return z.normalized();
}

// Exact solution through a symmetric eigendecomposition; used when the
// Cholesky iteration does not settle.
TrustRegionStep eigen_trust_region(const Vector& g, const Matrix& H, double delta) {
  const Index n = g.size();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Vector& ev = es.eigenvalues();
  const Matrix& Q = es.eigenvectors();
  const Vector gh = Q.transpose() * g;
  const double lmin = ev[0];
  const double gscale = std::max(1.0, g.norm());
  auto norm_at = [&](double lam) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double den = ev[i] + lam;
      if (den > 0.0) s += (gh[i] / den) * (gh[i] / den);
      else if (gh[i] != 0.0) return kInf;
    }
    return std::sqrt(s);
  };
  auto step_at = [&](double lam) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      const double den = ev[i] + lam;
      y[i] = den > 0.0 ? -gh[i] / den : 0.0;
    }
    return Vector(Q * y);
  };
  TrustRegionStep out;
  if (lmin > 0.0 && norm_at(0.0) <= delta) {
    out.step = step_at(0.0);
    out.lambda = 0.0;
  } else {
    const double lo0 = std::max(0.0, -lmin);
    // Components of g along the leftmost eigenspace.
    const double tol = 1e-12 * gscale;
    bool hard = true;
    for (Index i = 0; i < n; ++i) {
      if (ev[i] <= lmin + 1e-12 * std::max(1.0, std::abs(lmin)) && std::abs(gh[i]) > tol) hard = false;
    }
    double lam;
    if (hard) {
      Vector y(n);
      for (Index i = 0; i < n; ++i) {
        const double den = ev[i] + lo0;
        y[i] = (den > 1e-12 * std::max(1.0, std::abs(lmin))) ? -gh[i] / den : 0.0;
      }
      if (y.norm() < delta) {
        const double tau = std::sqrt(std::max(0.0, delta * delta - y.squaredNorm()));
        y[0] += tau;
        out.step = Q * y;
        out.lambda = lo0;
        out.on_boundary = true;
        out.predicted_reduction = quad_reduction(g, H, out.step);
        return out;
      }
    }
    double lo = lo0;
    double hi = std::max(lo0 + 1.0, g.norm() / delta + std::abs(ev[n - 1]) + std::abs(lmin));
    while (norm_at(hi) > delta) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (norm_at(mid) > delta) lo = mid;
      else hi = mid;
    }
    lam = hi;
    out.step = step_at(lam);
    const double sn = out.step.norm();
    if (sn > 0.0) out.step *= delta / sn;
    out.lambda = lam;
    out.on_boundary = true;
  }
  out.predicted_reduction = quad_reduction(g, H, out.step);
  return out;
}

}  // namespace

const char* to_string(GeometryRecipe r) {
  switch (r) {
    case GeometryRecipe::Line: return "line";
    case GeometryRecipe::Cauchy: return "cauchy";
    case GeometryRecipe::Gradient: return "gradient";
    case GeometryRecipe::ProjectedGradient: return "projected-gradient";
    case GeometryRecipe::TwoDimRefined: return "two-dim-refined";
  }
  return "?";
}

TrustRegionStep more_sorensen(const Vector& g, const Matrix& Hin, double delta, const MoreSorensenOptions& opts) {
  const Index n = g.size();
  const Matrix H = 0.5 * (Hin + Hin.transpose());
  const double gnorm = g.norm();
  TrustRegionStep out;
  out.step = Vector::Zero(n);
  if (n == 0 || !(delta > 0.0)) return out;
  if (!g.allFinite() || !H.allFinite()) return out;
  if (gnorm == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    if (es.eigenvalues()[0] >= 0.0) return out;
    out.step = delta * es.eigenvectors().col(0);
    out.lambda = -es.eigenvalues()[0];
    out.on_boundary = true;
    out.predicted_reduction = quad_reduction(g, H, out.step);
    return out;
  }

  const double hnorm = H.cwiseAbs().rowwise().sum().maxCoeff();
  const double dmin = H.diagonal().minCoeff();
  double lam_lo = std::max({0.0, -dmin, gnorm / delta - hnorm});
  double lam_hi = std::max(0.0, gnorm / delta + hnorm);
  double lam = lam_lo;
  const double hard_tol = 1e-10 * (1.0 + gnorm);
  auto next_lambda = [&]() {
    return std::max(std::sqrt(lam_lo * lam_hi), lam_lo + 0.01 * (lam_hi - lam_lo));
  };

  Vector zprobe = probe_vector(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it + 1;
    Matrix M = H;
    M.diagonal().array() += lam;
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
      lam_lo = std::max(lam_lo, lam);
      if (!(lam_hi > lam_lo)) lam_hi = std::max(2.0 * lam_lo, lam_lo + 1e-12);
      lam = next_lambda();
      continue;
    }
    const Vector p = llt.solve(-g);
    const double pn = p.norm();
    if (!std::isfinite(pn)) {
      lam_lo = std::max(lam_lo, lam);
      lam = next_lambda();
      continue;
    }
    if (lam == 0.0 && pn <= delta) {
      out.step = p;
      out.lambda = 0.0;
      out.on_boundary = std::abs(pn - delta) <= opts.rel_tol * delta;
      out.predicted_reduction = quad_reduction(g, H, out.step);
      return out;
    }
    if (std::abs(pn - delta) <= opts.rel_tol * delta) {
      out.step = p * (delta / pn);
      out.lambda = lam;
      out.on_boundary = true;
      out.predicted_reduction = quad_reduction(g, H, out.step);
      return out;
    }
    const Vector q = llt.matrixL().solve(p);
    const double lam_newton = lam + (pn * pn / q.squaredNorm()) * (pn - delta) / delta;

    if (pn < delta) {
      lam_hi = std::min(lam_hi, lam);
      // Inverse iteration towards the leftmost eigenvector of M.
      Vector z = zprobe;
      for (int k = 0; k < 4; ++k) {
        Vector zn = llt.solve(z);
        const double nz = zn.norm();
        if (!(nz > 0.0) || !std::isfinite(nz)) break;
        z = zn / nz;
      }
      zprobe = z;
      const Vector Mz = M * z;
      const double mu = z.dot(Mz);
      lam_lo = std::max(lam_lo, lam - mu);
      const double pz = p.dot(z);
      const double disc = std::sqrt(pz * pz + (delta * delta - pn * pn));
      const double t1 = -pz + disc;
      const double t2 = -pz - disc;
      const Vector d1 = p + t1 * z;
      const Vector d2 = p + t2 * z;
      const bool first = quad_reduction(g, H, d1) >= quad_reduction(g, H, d2);
      const double tau = first ? t1 : t2;
      if (std::abs(tau) * Mz.norm() <= hard_tol) {
        out.step = first ? d1 : d2;
        out.lambda = lam;
        out.on_boundary = true;
        out.predicted_reduction = quad_reduction(g, H, out.step);
        return out;
      }
    } else {
      lam_lo = std::max(lam_lo, lam);
    }

    if (lam_hi - lam_lo <= 1e-15 * std::max(1.0, lam_hi)) break;
    lam = (lam_newton > lam_lo && lam_newton < lam_hi) ? lam_newton : next_lambda();
  }
  TrustRegionStep fb = eigen_trust_region(g, H, delta);
  fb.iterations = out.iterations;
  return fb;
}

TrustRegionStep truncated_cg(const Vector& g, const Matrix& H, double delta, const CgOptions& opts) {
  const Index n = g.size();
  TrustRegionStep out;
  out.step = Vector::Zero(n);
  const double gnorm = g.norm();
  if (n == 0 || !(gnorm > 0.0) || !(delta > 0.0) || !g.allFinite() || !H.allFinite()) return out;
  const Index maxit = opts.max_iter < 0 ? n : opts.max_iter;
  Vector& s = out.step;
  Vector r = g;
  Vector p = -r;
  double rr = r.squaredNorm();
  for (Index it = 0; it < maxit; ++it) {
    if (std::sqrt(rr) <= opts.rel_tol * gnorm) break;
    out.iterations = static_cast<int>(it + 1);
    const Vector Hp = H * p;
    const double curv = p.dot(Hp);
    const double t_tr = boundary_root(s, p, delta);
    if (curv <= 0.0 || rr / curv >= t_tr) {
      s += t_tr * p;
      out.on_boundary = true;
      break;
    }
    const double alpha = rr / curv;
    s += alpha * p;
    r += alpha * Hp;
    const double rr_new = r.squaredNorm();
    p = -r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.predicted_reduction = quad_reduction(g, H, s);
  return out;
}

Vector circle_search(const Vector& g, const Matrix& H, const Vector& d, const Vector& w, double delta) {
  Vector u, v;
  if (!detail::orthonormal_pair(d, w, u, v)) return d;
  const detail::TrigQuadratic tq = detail::restrict_to_circle(g, H, u, v, delta);
  const double pi = std::numbers::pi;
  const double t = detail::best_angle([&](double a) { return -tq(a); }, -pi, pi, 128);
  const Vector cand = delta * (std::cos(t) * u + std::sin(t) * v);
  const double mc = g.dot(cand) + 0.5 * cand.dot(H * cand);
  const double md = g.dot(d) + 0.5 * d.dot(H * d);
  return mc < md ? cand : d;
}

Vector two_dim_refine(const SurrogateModel& model, const Vector& d, const Vector& x_k, double delta,
                      int max_rounds) {
  const ModelEvaluation at_center = evaluate(model, x_k);
  const Vector& g = at_center.gradient;
  const Matrix& H = model.H;
  auto value = [&](const Vector& s) { return g.dot(s) + 0.5 * s.dot(H * s); };
  Vector s = d;
  double current = value(s);
  for (int round = 0; round < max_rounds; ++round) {
    const Vector grad = g + H * s;
    const Vector cand = circle_search(g, H, s, grad, delta);
    const double vc = value(cand);
    if (!(vc < current)) break;
    const double gain = current - vc;
    s = cand;
    current = vc;
    if (gain < 1e-2 * std::abs(current)) break;
  }
  return s;
}

TrustRegionStep tcg_bounds(const Vector& g, const Matrix& H, double delta, const Vector& lower,
                           const Vector& upper, const Vector& x_k, const CgOptions& opts) {
  const Index n = g.size();
  TrustRegionStep out;
  out.step = Vector::Zero(n);
  if (n == 0 || !(delta > 0.0) || !g.allFinite() || !H.allFinite()) return out;
  const Vector sl = lower - x_k;
  const Vector su = upper - x_k;
  std::vector<int> bound(static_cast<std::size_t>(n), 0);  // -1 lower, +1 upper
  for (Index i = 0; i < n; ++i) {
    if (sl[i] >= 0.0 && (g[i] >= 0.0 || su[i] <= 0.0)) bound[i] = -1;
    else if (su[i] <= 0.0 && g[i] <= 0.0) bound[i] = 1;
  }
  auto masked = [&](Vector v) {
    for (Index i = 0; i < n; ++i) {
      if (bound[i] != 0) v[i] = 0.0;
    }
    return v;
  };
  const Index maxit = opts.max_iter < 0 ? n : opts.max_iter;
  Vector& s = out.step;
  const double g0 = masked(g).norm();
  Vector p;
  double rr = 0.0;
  bool restart = true;
  Index cg_steps = 0;
  for (Index total = 0; total < maxit + n + 1; ++total) {
    const Vector r = masked(g + H * s);
    const double rr_new = r.squaredNorm();
    if (!(g0 > 0.0) || std::sqrt(rr_new) <= opts.rel_tol * g0) break;
    if (restart) {
      p = -r;
      restart = false;
      cg_steps = 0;
    } else {
      p = -r + (rr_new / rr) * p;
      p = masked(p);
    }
    rr = rr_new;
    if (!(p.squaredNorm() > 0.0)) break;
    const Vector Hp = H * p;
    const double curv = p.dot(Hp);
    const double t_tr = boundary_root(s, p, delta);
    double t_b = kInf;
    Index ib = -1;
    for (Index i = 0; i < n; ++i) {
      if (bound[i] != 0 || p[i] == 0.0) continue;
      const double lim = p[i] > 0.0 ? (su[i] - s[i]) / p[i] : (sl[i] - s[i]) / p[i];
      if (lim < t_b) {
        t_b = std::max(0.0, lim);
        ib = i;
      }
    }
    const double t_cg = curv > 0.0 ? rr / curv : kInf;
    out.iterations += 1;
    if (t_tr <= t_b && t_tr <= t_cg) {
      s += t_tr * p;
      out.on_boundary = true;
      break;
    }
    if (t_b < t_cg) {
      s += t_b * p;
      s[ib] = p[ib] > 0.0 ? su[ib] : sl[ib];
      bound[ib] = p[ib] > 0.0 ? 1 : -1;
      restart = true;
      continue;
    }
    s += t_cg * p;
    if (++cg_steps >= maxit) break;
  }

  if (opts.refine && out.on_boundary) {
    const double pi = std::numbers::pi;
    auto value = [&](const Vector& v) { return g.dot(v) + 0.5 * v.dot(H * v); };
    for (int round = 0; round < 10; ++round) {
      Vector sf = masked(s);
      const Vector sfix = s - sf;
      const double rad = sf.norm();
      if (!(rad > 0.0)) break;
      const Vector gf = masked(g + H * sfix);
      const Vector w = masked(g + H * s);
      Vector u, v;
      if (!detail::orthonormal_pair(sf, w, u, v)) break;
      u = masked(u);
      v = masked(v);
      auto point = [&](double t) { return Vector(sfix + rad * (std::cos(t) * u + std::sin(t) * v)); };
      auto feasible = [&](double t) {
        const Vector y = point(t);
        for (Index i = 0; i < n; ++i) {
          if (y[i] < sl[i] || y[i] > su[i]) return false;
        }
        return true;
      };
      // Feasible arc around t = 0.
      const int steps = 180;
      const double h = pi / steps;
      auto edge = [&](double dir) {
        double good = 0.0;
        for (int k = 1; k <= steps; ++k) {
          const double t = dir * k * h;
          if (!feasible(t)) {
            double bad = t;
            for (int b = 0; b < 40; ++b) {
              const double mid = 0.5 * (good + bad);
              if (feasible(mid)) good = mid;
              else bad = mid;
            }
            return good;
          }
          good = t;
        }
        return good;
      };
      const double hi = edge(1.0);
      const double lo = edge(-1.0);
      if (!(hi > lo)) break;
      const detail::TrigQuadratic tq = detail::restrict_to_circle(gf, H, u, v, rad);
      const double t = detail::best_angle([&](double a) { return -tq(a); }, lo, hi, 96);
      const Vector cand = point(t);
      const double vc = value(cand);
      const double vs = value(s);
      if (!(vc < vs)) break;
      s = cand;
      if (vs - vc < 1e-2 * std::abs(vc)) break;
    }
  }

  for (Index i = 0; i < n; ++i) s[i] = std::clamp(s[i], std::min(sl[i], 0.0), std::max(su[i], 0.0));
  const double sn = s.norm();
  if (sn > delta) s *= delta / sn;
  for (Index i = 0; i < n; ++i) {
    if (bound[i] == -1) out.active_set.push_back(i);
    else if (bound[i] == 1) out.active_set.push_back(n + i);
  }
  out.predicted_reduction = quad_reduction(g, H, s);
  return out;
}

Vector nnls_cone(const Matrix& A, const Vector& x) {
  const Index k = A.rows();
  Vector lam = Vector::Zero(k);
  if (k == 0) return lam;
  const Matrix M = A.transpose();
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-13 * std::max(1.0, x.norm()) * std::max(1.0, M.colwise().norm().maxCoeff());
  auto solve_passive = [&]() {
    std::vector<Index> idx;
    for (Index j = 0; j < k; ++j) {
      if (passive[j]) idx.push_back(j);
    }
    Vector z = Vector::Zero(k);
    if (idx.empty()) return z;
    Matrix Mp(M.rows(), static_cast<Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Mp.col(static_cast<Index>(c)) = M.col(idx[c]);
    const Vector zp = Mp.colPivHouseholderQr().solve(x);
    for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Index>(c)];
    return z;
  };
  for (Index outer = 0; outer < 3 * k + 10; ++outer) {
    const Vector w = M.transpose() * (x - M * lam);
    Index jmax = -1;
    double wmax = tol;
    for (Index j = 0; j < k; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        jmax = j;
      }
    }
    if (jmax < 0) break;
    passive[jmax] = true;
    for (Index inner = 0; inner < 3 * k + 10; ++inner) {
      const Vector z = solve_passive();
      bool ok = true;
      for (Index j = 0; j < k; ++j) {
        if (passive[j] && z[j] <= 0.0) ok = false;
      }
      if (ok) {
        lam = z;
        break;
      }
      double alpha = 1.0;
      for (Index j = 0; j < k; ++j) {
        if (passive[j] && z[j] <= 0.0) {
          const double denom = lam[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, lam[j] / denom);
        }
      }
      lam += alpha * (z - lam);
      for (Index j = 0; j < k; ++j) {
        if (passive[j] && lam[j] <= 1e-15 * std::max(1.0, lam.cwiseAbs().maxCoeff())) {
          passive[j] = false;
          lam[j] = 0.0;
        }
      }
    }
  }
  return lam.cwiseMax(0.0);
}

namespace {

// Orthonormal basis of the span of the rows of A restricted to `rows`.
Matrix row_space_basis(const Matrix& A, const std::vector<Index>& rows) {
  const Index n = A.cols();
  if (rows.empty()) return Matrix(n, 0);
  Matrix At(n, static_cast<Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) At.col(static_cast<Index>(c)) = A.row(rows[c]).transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(At);
  qr.setThreshold(1e-12);
  const Index r = qr.rank();
  Matrix Q = qr.householderQ();
  return Q.leftCols(r);
}

}  // namespace

TrustRegionStep tcg_linear(const Vector& g, const Matrix& H, double delta, const Matrix& A, const Vector& b,
                           const Vector& x_k, const CgOptions& opts) {
  const Index n = g.size();
  const Index m = A.rows();
  TrustRegionStep out;
  out.step = Vector::Zero(n);
  if (n == 0 || !(delta > 0.0) || !g.allFinite() || !H.allFinite()) return out;
  const Vector r0 = m > 0 ? Vector(b - A * x_k) : Vector(0);
  const Vector anorm = m > 0 ? Vector(A.rowwise().norm()) : Vector(0);
  Vector& s = out.step;
  std::vector<Index> active;
  Matrix Q(n, 0);

  auto project = [&](const Vector& v) { return Q.cols() > 0 ? Vector(v - Q * (Q.transpose() * v)) : v; };
  auto choose_active = [&](const Vector& grad, Index forced) {
    std::vector<Index> cand;
    for (Index i = 0; i < m; ++i) {
      if (anorm[i] > 0.0 && r0[i] - A.row(i).dot(s) <= 0.2 * delta * anorm[i]) cand.push_back(i);
    }
    active.clear();
    if (!cand.empty()) {
      Matrix An(static_cast<Index>(cand.size()), n);
      for (std::size_t c = 0; c < cand.size(); ++c) An.row(static_cast<Index>(c)) = -A.row(cand[c]);
      const Vector lam = nnls_cone(An, grad);
      for (std::size_t c = 0; c < cand.size(); ++c) {
        if (lam[static_cast<Index>(c)] > 0.0) active.push_back(cand[c]);
      }
    }
    if (forced >= 0 && std::find(active.begin(), active.end(), forced) == active.end()) active.push_back(forced);
    Q = row_space_basis(A, active);
  };

  choose_active(g, -1);
  const Index maxit = opts.max_iter < 0 ? n : opts.max_iter;
  const double g0 = g.norm();
  Vector p;
  double rr = 0.0;
  bool restart = true;
  Index cg_steps = 0;
  Index hits = 0;
  Index last_hit = -1;
  for (Index total = 0; total < maxit + 2 * (m + n) + 2; ++total) {
    const Vector r = project(g + H * s);
    const double rr_new = r.squaredNorm();
    if (!(g0 > 0.0) || std::sqrt(rr_new) <= opts.rel_tol * g0) break;
    if (restart) {
      p = -r;
      restart = false;
      cg_steps = 0;
    } else {
      p = project(Vector(-r + (rr_new / rr) * p));
    }
    rr = rr_new;
    if (!(p.squaredNorm() > 0.0)) break;
    const Vector Hp = H * p;
    const double curv = p.dot(Hp);
    const double t_tr = boundary_root(s, p, delta);
    double t_c = kInf;
    Index ic = -1;
    const double pn = p.norm();
    for (Index i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double ap = A.row(i).dot(p);
      if (ap <= 1e-14 * anorm[i] * pn) continue;
      const double lim = std::max(0.0, (r0[i] - A.row(i).dot(s)) / ap);
      if (lim < t_c) {
        t_c = lim;
        ic = i;
      }
    }
    const double t_cg = curv > 0.0 ? rr / curv : kInf;
    out.iterations += 1;
    if (t_tr <= t_c && t_tr <= t_cg) {
      s += t_tr * p;
      out.on_boundary = true;
      break;
    }
    if (t_c < t_cg) {
      s += t_c * p;
      if (++hits > m + n) break;
      const Index forced = (t_c == 0.0 || ic == last_hit) ? ic : -1;
      last_hit = ic;
      choose_active(g + H * s, forced);
      if (Q.cols() >= n) break;
      restart = true;
      continue;
    }
    s += t_cg * p;
    if (++cg_steps >= maxit) break;
  }

  // Guard against rounding: scale back into the feasible region.
  double t = 1.0;
  for (Index i = 0; i < m; ++i) {
    const double as = A.row(i).dot(s);
    const double room = std::max(r0[i], 0.0);
    if (as > room && as > 0.0) t = std::min(t, room / as);
  }
  if (t < 1.0) s *= t;
  const double sn = s.norm();
  if (sn > delta) s *= delta / sn;
  out.active_set = active;
  out.predicted_reduction = quad_reduction(g, H, s);
  return out;
}

}  // namespace dfo
