#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dfo/subproblems.hpp"
#include "oracles.hpp"

using namespace dfo;

namespace {

struct MsResiduals {
  double stationarity;
  double complementarity;
  double min_eig;
  double norm_excess;
};

MsResiduals ms_residuals(const Vector& g, const Matrix& H, double delta, const TrustRegionStep& s) {
  const Index n = g.size();
  const Matrix M = H + s.lambda * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return {(M * s.step + g).norm(), std::abs(s.lambda * (delta - s.step.norm())), es.eigenvalues()[0],
          s.step.norm() - delta};
}

LagrangeFunction random_lagrange(std::mt19937_64& rng, Index n, bool linear = false) {
  LagrangeFunction l;
  static_cast<SurrogateModel&>(l) = SurrogateModel::zero(n, Vector::Zero(n));
  l.c = oracle::uniform(rng, -1, 1);
  l.g = oracle::randn(rng, n);
  l.H = linear ? Matrix::Zero(n, n) : oracle::rand_sym(rng, n);
  return l;
}

double max_abs_on_sphere(const LagrangeFunction& l, const Vector& x_k, double r, std::mt19937_64& rng, int samples) {
  double best = std::abs(l.value(x_k));
  for (int k = 0; k < samples; ++k) {
    Vector u = oracle::randn(rng, x_k.size());
    u *= r / u.norm();
    best = std::max(best, std::abs(l.value(x_k + u)));
    best = std::max(best, std::abs(l.value(x_k + 0.5 * u)));
  }
  return best;
}

}  // namespace

TEST_CASE("more_sorensen examples") {
  TrustRegionStep s = more_sorensen(Vector::Zero(3), Matrix::Identity(3, 3), 2.0);
  CHECK(s.step.norm() == 0.0);
  CHECK(s.predicted_reduction == 0.0);

  s = more_sorensen(Vector(Eigen::Vector2d(2.0, 0.0)), Matrix::Identity(2, 2), 1.0);
  CHECK((s.step - Vector(Eigen::Vector2d(-1.0, 0.0))).norm() < 1e-10);
  CHECK(std::abs(s.lambda - 1.0) < 1e-10);
  CHECK(s.on_boundary);
}

TEST_CASE("more_sorensen against the eigen oracle") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + t % 8;
    const Matrix H = oracle::rand_sym(rng, n) * std::pow(10.0, oracle::uniform(rng, -2, 2));
    const Vector g = oracle::randn(rng, n) * std::pow(10.0, oracle::uniform(rng, -2, 2));
    const double delta = std::pow(10.0, oracle::uniform(rng, -2, 1));
    const TrustRegionStep s = more_sorensen(g, H, delta);
    const MsResiduals r = ms_residuals(g, H, delta, s);
    const double tol = 1e-8 * (1.0 + g.norm());
    CHECK(s.lambda >= 0.0);
    CHECK(r.stationarity <= tol);
    CHECK(r.complementarity <= tol);
    CHECK(r.min_eig >= -tol);
    CHECK(r.norm_excess <= 1e-10 * delta);
    const Vector d = oracle::trust_region_oracle(g, H, delta);
    const double vo = oracle::qvalue(g, H, d);
    CHECK(oracle::qvalue(g, H, s.step) <= vo + 1e-8 * (1.0 + std::abs(vo)));
    CHECK(std::abs(s.predicted_reduction + oracle::qvalue(g, H, s.step)) <= 1e-10 * (1.0 + std::abs(vo)));
  }
}

TEST_CASE("more_sorensen hard case") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 7;
    Eigen::HouseholderQR<Matrix> qr(oracle::randn(rng, n, n));
    const Matrix Q = qr.householderQ();
    Vector lam = oracle::randn(rng, n).cwiseAbs();
    lam[0] = -1.0 - std::abs(lam[0]);
    if (t % 2 == 0 && n > 2) lam[1] = lam[0];
    const Matrix H = Q * lam.asDiagonal() * Q.transpose();
    Vector gh = oracle::randn(rng, n) * 0.1;
    gh[0] = 0.0;
    if (t % 2 == 0 && n > 2) gh[1] = 0.0;
    const Vector g = Q * gh;
    const double delta = 1.0 + t % 3;
    const TrustRegionStep s = more_sorensen(g, H, delta);
    const MsResiduals r = ms_residuals(g, H, delta, s);
    const double tol = 1e-8 * (1.0 + g.norm());
    CHECK(r.stationarity <= tol);
    CHECK(r.complementarity <= tol);
    CHECK(r.min_eig >= -tol);
    CHECK(std::abs(s.step.norm() - delta) <= 1e-8 * delta);
    const Vector d = oracle::trust_region_oracle(g, H, delta);
    const double vo = oracle::qvalue(g, H, d);
    CHECK(oracle::qvalue(g, H, s.step) <= vo + 1e-8 * (1.0 + std::abs(vo)));
  }
}

TEST_CASE("truncated_cg examples") {
  std::mt19937_64 rng(43);
  const Vector g = oracle::randn(rng, 4);
  TrustRegionStep s = truncated_cg(g, Matrix::Identity(4, 4), 100.0);
  CHECK((s.step + g).norm() < 1e-12);
  CHECK(!s.on_boundary);

  Matrix H = Matrix::Identity(3, 3);
  H(0, 0) = -2.0;
  s = truncated_cg(Vector(Eigen::Vector3d(1.0, 0.0, 0.0)), H, 0.7);
  CHECK(std::abs(s.step.norm() - 0.7) < 1e-12);
  CHECK(s.on_boundary);
}

TEST_CASE("truncated_cg matches more_sorensen on interior convex instances") {
  std::mt19937_64 rng(44);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const Matrix B = oracle::randn(rng, 10, 10);
    const Matrix H = B * B.transpose() + Matrix::Identity(10, 10);
    const Vector g = oracle::randn(rng, 10);
    const double delta = 100.0;
    CgOptions o;
    o.rel_tol = 1e-12;
    o.max_iter = 50;
    const TrustRegionStep a = truncated_cg(g, H, delta, o);
    const TrustRegionStep b = more_sorensen(g, H, delta);
    if (b.on_boundary) continue;
    ++checked;
    CHECK(std::abs(a.predicted_reduction - b.predicted_reduction) <= 1e-8 * (1.0 + b.predicted_reduction));
  }
  CHECK(checked > 0);
}

TEST_CASE("subproblem steps respect the radius and report nonnegative reductions") {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 8;
    const Matrix H = oracle::rand_sym(rng, n);
    const Vector g = oracle::randn(rng, n);
    const double delta = oracle::uniform(rng, 0.1, 3.0);
    for (const TrustRegionStep& s : {more_sorensen(g, H, delta), truncated_cg(g, H, delta)}) {
      CHECK(s.step.norm() <= delta * (1.0 + 1e-10));
      CHECK(s.predicted_reduction >= 0.0);
    }
  }
}

TEST_CASE("circle search and two_dim_refine") {
  std::mt19937_64 rng(46);
  const Matrix H = oracle::rand_sym(rng, 3);
  const Vector g = oracle::randn(rng, 3);
  const Vector d = Vector(Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK(circle_search(g, H, d, 2.0 * d, 1.0) == d);

  // Gradient at x_k + d parallel to d.
  SurrogateModel m = SurrogateModel::zero(2, Vector::Zero(2));
  m.H = Matrix::Identity(2, 2);
  m.g = Vector(Eigen::Vector2d(-3.0, 0.0));
  const Vector d2 = Vector(Eigen::Vector2d(1.0, 0.0));
  CHECK((two_dim_refine(m, d2, Vector::Zero(2), 1.0) - d2).norm() < 1e-14);

  for (int t = 0; t < 30; ++t) {
    SurrogateModel q = SurrogateModel::zero(2, Vector::Zero(2));
    q.g = oracle::randn(rng, 2);
    q.H = oracle::rand_sym(rng, 2);
    const double delta = 1.0;
    const TrustRegionStep s = truncated_cg(q.g, q.H, delta);
    if (!s.on_boundary) continue;
    const Vector r = two_dim_refine(q, s.step, Vector::Zero(2), delta);
    CHECK(q.value(r) <= q.value(s.step) + 1e-14);
    CHECK(r.norm() <= delta * (1.0 + 1e-10));
  }
}

TEST_CASE("circle_search against an angular grid") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    const Index n = 5;
    const Matrix H = oracle::rand_sym(rng, n);
    const Vector g = oracle::randn(rng, n);
    const double delta = 1.3;
    Vector d = oracle::randn(rng, n);
    d *= delta / d.norm();
    const Vector w = oracle::randn(rng, n);
    const Vector s = circle_search(g, H, d, w, delta);
    const Vector u = d / d.norm();
    Vector v = w - w.dot(u) * u;
    v /= v.norm();
    double best = oracle::qvalue(g, H, d);
    for (int k = 0; k < 10000; ++k) {
      const double th = 2.0 * std::numbers::pi * k / 10000.0;
      best = std::min(best, oracle::qvalue(g, H, delta * (std::cos(th) * u + std::sin(th) * v)));
    }
    CHECK(oracle::qvalue(g, H, s) <= best + 1e-6);
    CHECK(std::abs(s.norm() - delta) <= 1e-10 * delta);
  }
}

TEST_CASE("tcg_bounds") {
  std::mt19937_64 rng(48);
  const Matrix H = Matrix::Identity(3, 3) * 2.0;
  const Vector g = oracle::randn(rng, 3);
  const Vector x_k = Vector::Zero(3);
  const Vector wide = Vector::Constant(3, 1e6);
  const TrustRegionStep a = tcg_bounds(g, H, 0.5, -wide, wide, x_k);
  const TrustRegionStep b = truncated_cg(g, H, 0.5);
  CHECK((a.step - b.step).norm() < 1e-12);

  const Vector lo = Vector::Zero(2);
  const Vector hi = Vector::Ones(2);
  const TrustRegionStep c =
      tcg_bounds(Vector(Eigen::Vector2d(1.0, -1.0)), Matrix::Identity(2, 2), 1.0, lo, hi, Vector(Eigen::Vector2d(0.0, 0.5)));
  CHECK(c.step[0] == 0.0);
  CHECK(c.step[1] > 0.0);

  // Separable instance: the box optimum (0.5, 0.5) is reached exactly.
  const TrustRegionStep e = tcg_bounds(Vector(Eigen::Vector2d(-3.0, -1.0)), Matrix::Identity(2, 2), 2.0,
                                       Vector::Constant(2, -1.0), Vector::Constant(2, 0.5), Vector::Zero(2));
  CHECK((e.step - Vector::Constant(2, 0.5)).norm() < 1e-12);

  int close = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const bool convex = t % 2 == 0;
    Matrix Hr = oracle::rand_sym(rng, 2);
    if (convex) Hr = Hr * Hr.transpose() + 0.1 * Matrix::Identity(2, 2);
    const Vector gr = oracle::randn(rng, 2);
    const Vector xk(Eigen::Vector2d(oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)));
    const Vector l = Vector::Constant(2, -1.0);
    const Vector u = Vector::Constant(2, 1.0);
    const double delta = oracle::uniform(rng, 0.2, 1.5);
    CgOptions o;
    o.refine = true;
    const TrustRegionStep s = tcg_bounds(gr, Hr, delta, l, u, xk, o);
    const Vector x = xk + s.step;
    CHECK((x - u).maxCoeff() <= 0.0);
    CHECK((l - x).maxCoeff() <= 0.0);
    CHECK(s.step.norm() <= delta * (1.0 + 1e-10));
    CHECK(s.predicted_reduction >= 0.0);
    double grid = 0.0;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const Vector y(Eigen::Vector2d(-1.0 + i / 100.0, -1.0 + j / 100.0));
        if ((y - xk).norm() <= delta) grid = std::min(grid, oracle::qvalue(gr, Hr, y - xk));
      }
    }
    const double v = oracle::qvalue(gr, Hr, s.step);
    // Bounds join the active set and never leave it, so the step is an
    // approximate minimizer only.
    CHECK(-v >= 0.1 * -grid - 1e-12);
    if (convex) {
      CHECK(-v >= 0.5 * -grid - 1e-12);
      if (v <= grid + 1e-2 * (1.0 + gr.norm())) ++close;
    }
  }
  CHECK(close >= 45);
}

TEST_CASE("tcg_linear") {
  std::mt19937_64 rng(49);
  const Matrix H = oracle::rand_sym(rng, 3) + 4.0 * Matrix::Identity(3, 3);
  const Vector g = oracle::randn(rng, 3);
  const Matrix A = Matrix::Identity(1, 3);
  const TrustRegionStep a = tcg_linear(g, H, 0.5, A, Vector::Constant(1, 100.0), Vector::Zero(3));
  const TrustRegionStep b = truncated_cg(g, H, 0.5);
  CHECK((a.step - b.step).norm() < 1e-12);

  // x2 <= 0 active at x_k = 0, H = I, g pushes into the constraint.
  const Matrix A2 = (Matrix(1, 2) << 0.0, 1.0).finished();
  const TrustRegionStep c =
      tcg_linear(Vector(Eigen::Vector2d(-0.3, -1.0)), Matrix::Identity(2, 2), 10.0, A2, Vector::Zero(1), Vector::Zero(2));
  CHECK(std::abs(c.step[0] - 0.3) < 1e-10);
  CHECK(std::abs(c.step[1]) < 1e-12);

  // Two blocking constraints whose projected gradient is pure roundoff.
  Matrix H2(2, 2);
  H2 << 1.1988391700990089, -0.89936146967538411, -0.89936146967538411, 0.84996047363163363;
  const Vector g2(Eigen::Vector2d(-0.77651240391934451, 0.31740432730230611));
  Matrix P2(5, 2);
  P2 << 0.99955886274123773, 0.0296998302258362, 0.1565157198445418, 0.98767546767222325, -0.99702954712309655,
      0.07702001144840831, -0.53272682373458236, -0.84628726285680511, 0.39445808805526478, -0.91891393327546456;
  const Vector q2 = (Vector(5) << 0.39503321024314575, 0.10373863708950695, 0.12882323545283, 0.21370156686036129,
                     0.15268900742181193).finished();
  const TrustRegionStep z = tcg_linear(g2, H2, 1.2341460329719927, P2, q2, Vector::Zero(2));
  CHECK(z.predicted_reduction >= 0.0);
  CHECK(z.step.norm() == 0.0);

  for (int t = 0; t < 30; ++t) {
    const Index m = 5;
    Matrix P(m, 2);
    Vector q(m);
    for (Index i = 0; i < m; ++i) {
      const double th = 2.0 * std::numbers::pi * (i + oracle::uniform(rng, 0, 0.5)) / m;
      P(i, 0) = std::cos(th);
      P(i, 1) = std::sin(th);
      q[i] = oracle::uniform(rng, 0.3, 1.0);
    }
    const Vector xk = Vector::Zero(2);
    const Matrix Hr = oracle::rand_sym(rng, 2);
    const Vector gr = oracle::randn(rng, 2);
    const double delta = oracle::uniform(rng, 0.2, 1.5);
    const TrustRegionStep s = tcg_linear(gr, Hr, delta, P, q, xk);
    CHECK((P * s.step - q).maxCoeff() <= 1e-10);
    CHECK(s.step.norm() <= delta * (1.0 + 1e-10));
    CHECK(s.predicted_reduction >= 0.0);
  }
}

TEST_CASE("nnls_cone") {
  const Matrix A = Matrix::Identity(2, 2);
  Vector lam = nnls_cone(A, Vector(Eigen::Vector2d(1.0, -2.0)));
  CHECK(std::abs(lam[0] - 1.0) < 1e-12);
  CHECK(lam[1] == 0.0);
  std::mt19937_64 rng(50);
  for (int t = 0; t < 20; ++t) {
    const Matrix B = oracle::randn(rng, 4, 3);
    const Vector x = oracle::randn(rng, 3);
    lam = nnls_cone(B, x);
    CHECK(lam.minCoeff() >= 0.0);
    const Vector r = x - B.transpose() * lam;
    const Vector grad = B * r;
    for (Index i = 0; i < 4; ++i) {
      CHECK(grad[i] <= 1e-10);
      if (lam[i] > 0) CHECK(std::abs(grad[i]) <= 1e-10);
    }
  }
}

TEST_CASE("cobyla_step examples") {
  SurrogateModel obj = SurrogateModel::zero(3, Vector::Zero(3), SurrogateModel::Kind::Linear);
  obj.g = Vector(Eigen::Vector3d(3.0, 4.0, 0.0));
  TrustRegionStep s = cobyla_step(obj, {}, Vector::Zero(3), 2.0);
  CHECK((s.step - Vector(Eigen::Vector3d(-1.2, -1.6, 0.0))).norm() < 1e-10);

  SurrogateModel con = SurrogateModel::zero(3, Vector::Zero(3), SurrogateModel::Kind::Linear);
  con.c = -10.0;
  con.g = Vector::Unit(3, 0);
  const SurrogateModel cons[] = {con};
  s = cobyla_step(obj, cons, Vector::Zero(3), 1.0);
  CHECK((s.step - Vector::Unit(3, 0)).norm() < 1e-10);
  CHECK(std::abs(s.linear_violation - 9.0) < 1e-10);

  // Feasible linearization: stage 2 runs down -g until x1 >= -0.5 binds.
  SurrogateModel obj2 = SurrogateModel::zero(2, Vector::Zero(2), SurrogateModel::Kind::Linear);
  obj2.g = Vector(Eigen::Vector2d(1.0, 0.0));
  SurrogateModel c2 = SurrogateModel::zero(2, Vector::Zero(2), SurrogateModel::Kind::Linear);
  c2.c = 0.5;
  c2.g = Vector(Eigen::Vector2d(1.0, 0.0));
  const SurrogateModel cons2[] = {c2};
  s = cobyla_step(obj2, cons2, Vector::Zero(2), 1.0);
  CHECK(std::abs(s.step[0] + 0.5) < 1e-10);
  CHECK(s.linear_violation <= 1e-12);
}

TEST_CASE("cobyla_step never raises the linearized violation") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 4;
    const Index m = 1 + t % 5;
    SurrogateModel obj = SurrogateModel::zero(n, Vector::Zero(n), SurrogateModel::Kind::Linear);
    obj.g = oracle::randn(rng, n);
    std::vector<SurrogateModel> cons;
    double v0 = 0.0;
    for (Index i = 0; i < m; ++i) {
      SurrogateModel c = SurrogateModel::zero(n, Vector::Zero(n), SurrogateModel::Kind::Linear);
      c.c = oracle::uniform(rng, -2, 1);
      c.g = oracle::randn(rng, n);
      v0 = std::max(v0, -c.c);
      cons.push_back(c);
    }
    const double delta = oracle::uniform(rng, 0.1, 2.0);
    const TrustRegionStep s = cobyla_step(obj, cons, Vector::Zero(n), delta);
    CHECK(s.step.norm() <= delta * (1.0 + 1e-10));
    double v = 0.0;
    for (const SurrogateModel& c : cons) v = std::max(v, -c.value(s.step));
    CHECK(v <= v0 + 1e-10);
    CHECK(std::abs(v - s.linear_violation) <= 1e-8 * (1.0 + v));
  }
}

TEST_CASE("geo_uobyqa") {
  std::mt19937_64 rng(52);
  LagrangeFunction lin = random_lagrange(rng, 3, true);
  GeometryStep s = geo_uobyqa(lin, Vector::Zero(3), 0.5);
  const Vector dir = lin.g / lin.g.norm();
  CHECK((s.point.cwiseAbs() - 0.5 * dir.cwiseAbs()).norm() < 1e-10);

  LagrangeFunction sq;
  static_cast<SurrogateModel&>(sq) = SurrogateModel::zero(2, Vector::Zero(2));
  sq.H(0, 0) = 2.0;
  s = geo_uobyqa(sq, Vector::Zero(2), 1.0);
  CHECK(std::abs(s.lagrange_abs - 1.0) < 1e-10);
  CHECK(std::abs(std::abs(s.point[0]) - 1.0) < 1e-10);

  for (int t = 0; t < 20; ++t) {
    const LagrangeFunction l = random_lagrange(rng, 4);
    const Vector xk = oracle::randn(rng, 4);
    const double r = oracle::uniform(rng, 0.1, 2.0);
    s = geo_uobyqa(l, xk, r);
    CHECK((s.point - xk).norm() <= r * (1.0 + 1e-10));
    CHECK(std::abs(s.lagrange_abs - std::abs(l.value(s.point))) <= 1e-10 * (1.0 + s.lagrange_abs));
    CHECK(s.lagrange_abs >= 0.5 * max_abs_on_sphere(l, xk, r, rng, 100000));
  }
}

TEST_CASE("geo_newuoa, geo_bobyqa and geo_lincoa contracts") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + t % 4;
    InitialSet s = init_set(Vector::Zero(n), 1.0, 2 * n + 1, ModelVariant::QuadraticKKT);
    const Index drop = 1 + t % (2 * n);
    const LagrangeFunction l = lagrange(s.set, drop);
    const Vector xk = s.set.point(0);
    const double r = oracle::uniform(rng, 0.2, 1.0);

    const GeometryStep a = geo_newuoa(l, s.set, drop, xk, r);
    CHECK((a.point - xk).norm() <= r * (1.0 + 1e-10));
    CHECK(std::abs(a.lagrange_abs - std::abs(l.value(a.point))) <= 1e-10 * (1.0 + a.lagrange_abs));
    Vector u = s.set.point(drop) - xk;
    u /= u.norm();
    const double line = std::max(std::abs(l.value(xk + r * u)), std::abs(l.value(xk - r * u)));
    CHECK(a.lagrange_abs >= line - 1e-12);

    const Vector lo = Vector::Constant(n, -0.5);
    const Vector hi = Vector::Constant(n, 0.3);
    const GeometryStep b = geo_bobyqa(l, s.set, drop, xk, r, lo, hi);
    CHECK((b.point - hi).maxCoeff() <= 0.0);
    CHECK((lo - b.point).maxCoeff() <= 0.0);
    CHECK((b.point - xk).norm() <= r * (1.0 + 1e-10));
    CHECK(std::abs(b.lagrange_abs - std::abs(l.value(b.point))) <= 1e-10 * (1.0 + b.lagrange_abs));

    const Matrix A = oracle::randn(rng, 3, n);
    const Vector bb = A * xk + Vector::Constant(3, 0.05);
    const GeometryStep c = geo_lincoa(l, s.set, drop, xk, r, A, bb);
    CHECK((c.point - xk).norm() <= r * (1.0 + 1e-10));
    CHECK(std::abs(c.lagrange_abs - std::abs(l.value(c.point))) <= 1e-10 * (1.0 + c.lagrange_abs));
  }
}

TEST_CASE("geo_bobyqa at a box vertex stays feasible") {
  InitialSet s = init_set(Vector::Zero(2), 0.5, 5, ModelVariant::QuadraticKKT);
  const LagrangeFunction l = lagrange(s.set, 3);
  const Vector lo = Vector::Zero(2);
  const Vector hi = Vector::Constant(2, 0.5);
  const GeometryStep g = geo_bobyqa(l, s.set, 3, Vector::Zero(2), 0.5, lo, hi);
  CHECK((g.point - hi).maxCoeff() <= 0.0);
  CHECK((lo - g.point).maxCoeff() <= 0.0);
}

TEST_CASE("geo_lincoa projected candidate lies in the active plane") {
  LagrangeFunction l;
  static_cast<SurrogateModel&>(l) = SurrogateModel::zero(2, Vector::Zero(2), SurrogateModel::Kind::Linear);
  l.H = Matrix::Zero(2, 2);
  l.g = Vector(Eigen::Vector2d(1.0, 2.0));
  InitialSet s = init_set(Vector::Zero(2), 1.0, 5, ModelVariant::QuadraticKKT);
  const Matrix A = (Matrix(1, 2) << 0.0, 1.0).finished();
  const GeometryStep g = geo_lincoa(l, s.set, 1, Vector::Zero(2), 1.0, A, Vector::Zero(1));
  if (g.recipe == GeometryRecipe::ProjectedGradient) CHECK(std::abs(g.point[1]) <= 1e-10);
  CHECK(g.lagrange_abs >= std::abs(l.value(Vector(Eigen::Vector2d(1.0, 0.0)))) * 0.1 - 1e-12);

  const GeometryStep free = geo_lincoa(l, s.set, 1, Vector::Zero(2), 1.0, Matrix(0, 2), Vector(0));
  CHECK(std::abs(free.lagrange_abs - l.g.norm()) < 1e-10);
}
