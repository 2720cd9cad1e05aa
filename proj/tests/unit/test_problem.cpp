#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dfo/problem.hpp"
#include "oracles.hpp"

using namespace dfo;

namespace {

ProblemDefinition base_def(Index n) {
  ProblemDefinition d;
  d.objective = [](const Vector& x) { return x.squaredNorm(); };
  d.x0 = Vector::Zero(n);
  return d;
}

}  // namespace

TEST_CASE("problem construction validates sizes and bounds") {
  ProblemDefinition d = base_def(2);
  d.lower = Vector::Constant(3, 0.0);
  CHECK_THROWS_AS(Problem{d}, InvalidProblem);

  d = base_def(2);
  d.lower = Vector::Constant(2, 1.0);
  d.upper = Vector::Constant(2, 0.0);
  CHECK_THROWS_AS(Problem{d}, InfeasibleBounds);

  d = base_def(2);
  d.lin_ineq = LinearConstraints{Matrix::Ones(1, 3), Vector::Ones(1)};
  CHECK_THROWS_AS(Problem{d}, InvalidProblem);
}

TEST_CASE("classify") {
  CHECK(classify(Problem(base_def(3))) == ProblemType::Unconstrained);

  ProblemDefinition d = base_def(2);
  d.lower = Vector::Constant(2, -1.0);
  d.upper = Vector::Constant(2, kInf);
  CHECK(classify(Problem(d)) == ProblemType::BoundConstrained);

  d = base_def(2);
  d.lower = Vector::Constant(2, -kInf);
  d.upper = Vector::Constant(2, kInf);
  CHECK(classify(Problem(d)) == ProblemType::Unconstrained);

  d = base_def(2);
  d.lin_ineq = LinearConstraints{Matrix::Ones(1, 2), Vector::Ones(1)};
  CHECK(classify(Problem(d)) == ProblemType::LinearlyConstrained);

  d = base_def(2);
  d.lower = Vector::Constant(2, -1.0);
  d.upper = Vector::Constant(2, 1.0);
  d.lin_eq = LinearConstraints{Matrix::Ones(1, 2), Vector::Zero(1)};
  d.nl_ineq = NonlinearConstraints{[](const Vector& x) { return Vector::Constant(1, x[0]); }, 1};
  CHECK(classify(Problem(d)) == ProblemType::NonlinearlyConstrained);
}

TEST_CASE("eliminate_equalities on x1 + x2 = 2") {
  ProblemDefinition d = base_def(2);
  d.lin_eq = LinearConstraints{Matrix::Ones(1, 2), Vector::Constant(1, 2.0)};
  const EqualityElimination e = eliminate_equalities(Problem(d));
  REQUIRE(e.map.reduced_dim() == 1);
  CHECK(e.map.rank == 1);
  CHECK((e.map.offset - Vector::Ones(2)).norm() < 1e-12);
  const Vector b = e.map.basis.col(0);
  CHECK(std::abs(b.norm() - 1.0) < 1e-12);
  CHECK(std::abs(b[0] + b[1]) < 1e-12);
  for (double z : {-1.0, 0.0, 1.0}) {
    const Vector x = e.map.to_full(Vector::Constant(1, z));
    CHECK(std::abs(x.sum() - 2.0) < 1e-12);
  }
  CHECK(e.reduced.dim() == 1);
  CHECK(std::abs(e.reduced.objective()(Vector::Zero(1)) - 2.0) < 1e-12);
}

TEST_CASE("eliminate_equalities with duplicate rows and a full system") {
  ProblemDefinition d = base_def(3);
  Matrix A(2, 3);
  A << 1, 2, 3, 1, 2, 3;
  d.lin_eq = LinearConstraints{A, Vector::Constant(2, 4.0)};
  EqualityElimination e = eliminate_equalities(Problem(d));
  CHECK(e.map.rank == 1);
  CHECK(e.map.reduced_dim() == 2);

  d = base_def(3);
  const Vector c = Vector::LinSpaced(3, 1.0, 3.0);
  d.lin_eq = LinearConstraints{Matrix::Identity(3, 3), c};
  e = eliminate_equalities(Problem(d));
  CHECK(e.map.reduced_dim() == 0);
  CHECK((e.map.offset - c).norm() < 1e-12);

  d = base_def(2);
  Matrix B(2, 2);
  B << 1, 1, 1, 1;
  d.lin_eq = LinearConstraints{B, Vector(Eigen::Vector2d(1.0, 2.0))};
  CHECK_THROWS_AS(eliminate_equalities(Problem(d)), InconsistentEqualities);
}

TEST_CASE("reduced space maps onto the equality manifold") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 6;
    const Index m = 1 + t % n;
    Matrix A = oracle::randn(rng, m, n);
    if (m > 1 && t % 3 == 0) A.row(m - 1) = A.row(0) * 2.0;
    const Vector x_true = oracle::randn(rng, n);
    const Vector b = A * x_true;
    const AffineReduction r = reduce_equalities(LinearConstraints{A, b});
    for (int k = 0; k < 5; ++k) {
      const Vector x = r.to_full(10.0 * oracle::randn(rng, r.reduced_dim()));
      CHECK((A * x - b).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + b.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("bounds transfer through an axis-aligned reduction") {
  ProblemDefinition d = base_def(3);
  d.lower = Vector::Constant(3, -1.0);
  d.upper = Vector::Constant(3, 2.0);
  Matrix A = Matrix::Zero(1, 3);
  A(0, 1) = 1.0;
  d.lin_eq = LinearConstraints{A, Vector::Constant(1, 0.5)};
  const EqualityElimination e = eliminate_equalities(Problem(d));
  CHECK(e.map.axis_aligned());
  CHECK(e.reduced.dim() == 2);
  CHECK(classify(e.reduced) == ProblemType::BoundConstrained);
}

TEST_CASE("project_start examples") {
  const Vector inf = Vector::Constant(2, kInf);
  ProjectionResult p = project_start(Vector(Eigen::Vector2d(0.3, 0.4)), -inf, inf, nullptr);
  CHECK(!p.moved);
  CHECK(p.x == Vector(Eigen::Vector2d(0.3, 0.4)));

  p = project_start(Vector(Eigen::Vector2d(2.0, 2.0)), Vector::Zero(2), Vector::Ones(2), nullptr);
  CHECK((p.x - Vector::Ones(2)).norm() < 1e-12);

  const LinearConstraints half{-Matrix::Ones(1, 2), Vector::Constant(1, -2.0)};
  p = project_start(Vector::Zero(2), -inf, inf, &half);
  CHECK(p.feasible);
  CHECK((p.x - Vector::Ones(2)).norm() < 1e-8);
  for (int i = -20; i <= 20; ++i) {
    const Vector y = Vector::Ones(2) + 0.05 * i * Vector(Eigen::Vector2d(1.0, -1.0));
    CHECK(p.x.norm() <= y.norm() + 1e-12);
  }
}

TEST_CASE("project_start against a dense oracle") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const Index n = 3;
    const Matrix A = oracle::randn(rng, 2, n);
    const Vector b = Vector::Constant(2, -0.5);
    const Vector lo = Vector::Constant(n, -2.0);
    const Vector hi = Vector::Constant(n, 2.0);
    const Vector x0 = 3.0 * oracle::randn(rng, n);
    const LinearConstraints ineq{A, b};
    const ProjectionResult p = project_start(x0, lo, hi, &ineq);
    if (!p.feasible) continue;
    CHECK((A * p.x - b).maxCoeff() <= 1e-8);
    CHECK((p.x - hi).maxCoeff() <= 1e-8);
    CHECK((lo - p.x).maxCoeff() <= 1e-8);
    for (int k = 0; k < 300; ++k) {
      const Vector y = p.x + 0.3 * oracle::randn(rng, n);
      const bool feas = (A * y - b).maxCoeff() <= 0 && (y - hi).maxCoeff() <= 0 && (lo - y).maxCoeff() <= 0;
      if (feas) CHECK((p.x - x0).norm() <= (y - x0).norm() + 1e-8);
    }
  }
}

TEST_CASE("moderate") {
  CHECK(moderate(std::numeric_limits<double>::quiet_NaN()) == 1e30);
  CHECK(moderate(3.5) == 3.5);
  CHECK(moderate(kInf) == 1e30);
  CHECK(moderate(-kInf) == -1e30);
  CHECK(moderate(5e30) == 1e30);
  CHECK(moderate_constraint(std::numeric_limits<double>::quiet_NaN()) == 1e30);
  CHECK(moderate_constraint(-kInf) == -1e30);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const double v = std::ldexp(oracle::uniform(rng, -1, 1), static_cast<int>(oracle::uniform(rng, -200, 200)));
    CHECK(moderate(moderate(v)) == moderate(v));
    CHECK(std::isfinite(moderate(v)));
  }
}

TEST_CASE("barrier wrapper records raw values") {
  ProblemDefinition d = base_def(2);
  d.objective = [](const Vector& x) { return x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 2.0; };
  RunRecord record;
  const Problem wrapped = wrap_with_barrier(Problem(d), BarrierConfig{}, record);
  CHECK(wrapped.objective()(Vector(Eigen::Vector2d(1.0, 0.0))) == 1e30);
  REQUIRE(record.size() == 1);
  CHECK(std::isnan(record[0].raw));
  CHECK(record[0].value == 1e30);
  CHECK(wrapped.objective()(Vector(Eigen::Vector2d(-1.0, 0.0))) == 2.0);
  CHECK(record.size() == 2);
  CHECK(record.back().raw == 2.0);
  CHECK(record.back().index == 1);

  RunRecord plain;
  const Problem passthrough = wrap_recording(Problem(d), plain);
  CHECK(std::isnan(passthrough.objective()(Vector(Eigen::Vector2d(1.0, 0.0)))));
  CHECK(plain.size() == 1);
}

TEST_CASE("callback exceptions become CallbackPanic") {
  ProblemDefinition d = base_def(1);
  d.objective = [](const Vector&) -> double { throw std::runtime_error("boom"); };
  RunRecord record;
  const Problem wrapped = wrap_with_barrier(Problem(d), BarrierConfig{}, record);
  CHECK_THROWS_AS(wrapped.objective()(Vector::Zero(1)), CallbackPanic);
}
