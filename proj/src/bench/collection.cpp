#include <algorithm>
#include <cmath>
#include <numbers>

#include "dfo/bench.hpp"

namespace dfo::bench {

namespace {

using Residual = std::function<void(const Vector& x, Vector& r)>;

ObjectiveFn sum_of_squares(Index m, Residual res) {
  return [m, res](const Vector& x) {
    Vector r(m);
    res(x, r);
    return r.squaredNorm();
  };
}

BenchProblem make(std::string name, Vector x0, ObjectiveFn f, std::optional<double> fstar,
                  std::vector<std::string> tags) {
  BenchProblem p;
  p.name = std::move(name);
  p.n = x0.size();
  p.x0 = std::move(x0);
  p.f = std::move(f);
  p.fstar = fstar;
  p.tags = std::move(tags);
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

const std::vector<std::string> kSos{"nonconvex", "sum-of-squares"};
const std::vector<std::string> kConvexSos{"convex", "sum-of-squares"};

BenchProblem rosenbrock(Index n) {
  Vector x0(n);
  for (Index i = 0; i < n; ++i) x0[i] = (i % 2 == 0) ? -1.2 : 1.0;
  const std::string name = n == 2 ? "rosenbrock" : "extended_rosenbrock_" + std::to_string(n);
  return make(name, x0, sum_of_squares(n, [n](const Vector& x, Vector& r) {
                for (Index i = 0; i < n; i += 2) {
                  r[i] = 10.0 * (x[i + 1] - x[i] * x[i]);
                  r[i + 1] = 1.0 - x[i];
                }
              }),
              0.0, kSos);
}

BenchProblem powell_singular(Index n) {
  Vector x0(n);
  for (Index i = 0; i < n; i += 4) x0.segment(i, 4) = vec({3.0, -1.0, 0.0, 1.0});
  const std::string name = n == 4 ? "powell_singular" : "extended_powell_singular_" + std::to_string(n);
  return make(name, x0, sum_of_squares(n, [n](const Vector& x, Vector& r) {
                for (Index i = 0; i < n; i += 4) {
                  r[i] = x[i] + 10.0 * x[i + 1];
                  r[i + 1] = std::sqrt(5.0) * (x[i + 2] - x[i + 3]);
                  r[i + 2] = std::pow(x[i + 1] - 2.0 * x[i + 2], 2);
                  r[i + 3] = std::sqrt(10.0) * std::pow(x[i] - x[i + 3], 2);
                }
              }),
              0.0, kSos);
}

BenchProblem convex_quadratic(Index n) {
  Vector x0 = Vector::Zero(n);
  auto f = [n](const Vector& x) {
    double s = 0.0;
    double t = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = x[i] - 1.0;
      s += (1.0 + static_cast<double>(i) / static_cast<double>(n)) * d * d;
      t += d;
    }
    return s + 0.1 * t * t;
  };
  return make("convex_quadratic_" + std::to_string(n), x0, f, 0.0, {"convex"});
}

std::vector<BenchProblem> build() {
  std::vector<BenchProblem> c;
  c.push_back(rosenbrock(2));

  c.push_back(make("freudenstein_roth", vec({0.5, -2.0}), sum_of_squares(2, [](const Vector& x, Vector& r) {
                     r[0] = -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1];
                     r[1] = -29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1];
                   }),
                   0.0, kSos));

  c.push_back(make("powell_badly_scaled", vec({0.0, 1.0}), sum_of_squares(2, [](const Vector& x, Vector& r) {
                     r[0] = 1e4 * x[0] * x[1] - 1.0;
                     r[1] = std::exp(-x[0]) + std::exp(-x[1]) - 1.0001;
                   }),
                   0.0, kSos));

  c.push_back(make("brown_badly_scaled", vec({1.0, 1.0}), sum_of_squares(3, [](const Vector& x, Vector& r) {
                     r[0] = x[0] - 1e6;
                     r[1] = x[1] - 2e-6;
                     r[2] = x[0] * x[1] - 2.0;
                   }),
                   0.0, kSos));

  c.push_back(make("beale", vec({1.0, 1.0}), sum_of_squares(3, [](const Vector& x, Vector& r) {
                     const double y[] = {1.5, 2.25, 2.625};
                     for (int i = 0; i < 3; ++i) r[i] = y[i] - x[0] * (1.0 - std::pow(x[1], i + 1));
                   }),
                   0.0, kSos));

  c.push_back(make("jennrich_sampson", vec({0.3, 0.4}), sum_of_squares(10, [](const Vector& x, Vector& r) {
                     for (int i = 1; i <= 10; ++i) r[i - 1] = 2.0 + 2.0 * i - (std::exp(i * x[0]) + std::exp(i * x[1]));
                   }),
                   124.362, kSos));

  c.push_back(make("helical_valley", vec({-1.0, 0.0, 0.0}), sum_of_squares(3, [](const Vector& x, Vector& r) {
                     const double pi2 = 2.0 * std::numbers::pi;
                     double theta;
                     if (x[0] > 0.0) theta = std::atan(x[1] / x[0]) / pi2;
                     else if (x[0] < 0.0) theta = std::atan(x[1] / x[0]) / pi2 + 0.5;
                     else theta = x[1] >= 0.0 ? 0.25 : -0.25;
                     r[0] = 10.0 * (x[2] - 10.0 * theta);
                     r[1] = 10.0 * (std::hypot(x[0], x[1]) - 1.0);
                     r[2] = x[2];
                   }),
                   0.0, kSos));

  c.push_back(make("bard", vec({1.0, 1.0, 1.0}), sum_of_squares(15, [](const Vector& x, Vector& r) {
                     const double y[] = {0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
                                         0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39};
                     for (int i = 1; i <= 15; ++i) {
                       const double u = i;
                       const double v = 16 - i;
                       const double w = std::min(u, v);
                       r[i - 1] = y[i - 1] - (x[0] + u / (v * x[1] + w * x[2]));
                     }
                   }),
                   8.21487e-3, kSos));

  c.push_back(make("gaussian", vec({0.4, 1.0, 0.0}), sum_of_squares(15, [](const Vector& x, Vector& r) {
                     const double y[] = {0.0009, 0.0044, 0.0175, 0.0540, 0.1295, 0.2420, 0.3521, 0.3989,
                                         0.3521, 0.2420, 0.1295, 0.0540, 0.0175, 0.0044, 0.0009};
                     for (int i = 1; i <= 15; ++i) {
                       const double t = (8.0 - i) / 2.0;
                       r[i - 1] = x[0] * std::exp(-x[1] * (t - x[2]) * (t - x[2]) / 2.0) - y[i - 1];
                     }
                   }),
                   1.12793e-8, kSos));

  c.push_back(make("box_3d", vec({0.0, 10.0, 20.0}), sum_of_squares(10, [](const Vector& x, Vector& r) {
                     for (int i = 1; i <= 10; ++i) {
                       const double t = 0.1 * i;
                       r[i - 1] = std::exp(-t * x[0]) - std::exp(-t * x[1]) - x[2] * (std::exp(-t) - std::exp(-10.0 * t));
                     }
                   }),
                   0.0, kSos));

  c.push_back(powell_singular(4));

  c.push_back(make("wood", vec({-3.0, -1.0, -3.0, -1.0}), sum_of_squares(6, [](const Vector& x, Vector& r) {
                     r[0] = 10.0 * (x[1] - x[0] * x[0]);
                     r[1] = 1.0 - x[0];
                     r[2] = std::sqrt(90.0) * (x[3] - x[2] * x[2]);
                     r[3] = 1.0 - x[2];
                     r[4] = std::sqrt(10.0) * (x[1] + x[3] - 2.0);
                     r[5] = (x[1] - x[3]) / std::sqrt(10.0);
                   }),
                   0.0, kSos));

  c.push_back(make("kowalik_osborne", vec({0.25, 0.39, 0.415, 0.39}), sum_of_squares(11, [](const Vector& x, Vector& r) {
                     const double y[] = {0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                                         0.0456, 0.0342, 0.0323, 0.0235, 0.0246};
                     const double u[] = {4.0, 2.0, 1.0, 0.5, 0.25, 0.167, 0.125, 0.1, 0.0833, 0.0714, 0.0625};
                     for (int i = 0; i < 11; ++i) {
                       r[i] = y[i] - x[0] * (u[i] * u[i] + u[i] * x[1]) / (u[i] * u[i] + u[i] * x[2] + x[3]);
                     }
                   }),
                   3.07505e-4, kSos));

  c.push_back(make("brown_dennis", vec({25.0, 5.0, -5.0, -1.0}), sum_of_squares(20, [](const Vector& x, Vector& r) {
                     for (int i = 1; i <= 20; ++i) {
                       const double t = i / 5.0;
                       const double a = x[0] + t * x[1] - std::exp(t);
                       const double b = x[2] + x[3] * std::sin(t) - std::cos(t);
                       r[i - 1] = a * a + b * b;
                     }
                   }),
                   85822.2, kSos));

  c.push_back(make("osborne_1", vec({0.5, 1.5, -1.0, 0.01, 0.02}), sum_of_squares(33, [](const Vector& x, Vector& r) {
                     const double y[] = {0.844, 0.908, 0.932, 0.936, 0.925, 0.908, 0.881, 0.850, 0.818,
                                         0.784, 0.751, 0.718, 0.685, 0.658, 0.628, 0.603, 0.580, 0.558,
                                         0.538, 0.522, 0.506, 0.490, 0.478, 0.467, 0.457, 0.448, 0.438,
                                         0.431, 0.424, 0.420, 0.414, 0.411, 0.406};
                     for (int i = 0; i < 33; ++i) {
                       const double t = 10.0 * i;
                       r[i] = y[i] - (x[0] + x[1] * std::exp(-t * x[3]) + x[2] * std::exp(-t * x[4]));
                     }
                   }),
                   5.46489e-5, kSos));

  c.push_back(make("biggs_exp6", vec({1.0, 2.0, 1.0, 1.0, 1.0, 1.0}), sum_of_squares(13, [](const Vector& x, Vector& r) {
                     for (int i = 1; i <= 13; ++i) {
                       const double t = 0.1 * i;
                       const double y = std::exp(-t) - 5.0 * std::exp(-10.0 * t) + 3.0 * std::exp(-4.0 * t);
                       r[i - 1] = x[2] * std::exp(-t * x[0]) - x[3] * std::exp(-t * x[1]) + x[5] * std::exp(-t * x[4]) - y;
                     }
                   }),
                   0.0, kSos));

  c.push_back(make("watson", Vector::Zero(6), sum_of_squares(31, [](const Vector& x, Vector& r) {
                     const Index n = x.size();
                     for (int i = 1; i <= 29; ++i) {
                       const double t = i / 29.0;
                       double s1 = 0.0;
                       for (Index j = 1; j < n; ++j) s1 += static_cast<double>(j) * x[j] * std::pow(t, j - 1);
                       double s2 = 0.0;
                       for (Index j = 0; j < n; ++j) s2 += x[j] * std::pow(t, j);
                       r[i - 1] = s1 - s2 * s2 - 1.0;
                     }
                     r[29] = x[0];
                     r[30] = x[1] - x[0] * x[0] - 1.0;
                   }),
                   2.28767e-3, kSos));

  c.push_back(rosenbrock(10));
  c.push_back(powell_singular(8));

  {
    const Index n = 10;
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0[j] = static_cast<double>(j + 1);
    c.push_back(make("penalty_1", x0, sum_of_squares(n + 1, [n](const Vector& x, Vector& r) {
                       for (Index i = 0; i < n; ++i) r[i] = std::sqrt(1e-5) * (x[i] - 1.0);
                       r[n] = x.squaredNorm() - 0.25;
                     }),
                     7.08765e-5, kSos));
  }

  {
    const Index n = 10;
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0[j] = 1.0 - static_cast<double>(j + 1) / n;
    c.push_back(make("variably_dimensioned", x0, sum_of_squares(n + 2, [n](const Vector& x, Vector& r) {
                       double s = 0.0;
                       for (Index j = 0; j < n; ++j) {
                         r[j] = x[j] - 1.0;
                         s += static_cast<double>(j + 1) * (x[j] - 1.0);
                       }
                       r[n] = s;
                       r[n + 1] = s * s;
                     }),
                     0.0, kConvexSos));
  }

  {
    const Index n = 10;
    c.push_back(make("trigonometric", Vector::Constant(n, 1.0 / n), sum_of_squares(n, [n](const Vector& x, Vector& r) {
                       const double sc = x.array().cos().sum();
                       for (Index i = 0; i < n; ++i) {
                         r[i] = n - sc + static_cast<double>(i + 1) * (1.0 - std::cos(x[i])) - std::sin(x[i]);
                       }
                     }),
                     0.0, kSos));
  }

  {
    const Index n = 10;
    c.push_back(make("brown_almost_linear", Vector::Constant(n, 0.5), sum_of_squares(n, [n](const Vector& x, Vector& r) {
                       const double s = x.sum();
                       for (Index i = 0; i + 1 < n; ++i) r[i] = x[i] + s - static_cast<double>(n + 1);
                       r[n - 1] = x.prod() - 1.0;
                     }),
                     0.0, kSos));
  }

  {
    const Index n = 10;
    const double h = 1.0 / (n + 1);
    Vector x0(n);
    for (Index i = 0; i < n; ++i) {
      const double t = (i + 1) * h;
      x0[i] = t * (t - 1.0);
    }
    c.push_back(make("discrete_boundary_value", x0, sum_of_squares(n, [n, h](const Vector& x, Vector& r) {
                       for (Index i = 0; i < n; ++i) {
                         const double t = (i + 1) * h;
                         const double left = i > 0 ? x[i - 1] : 0.0;
                         const double right = i + 1 < n ? x[i + 1] : 0.0;
                         r[i] = 2.0 * x[i] - left - right + h * h * std::pow(x[i] + t + 1.0, 3) / 2.0;
                       }
                     }),
                     0.0, kSos));
    c.push_back(make("discrete_integral", x0, sum_of_squares(n, [n, h](const Vector& x, Vector& r) {
                       for (Index i = 0; i < n; ++i) {
                         const double ti = (i + 1) * h;
                         double s1 = 0.0;
                         double s2 = 0.0;
                         for (Index j = 0; j < n; ++j) {
                           const double tj = (j + 1) * h;
                           const double cube = std::pow(x[j] + tj + 1.0, 3);
                           if (j <= i) s1 += tj * cube;
                           else s2 += (1.0 - tj) * cube;
                         }
                         r[i] = x[i] + h * ((1.0 - ti) * s1 + ti * s2) / 2.0;
                       }
                     }),
                     0.0, kSos));
  }

  {
    const Index n = 10;
    c.push_back(make("broyden_tridiagonal", Vector::Constant(n, -1.0), sum_of_squares(n, [n](const Vector& x, Vector& r) {
                       for (Index i = 0; i < n; ++i) {
                         const double left = i > 0 ? x[i - 1] : 0.0;
                         const double right = i + 1 < n ? x[i + 1] : 0.0;
                         r[i] = (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0;
                       }
                     }),
                     0.0, kSos));
    c.push_back(make("broyden_banded", Vector::Constant(n, -1.0), sum_of_squares(n, [n](const Vector& x, Vector& r) {
                       for (Index i = 0; i < n; ++i) {
                         double s = 0.0;
                         for (Index j = std::max<Index>(0, i - 5); j <= std::min<Index>(n - 1, i + 1); ++j) {
                           if (j != i) s += x[j] * (1.0 + x[j]);
                         }
                         r[i] = x[i] * (2.0 + 5.0 * x[i] * x[i]) + 1.0 - s;
                       }
                     }),
                     0.0, kSos));
  }

  {
    const Index n = 10;
    const Index m = 20;
    c.push_back(make("linear_full_rank", Vector::Ones(n), sum_of_squares(m, [n, m](const Vector& x, Vector& r) {
                       const double s = 2.0 * x.sum() / static_cast<double>(m);
                       for (Index i = 0; i < m; ++i) r[i] = (i < n ? x[i] : 0.0) - s - 1.0;
                     }),
                     static_cast<double>(m - n), kConvexSos));
  }

  {
    const Index n = 8;
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0[j] = static_cast<double>(j + 1) / (n + 1);
    c.push_back(make("chebyquad", x0, sum_of_squares(n, [n](const Vector& x, Vector& r) {
                       r.setZero();
                       for (Index j = 0; j < n; ++j) {
                         const double y = 2.0 * x[j] - 1.0;
                         double t0 = 1.0;
                         double t1 = y;
                         for (Index i = 0; i < n; ++i) {
                           r[i] += t1;
                           const double t2 = 2.0 * y * t1 - t0;
                           t0 = t1;
                           t1 = t2;
                         }
                       }
                       for (Index i = 0; i < n; ++i) {
                         r[i] /= static_cast<double>(n);
                         const Index k = i + 1;
                         if (k % 2 == 0) r[i] += 1.0 / (static_cast<double>(k * k) - 1.0);
                       }
                     }),
                     3.51687e-3, kSos));
  }

  c.push_back(convex_quadratic(5));
  c.push_back(convex_quadratic(20));
  c.push_back(convex_quadratic(50));

  {
    const Index n = 10;
    c.push_back(make("quartic", Vector::Ones(n),
                     [n](const Vector& x) {
                       double s = 0.0;
                       for (Index i = 0; i < n; ++i) s += static_cast<double>(i + 1) * std::pow(x[i], 4);
                       return s;
                     },
                     0.0, {"convex"}));
  }
  return c;
}

}  // namespace

bool BenchProblem::has_tag(const std::string& t) const { return std::find(tags.begin(), tags.end(), t) != tags.end(); }

const std::vector<BenchProblem>& collection() {
  static const std::vector<BenchProblem> c = build();
  return c;
}

}  // namespace dfo::bench
