#ifndef DFO_SUBPROBLEMS_HPP
#define DFO_SUBPROBLEMS_HPP

#include <span>
#include <vector>

#include "dfo/models.hpp"
#include "dfo/types.hpp"

namespace dfo {

/// Step d of min g^T d + 0.5 d^T H d subject to |d| <= delta (plus the
/// solver-specific constraints).
struct TrustRegionStep {
  Vector step;
  /// Decrease of the quadratic: -(g^T d + 0.5 d^T H d). For cobyla_step this
  /// is the decrease of the linear objective model and may be negative.
  double predicted_reduction = 0.0;
  bool on_boundary = false;
  /// Bound indices (tcg_bounds, encoded as i for lower and n + i for upper)
  /// or constraint rows (tcg_linear, cobyla_step).
  std::vector<Index> active_set;
  /// Lagrange multiplier of the ball constraint (more_sorensen only).
  double lambda = 0.0;
  int iterations = 0;
  /// Largest linearized constraint violation at the step (cobyla_step only).
  double linear_violation = 0.0;
};

enum class GeometryRecipe { Line, Cauchy, Gradient, ProjectedGradient, TwoDimRefined };

const char* to_string(GeometryRecipe r);

struct GeometryStep {
  Vector point;
  double lagrange_abs = 0.0;
  GeometryRecipe recipe = GeometryRecipe::Line;
};

struct MoreSorensenOptions {
  double rel_tol = 1e-12;
  int max_iter = 200;
};

/// Global minimizer of the ball-constrained quadratic, including the hard case.
TrustRegionStep more_sorensen(const Vector& g, const Matrix& H, double delta, const MoreSorensenOptions& opts = {});

struct CgOptions {
  /// Stop once |residual| <= rel_tol * |g|.
  double rel_tol = 1e-2;
  /// Iteration cap; negative means n.
  Index max_iter = -1;
  /// tcg_bounds only: improve boundary steps by searches on circles.
  bool refine = false;
};

/// Steihaug-Toint truncated conjugate gradients from d = 0.
TrustRegionStep truncated_cg(const Vector& g, const Matrix& H, double delta, const CgOptions& opts = {});

/// Minimizes g^T s + 0.5 s^T H s over s = delta (cos t u + sin t v) where u, v
/// is an orthonormal basis of span{d, w}. Returns d when w is parallel to d
/// or when no point of the circle improves on d.
Vector circle_search(const Vector& g, const Matrix& H, const Vector& d, const Vector& w, double delta);

/// Improves a boundary step by repeated circle searches in the span of the
/// step and the model gradient at x_k + d. At most `max_rounds` rounds; stops
/// once a round gains less than 1e-2 of the reduction achieved so far.
Vector two_dim_refine(const SurrogateModel& model, const Vector& d, const Vector& x_k, double delta,
                      int max_rounds = 10);

/// Truncated CG for l <= x_k + d <= u. Variables that reach a bound are fixed
/// there and the iteration restarts on the remaining ones.
TrustRegionStep tcg_bounds(const Vector& g, const Matrix& H, double delta, const Vector& lower, const Vector& upper,
                           const Vector& x_k, const CgOptions& opts = {});

/// Truncated CG for A (x_k + d) <= b. Constraints with residual below
/// 0.2 delta |a_i| are candidates for the active set, which is chosen by a
/// nonnegative least-squares fit of the gradient and recomputed whenever a
/// constraint blocks the step.
TrustRegionStep tcg_linear(const Vector& g, const Matrix& H, double delta, const Matrix& A, const Vector& b,
                           const Vector& x_k, const CgOptions& opts = {});

/// Two-stage step for linear models of f and of constraints c_i(x) >= 0.
/// Stage 1 lowers the largest linearized violation inside the ball; if it
/// ends strictly inside, stage 2 lowers the objective model without raising
/// any violation above the stage-1 level.
TrustRegionStep cobyla_step(const SurrogateModel& obj, std::span<const SurrogateModel> cons, const Vector& x_k,
                            double delta);

/// min |x - A^T lambda| over lambda >= 0 (Lawson-Hanson). A has one
/// generator per row.
Vector nnls_cone(const Matrix& A, const Vector& x);

/// Value of a Lagrange function (or any model) at x.
inline double lagrange_value(const SurrogateModel& l, const Vector& x) { return l.value(x); }

/// Approximate maximizer of |l| over |x - x_k| <= deltabar using the gradient
/// and a dominant curvature direction of l; O(n^2) work.
GeometryStep geo_uobyqa(const LagrangeFunction& lagr, const Vector& x_k, double deltabar);

/// Line candidate towards the point being replaced, refined by circle
/// searches maximizing |l|.
GeometryStep geo_newuoa(const LagrangeFunction& lagr, const InterpolationSet& set, Index drop, const Vector& x_k,
                        double deltabar);

/// Better of the best line point through x_k and another interpolation point
/// and a bound-respecting Cauchy step. The result lies in [l, u].
GeometryStep geo_bobyqa(const LagrangeFunction& lagr, const InterpolationSet& set, Index drop, const Vector& x_k,
                        double deltabar, const Vector& lower, const Vector& upper);

struct LincoaGeometryOptions {
  double near_feasible = 1e-2;
  double min_ratio = 0.1;
  double active_factor = 0.2;
};

/// Line, gradient and projected-gradient candidates with the selection rule
/// of the linearly constrained solver.
GeometryStep geo_lincoa(const LagrangeFunction& lagr, const InterpolationSet& set, Index drop, const Vector& x_k,
                        double deltabar, const Matrix& A, const Vector& b, const LincoaGeometryOptions& opts = {});

}  // namespace dfo

#endif  // DFO_SUBPROBLEMS_HPP
