#ifndef DFO_MODELS_HPP
#define DFO_MODELS_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include "dfo/types.hpp"

namespace dfo {

/// Which interpolation system an InterpolationSet maintains.
///  - LinearFull:    n+1 points, linear interpolation.
///  - QuadraticFull: (n+1)(n+2)/2 points, fully determined quadratic.
///  - QuadraticKKT:  n+2 .. (n+1)(n+2)/2 points, least-Frobenius-norm
///                   quadratic through the KKT system of the minimum-change
///                   problem.
enum class ModelVariant { LinearFull, QuadraticFull, QuadraticKKT };

/// m(x) = c + g^T d + 0.5 d^T H d with d = x - base.
struct SurrogateModel {
  enum class Kind { Linear, Quadratic };

  Kind kind = Kind::Quadratic;
  double c = 0.0;
  Vector g;
  Matrix H;
  Vector base;

  static SurrogateModel zero(Index n, const Vector& base, Kind kind = Kind::Quadratic);

  Index dim() const { return g.size(); }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  bool all_finite() const;
};

struct ModelEvaluation {
  double value;
  Vector gradient;
};

ModelEvaluation evaluate(const SurrogateModel& model, const Vector& x);

/// Lagrange function of an interpolation set: 1 at its owner point, 0 at the
/// others (minimum Frobenius norm for the KKT variant).
struct LagrangeFunction : SurrogateModel {
  Index owner_index = 0;
};

/// Inverse of the interpolation (or KKT) coefficient matrix.
struct InverseSystem {
  ModelVariant variant = ModelVariant::QuadraticKKT;
  Matrix matrix;
  double last_denominator = 1.0;
};

/// Number of coefficients of a quadratic in n variables.
inline Index quadratic_dof(Index n) { return (n + 1) * (n + 2) / 2; }

/// Legal range of npt for a variant.
Index min_npt(ModelVariant v, Index n);
Index max_npt(ModelVariant v, Index n);

class InterpolationSet {
 public:
  InterpolationSet() = default;

  /// Builds the set from absolute point coordinates (one point per row) and
  /// factorizes the coefficient matrix. Throws BadNpt, DegenerateSet or
  /// SingularKKT.
  InterpolationSet(ModelVariant variant, Matrix points, Vector base);

  ModelVariant variant() const { return inverse_.variant; }
  Index npt() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }

  /// Absolute coordinates, one row per point.
  const Matrix& points() const { return points_; }
  Vector point(Index i) const { return points_.row(i).transpose(); }
  /// points minus base, one row per point.
  const Matrix& offsets() const { return offsets_; }
  const Vector& base() const { return base_; }

  const Vector& fvals() const { return fvals_; }
  Vector& fvals() { return fvals_; }
  /// Optional constraint values, one row per point.
  const Matrix& cvals() const { return cvals_; }
  Matrix& cvals() { return cvals_; }

  Index center_index() const { return center_; }
  void set_center(Index i) { center_ = i; }
  Vector center() const { return point(center_); }

  const InverseSystem& inverse() const { return inverse_; }

  /// Dense coefficient matrix assembled from the current points.
  Matrix assemble() const;
  /// max |W * W^{-1} - I| in the scaled coordinates used for factorization.
  double inverse_drift() const;
  /// Recomputes the inverse from scratch.
  void refactorize();

  /// Values l_j(x) of all Lagrange functions.
  Vector lagrange_values(const Vector& x) const;
  /// Update denominators if point j were replaced by x, for every j.
  Vector denominators(const Vector& x) const;

  /// Number of SMW updates since the last factorization.
  Index updates_since_factorization() const { return updates_; }

  /// When enabled (the default) smw_replace checks the inverse every npt
  /// updates and refactorizes once its drift exceeds 1e-4.
  void set_drift_monitoring(bool on) { monitor_drift_ = on; }

 private:
  friend double smw_replace(InterpolationSet&, Index, const Vector&, double, const Vector*, double);
  friend void shift_base(InterpolationSet&, std::span<SurrogateModel* const>, const Vector&);

  double scale() const;
  Vector kkt_column(const Vector& d) const;

  Matrix points_;
  Matrix offsets_;
  Vector base_;
  Vector fvals_;
  Matrix cvals_;
  Index center_ = 0;
  InverseSystem inverse_;
  Index updates_ = 0;
  bool monitor_drift_ = true;
};

/// Monomial basis of the fully determined quadratic:
/// [1, d_1..d_n, 0.5 d_i^2 (i == j), d_i d_j (i < j)].
Vector quadratic_basis(const Vector& d);

struct InitialSet {
  InterpolationSet set;
  /// Points to evaluate, one per row, in set order.
  Matrix points;
};

/// Initial geometry around x0:
///  LinearFull     x0, x0 + rho e_i.
///  QuadraticKKT   x0, x0 + rho e_i, x0 - rho e_i, then x0 + rho (e_i + e_j).
///  QuadraticFull  same pattern with all n(n-1)/2 pairs.
InitialSet init_set(const Vector& x0, double rho_beg, Index npt, ModelVariant variant);

/// Linear interpolant of `values` (defaults to the set's fvals).
SurrogateModel build_linear(const InterpolationSet& set);
SurrogateModel build_linear(const InterpolationSet& set, const Vector& values);

/// Fully determined quadratic interpolant.
SurrogateModel build_full_quadratic(const InterpolationSet& set);

/// Least-change quadratic: minimizes |hess(Q) - hess(prev)|_F subject to
/// Q(y) = f(y) on the set. Throws SingularKKT when the inverse is unusable
/// even after refactorization. The set is non-const because it may be
/// refactorized.
SurrogateModel update_underdetermined(const SurrogateModel& prev, InterpolationSet& set);

/// Lagrange function belonging to point j.
LagrangeFunction lagrange(const InterpolationSet& set, Index j);

/// Replaces point `drop` by xnew and updates the inverse with a rank-1
/// (full variants) or rank-2 (KKT) Sherman-Morrison-Woodbury step. Returns
/// the update denominator. Throws TinyDenominator or DegenerateSet (duplicate
/// point); the set is left unchanged on error.
double smw_replace(InterpolationSet& set, Index drop, const Vector& xnew, double fnew,
                   const Vector* cnew = nullptr, double delta = 1.0);

/// Moves the base point, re-expressing the given models about the new base
/// (values unchanged) and refreshing the inverse.
void shift_base(InterpolationSet& set, std::span<SurrogateModel* const> models, const Vector& new_base);
void shift_base(InterpolationSet& set, SurrogateModel& model, const Vector& new_base);

/// Re-expresses a model about another base point without changing its values.
SurrogateModel rebase(const SurrogateModel& model, const Vector& new_base);

/// Line-oriented dump with 17 significant digits:
///   npt <npt> dim <n> variant <v>
///   base <coords>
///   point <i> <coords> f <value>
///   model c <c>
///   model g <coords>
///   model H <row> <coords>
void dump(std::ostream& os, const InterpolationSet& set, const SurrogateModel& model);

}  // namespace dfo

#endif  // DFO_MODELS_HPP
