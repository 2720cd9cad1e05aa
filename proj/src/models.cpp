#include "dfo/models.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>

namespace dfo {

namespace {

constexpr double kDriftLimit = 1e-4;
constexpr double kRcondFloor = 1e-14;

Index coefficient_count(ModelVariant v, Index n) {
  return v == ModelVariant::LinearFull ? n + 1 : quadratic_dof(n);
}

Vector linear_basis(const Vector& d) {
  Vector phi(d.size() + 1);
  phi[0] = 1.0;
  phi.tail(d.size()) = d;
  return phi;
}

Vector basis_for(ModelVariant v, const Vector& d) {
  return v == ModelVariant::LinearFull ? linear_basis(d) : quadratic_basis(d);
}

// Polynomial degree of each coefficient of the full variants.
int coefficient_degree(Index k, Index n) { return k == 0 ? 0 : (k <= n ? 1 : 2); }

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::LinearFull: return "linear";
    case ModelVariant::QuadraticFull: return "quadratic";
    case ModelVariant::QuadraticKKT: return "kkt";
  }
  return "?";
}

SurrogateModel decode_full(const Vector& theta, Index n, const Vector& base, ModelVariant v) {
  SurrogateModel m = SurrogateModel::zero(n, base,
                                          v == ModelVariant::LinearFull ? SurrogateModel::Kind::Linear
                                                                        : SurrogateModel::Kind::Quadratic);
  m.c = theta[0];
  m.g = theta.segment(1, n);
  if (v == ModelVariant::QuadraticFull) {
    Index k = n + 1;
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i <= j; ++i, ++k) {
        m.H(i, j) = theta[k];
        m.H(j, i) = theta[k];
      }
    }
  }
  return m;
}

// Model with coefficients (lambda, c, g) of the KKT system.
SurrogateModel decode_kkt(const Vector& sol, const Matrix& offsets, const Vector& base) {
  const Index npt = offsets.rows();
  const Index n = offsets.cols();
  SurrogateModel m = SurrogateModel::zero(n, base);
  m.c = sol[npt];
  m.g = sol.tail(n);
  m.H = offsets.transpose() * sol.head(npt).asDiagonal() * offsets;
  m.H = 0.5 * (m.H + m.H.transpose()).eval();
  return m;
}

}  // namespace

SurrogateModel SurrogateModel::zero(Index n, const Vector& base, Kind kind) {
  SurrogateModel m;
  m.kind = kind;
  m.c = 0.0;
  m.g = Vector::Zero(n);
  m.H = Matrix::Zero(n, n);
  m.base = base;
  return m;
}

double SurrogateModel::value(const Vector& x) const {
  const Vector d = x - base;
  return c + g.dot(d) + 0.5 * d.dot(H * d);
}

Vector SurrogateModel::gradient(const Vector& x) const { return g + H * (x - base); }

bool SurrogateModel::all_finite() const {
  return std::isfinite(c) && g.allFinite() && H.allFinite() && base.allFinite();
}

ModelEvaluation evaluate(const SurrogateModel& model, const Vector& x) {
  const Vector d = x - model.base;
  const Vector Hd = model.H * d;
  return {model.c + model.g.dot(d) + 0.5 * d.dot(Hd), model.g + Hd};
}

Index min_npt(ModelVariant v, Index n) {
  switch (v) {
    case ModelVariant::LinearFull: return n + 1;
    case ModelVariant::QuadraticFull: return quadratic_dof(n);
    case ModelVariant::QuadraticKKT: return n + 2;
  }
  return 0;
}

Index max_npt(ModelVariant v, Index n) {
  return v == ModelVariant::LinearFull ? n + 1 : quadratic_dof(n);
}

Vector quadratic_basis(const Vector& d) {
  const Index n = d.size();
  Vector phi(quadratic_dof(n));
  phi[0] = 1.0;
  phi.segment(1, n) = d;
  Index k = n + 1;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i, ++k) phi[k] = (i == j) ? 0.5 * d[i] * d[i] : d[i] * d[j];
  }
  return phi;
}

InterpolationSet::InterpolationSet(ModelVariant variant, Matrix points, Vector base)
    : points_(std::move(points)), base_(std::move(base)) {
  const Index n = points_.cols();
  const Index npt = points_.rows();
  if (n < 1) throw BadNpt("interpolation set needs at least one variable");
  if (base_.size() != n) throw BadNpt("base point has the wrong dimension");
  if (npt < min_npt(variant, n) || npt > max_npt(variant, n)) {
    throw BadNpt("npt = " + std::to_string(npt) + " is outside the legal range [" +
                 std::to_string(min_npt(variant, n)) + ", " + std::to_string(max_npt(variant, n)) + "]");
  }
  inverse_.variant = variant;
  offsets_ = points_.rowwise() - base_.transpose();
  fvals_ = Vector::Constant(npt, std::numeric_limits<double>::quiet_NaN());
  refactorize();
}

double InterpolationSet::scale() const {
  const double s = offsets_.rowwise().norm().maxCoeff();
  return s > 0.0 && std::isfinite(s) ? s : 1.0;
}

Vector InterpolationSet::kkt_column(const Vector& d) const {
  const Index npt = this->npt();
  const Index n = dim();
  Vector w(npt + n + 1);
  const Vector dots = offsets_ * d;
  w.head(npt) = 0.5 * dots.array().square();
  w[npt] = 1.0;
  w.tail(n) = d;
  return w;
}

namespace {

Matrix assemble_from(ModelVariant v, const Matrix& offsets) {
  const Index npt = offsets.rows();
  const Index n = offsets.cols();
  if (v == ModelVariant::QuadraticKKT) {
    const Index N = npt + n + 1;
    Matrix W = Matrix::Zero(N, N);
    const Matrix G = offsets * offsets.transpose();
    W.topLeftCorner(npt, npt) = 0.5 * G.array().square().matrix();
    W.block(0, npt, npt, 1).setOnes();
    W.block(npt, 0, 1, npt).setOnes();
    W.block(0, npt + 1, npt, n) = offsets;
    W.block(npt + 1, 0, n, npt) = offsets.transpose();
    return W;
  }
  const Index q = coefficient_count(v, n);
  Matrix W(npt, q);
  for (Index i = 0; i < npt; ++i) W.row(i) = basis_for(v, offsets.row(i).transpose()).transpose();
  return W;
}

// Diagonal scaling for which the assembled matrix of offsets/s is
// D-equivalent to the one of the raw offsets.
//  full: W = Wt * diag(dcol)
//  KKT:  W = diag(dk) * Wt * diag(dk)
Vector scaling_vector(ModelVariant v, Index npt, Index n, double s) {
  if (v == ModelVariant::QuadraticKKT) {
    Vector dk(npt + n + 1);
    dk.head(npt).setConstant(s * s);
    dk[npt] = 1.0 / (s * s);
    dk.tail(n).setConstant(1.0 / s);
    return dk;
  }
  const Index q = coefficient_count(v, n);
  Vector dcol(q);
  for (Index k = 0; k < q; ++k) dcol[k] = std::pow(s, coefficient_degree(k, n));
  return dcol;
}

}  // namespace

Matrix InterpolationSet::assemble() const { return assemble_from(variant(), offsets_); }

void InterpolationSet::refactorize() {
  const ModelVariant v = variant();
  const double s = scale();
  const Matrix Wt = assemble_from(v, offsets_ / s);
  Eigen::PartialPivLU<Matrix> lu(Wt);
  const double rc = lu.rcond();
  if (!(rc > kRcondFloor)) {
    if (v == ModelVariant::QuadraticKKT) throw SingularKKT("KKT matrix of the interpolation set is singular");
    throw DegenerateSet("interpolation matrix is numerically singular");
  }
  Matrix inv = lu.inverse();
  const Vector dv = scaling_vector(v, npt(), dim(), s);
  if (v == ModelVariant::QuadraticKKT) {
    inv = dv.cwiseInverse().asDiagonal() * inv * dv.cwiseInverse().asDiagonal();
  } else {
    inv = dv.cwiseInverse().asDiagonal() * inv;
  }
  if (!inv.allFinite()) {
    if (v == ModelVariant::QuadraticKKT) throw SingularKKT("KKT inverse is not finite");
    throw DegenerateSet("interpolation inverse is not finite");
  }
  inverse_.matrix = std::move(inv);
  updates_ = 0;
}

double InterpolationSet::inverse_drift() const {
  const ModelVariant v = variant();
  const double s = scale();
  const Matrix Wt = assemble_from(v, offsets_ / s);
  const Vector dv = scaling_vector(v, npt(), dim(), s);
  Matrix Ht;
  if (v == ModelVariant::QuadraticKKT) {
    Ht = dv.asDiagonal() * inverse_.matrix * dv.asDiagonal();
  } else {
    Ht = dv.asDiagonal() * inverse_.matrix;
  }
  const Matrix R = Wt * Ht - Matrix::Identity(Wt.rows(), Wt.cols());
  return R.cwiseAbs().maxCoeff();
}

Vector InterpolationSet::lagrange_values(const Vector& x) const {
  const Vector d = x - base_;
  if (variant() == ModelVariant::QuadraticKKT) {
    return (inverse_.matrix.topRows(npt()) * kkt_column(d));
  }
  return inverse_.matrix.transpose() * basis_for(variant(), d);
}

Vector InterpolationSet::denominators(const Vector& x) const {
  const Vector d = x - base_;
  if (variant() != ModelVariant::QuadraticKKT) {
    return inverse_.matrix.transpose() * basis_for(variant(), d);
  }
  const Index npt = this->npt();
  const Vector w = kkt_column(d);
  const Vector Hw = inverse_.matrix * w;
  const double dd = d.squaredNorm();
  const double beta = 0.5 * dd * dd - w.dot(Hw);
  Vector den(npt);
  for (Index j = 0; j < npt; ++j) {
    den[j] = inverse_.matrix(j, j) * beta + Hw[j] * Hw[j];
  }
  return den;
}

InitialSet init_set(const Vector& x0, double rho_beg, Index npt, ModelVariant variant) {
  const Index n = x0.size();
  if (n < 1) throw BadNpt("dimension must be positive");
  if (!(rho_beg > 0.0)) throw BadNpt("rho_beg must be positive");
  if (npt < min_npt(variant, n) || npt > max_npt(variant, n)) {
    throw BadNpt("npt = " + std::to_string(npt) + " is outside the legal range [" +
                 std::to_string(min_npt(variant, n)) + ", " + std::to_string(max_npt(variant, n)) + "]");
  }
  Matrix pts = x0.transpose().replicate(npt, 1);
  Index k = 1;
  for (Index i = 0; i < n && k < npt; ++i, ++k) pts(k, i) += rho_beg;
  for (Index i = 0; i < n && k < npt; ++i, ++k) pts(k, i) -= rho_beg;
  for (Index gap = 1; gap <= n / 2 && k < npt; ++gap) {
    for (Index i = 0; i < n && k < npt; ++i) {
      if (2 * gap == n && i >= n / 2) break;
      const Index j = (i + gap) % n;
      pts(k, i) += rho_beg;
      pts(k, j) += rho_beg;
      ++k;
    }
  }
  InitialSet out{InterpolationSet(variant, pts, x0), pts};
  return out;
}

SurrogateModel build_linear(const InterpolationSet& set) { return build_linear(set, set.fvals()); }

SurrogateModel build_linear(const InterpolationSet& set, const Vector& values) {
  if (set.variant() != ModelVariant::LinearFull) throw BadNpt("build_linear needs a linear interpolation set");
  const Vector theta = set.inverse().matrix * values;
  if (!theta.allFinite()) throw DegenerateSet("linear model has non-finite coefficients");
  return decode_full(theta, set.dim(), set.base(), ModelVariant::LinearFull);
}

SurrogateModel build_full_quadratic(const InterpolationSet& set) {
  if (set.variant() != ModelVariant::QuadraticFull) {
    throw BadNpt("build_full_quadratic needs a fully determined quadratic set");
  }
  const Vector theta = set.inverse().matrix * set.fvals();
  if (!theta.allFinite()) throw DegenerateSet("quadratic model has non-finite coefficients");
  return decode_full(theta, set.dim(), set.base(), ModelVariant::QuadraticFull);
}

SurrogateModel rebase(const SurrogateModel& model, const Vector& new_base) {
  SurrogateModel m = model;
  const Vector s = new_base - model.base;
  const Vector Hs = model.H * s;
  m.c = model.c + model.g.dot(s) + 0.5 * s.dot(Hs);
  m.g = model.g + Hs;
  m.base = new_base;
  return m;
}

SurrogateModel update_underdetermined(const SurrogateModel& prev, InterpolationSet& set) {
  if (set.variant() != ModelVariant::QuadraticKKT) {
    throw BadNpt("update_underdetermined needs a KKT interpolation set");
  }
  const Index npt = set.npt();
  const SurrogateModel p = (prev.base.size() == set.dim() && prev.base != set.base()) ? rebase(prev, set.base())
                                                                                        : prev;
  auto correct = [&](const SurrogateModel& from) {
    Vector r(npt);
    for (Index i = 0; i < npt; ++i) r[i] = set.fvals()[i] - from.value(set.point(i));
    const Vector sol = set.inverse().matrix.leftCols(npt) * r;
    SurrogateModel q = decode_kkt(sol, set.offsets(), set.base());
    q.c += from.c;
    q.g += from.g;
    q.H += from.H;
    return q;
  };
  // One refinement pass removes the residual left by an updated inverse.
  auto attempt = [&]() { return correct(correct(p)); };
  SurrogateModel q = attempt();
  if (!q.all_finite()) {
    set.refactorize();
    q = attempt();
    if (!q.all_finite()) throw SingularKKT("least-change model is not finite");
  }
  return q;
}

LagrangeFunction lagrange(const InterpolationSet& set, Index j) {
  LagrangeFunction out;
  if (set.variant() == ModelVariant::QuadraticKKT) {
    static_cast<SurrogateModel&>(out) = decode_kkt(set.inverse().matrix.col(j), set.offsets(), set.base());
  } else {
    const Vector theta = set.inverse().matrix.col(j);
    static_cast<SurrogateModel&>(out) = decode_full(theta, set.dim(), set.base(), set.variant());
  }
  out.owner_index = j;
  if (!out.all_finite()) {
    if (set.variant() == ModelVariant::QuadraticKKT) throw SingularKKT("Lagrange function is not finite");
    throw DegenerateSet("Lagrange function is not finite");
  }
  return out;
}

double smw_replace(InterpolationSet& set, Index drop, const Vector& xnew, double fnew, const Vector* cnew,
                   double delta) {
  const Index npt = set.npt();
  if (drop < 0 || drop >= npt) throw BadNpt("drop index out of range");
  const double dup_tol = 1e-14 * (delta > 0.0 ? delta : 1.0);
  for (Index i = 0; i < npt; ++i) {
    if (i != drop && (set.points_.row(i).transpose() - xnew).norm() < dup_tol) {
      throw DegenerateSet("candidate point duplicates a retained interpolation point");
    }
  }
  const double threshold = 1e-12 * std::max(1.0, std::abs(set.inverse_.last_denominator));
  const Vector d = xnew - set.base_;
  Matrix& H = set.inverse_.matrix;
  double sigma = 0.0;

  if (set.variant() == ModelVariant::QuadraticKKT) {
    const Vector w = set.kkt_column(d);
    const Vector Hw = H * w;
    const double alpha = H(drop, drop);
    const double tau = Hw[drop];
    const double dd = d.squaredNorm();
    const double beta = 0.5 * dd * dd - w.dot(Hw);
    sigma = alpha * beta + tau * tau;
    if (!std::isfinite(sigma) || std::abs(sigma) < threshold) {
      throw TinyDenominator("update denominator " + std::to_string(sigma) + " is too small");
    }
    Vector v = -Hw;
    v[drop] += 1.0;
    const Vector h = H.col(drop);
    H.noalias() += (alpha / sigma) * v * v.transpose();
    H.noalias() -= (beta / sigma) * h * h.transpose();
    H.noalias() += (tau / sigma) * (h * v.transpose() + v * h.transpose());
  } else {
    const Vector ell = H.transpose() * basis_for(set.variant(), d);
    sigma = ell[drop];
    if (!std::isfinite(sigma) || std::abs(sigma) < threshold) {
      throw TinyDenominator("update denominator " + std::to_string(sigma) + " is too small");
    }
    Vector u = ell;
    u[drop] -= 1.0;
    const Vector col = H.col(drop);
    H.noalias() -= (1.0 / sigma) * col * u.transpose();
  }

  set.inverse_.last_denominator = sigma;
  set.points_.row(drop) = xnew.transpose();
  set.offsets_.row(drop) = d.transpose();
  set.fvals_[drop] = fnew;
  if (cnew != nullptr && set.cvals_.rows() == npt) set.cvals_.row(drop) = cnew->transpose();
  ++set.updates_;
  if (set.monitor_drift_ && set.updates_ % npt == 0) {
    const Index kept = set.updates_;
    if (!H.allFinite() || set.inverse_drift() > kDriftLimit) {
      set.refactorize();
    } else {
      set.updates_ = kept;
    }
  }
  return sigma;
}

void shift_base(InterpolationSet& set, std::span<SurrogateModel* const> models, const Vector& new_base) {
  for (SurrogateModel* m : models) {
    if (m != nullptr) *m = rebase(*m, new_base);
  }
  set.base_ = new_base;
  set.offsets_ = set.points_.rowwise() - new_base.transpose();
  set.refactorize();
}

void shift_base(InterpolationSet& set, SurrogateModel& model, const Vector& new_base) {
  SurrogateModel* ptr = &model;
  shift_base(set, std::span<SurrogateModel* const>(&ptr, 1), new_base);
}

void dump(std::ostream& os, const InterpolationSet& set, const SurrogateModel& model) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  os << "npt " << set.npt() << " dim " << set.dim() << " variant " << variant_name(set.variant()) << '\n';
  os << "base";
  for (Index k = 0; k < set.dim(); ++k) os << ' ' << set.base()[k];
  os << '\n';
  for (Index i = 0; i < set.npt(); ++i) {
    os << "point " << i;
    for (Index k = 0; k < set.dim(); ++k) os << ' ' << set.points()(i, k);
    os << " f " << set.fvals()[i] << '\n';
  }
  os << "model c " << model.c << '\n';
  os << "model g";
  for (Index k = 0; k < model.g.size(); ++k) os << ' ' << model.g[k];
  os << '\n';
  for (Index r = 0; r < model.H.rows(); ++r) {
    os << "model H " << r;
    for (Index k = 0; k < model.H.cols(); ++k) os << ' ' << model.H(r, k);
    os << '\n';
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace dfo
