#ifndef DFO_TYPES_HPP
#define DFO_TYPES_HPP

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dfo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Objective callback. May return NaN or +/-inf.
using ObjectiveFn = std::function<double(const Vector&)>;
/// Vector-valued constraint callback.
using ConstraintFn = std::function<Vector(const Vector&)>;

class DfoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InvalidProblem : DfoError {
  using DfoError::DfoError;
};
struct InconsistentEqualities : DfoError {
  using DfoError::DfoError;
};
struct InfeasibleBounds : DfoError {
  using DfoError::DfoError;
};
struct BadNpt : DfoError {
  using DfoError::DfoError;
};
struct DegenerateSet : DfoError {
  using DfoError::DfoError;
};
struct SingularKKT : DfoError {
  using DfoError::DfoError;
};
struct TinyDenominator : DfoError {
  using DfoError::DfoError;
};
struct AllTinyDenominators : DfoError {
  using DfoError::DfoError;
};
struct DimensionTooSmall : DfoError {
  using DfoError::DfoError;
};

/// Raised when a user callback throws. Carries the original message.
struct CallbackPanic : DfoError {
  using DfoError::DfoError;
};

}  // namespace dfo

#endif  // DFO_TYPES_HPP
