#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "dfo/drivers.hpp"

namespace dfo {

const char* to_string(SolverId id) {
  switch (id) {
    case SolverId::Cobyla: return "cobyla";
    case SolverId::Uobyqa: return "uobyqa";
    case SolverId::Newuoa: return "newuoa";
    case SolverId::Bobyqa: return "bobyqa";
    case SolverId::Lincoa: return "lincoa";
  }
  return "?";
}

std::optional<SolverId> parse_solver(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (SolverId id : {SolverId::Cobyla, SolverId::Uobyqa, SolverId::Newuoa, SolverId::Bobyqa, SolverId::Lincoa}) {
    if (s == to_string(id)) return id;
  }
  return std::nullopt;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::RhoEndReached: return "rho_end_reached";
    case SolveStatus::MaxEvals: return "max_evals";
    case SolveStatus::TargetReached: return "target_reached";
    case SolveStatus::CallbackError: return "callback_error";
    case SolveStatus::ModelBreakdown: return "model_breakdown";
  }
  return "?";
}

std::string format_trace(const TraceEntry& e) {
  std::ostringstream os;
  os.precision(17);
  os << "iter " << e.iteration << " neval " << e.neval << " delta " << e.delta << " rho " << e.rho << " best_f "
     << e.best_f << " merit " << e.merit;
  return os.str();
}

void update_radius(TrustRegionState& state, double ratio) {
  const double rho = state.rho;
  double delta = state.delta;
  if (!(ratio >= 0.1)) {
    delta = std::max(rho, 0.5 * delta);
  } else if (ratio > 0.7) {
    const double cap = 10.0 * rho * std::ceil(delta / (10.0 * rho));
    delta = std::max(rho, std::min(2.0 * delta, cap));
  }
  state.delta = std::max(delta, rho);
}

double next_rho(double rho, double rho_end) {
  if (rho <= 16.0 * rho_end) return rho_end;
  if (rho <= 250.0 * rho_end) return std::sqrt(rho * rho_end);
  return 0.1 * rho;
}

Index select_drop_tr(const InterpolationSet& set, const Vector& trial, const TrustRegionState& state) {
  const Vector den = set.denominators(trial);
  const double threshold = 1e-12 * std::max(1.0, std::abs(set.inverse().last_denominator));
  const double p = set.variant() == ModelVariant::QuadraticKKT ? 6.0 : 3.0;
  const double r = std::max(state.delta, state.rho);
  Index best = -1;
  double best_w = -1.0;
  for (Index j = 0; j < set.npt(); ++j) {
    if (j == set.center_index()) continue;
    const double a = std::abs(den[j]);
    if (!(a >= threshold) || !std::isfinite(a)) continue;
    const double dist = (set.point(j) - state.x_k).norm();
    const double w = a * std::max(1.0, std::pow(dist / r, p));
    if (w > best_w) {
      best_w = w;
      best = j;
    }
  }
  if (best < 0) throw AllTinyDenominators("every replacement denominator is too small");
  return best;
}

bool BestTracker::offer(const Vector& x, double raw, double merit) {
  if (std::isnan(merit)) return false;
  bool better = !has_ || merit < merit_;
  if (!better && merit == merit_ && std::isfinite(raw) && (!std::isfinite(raw_) || raw < raw_)) better = true;
  if (!better) return false;
  has_ = true;
  x_ = x;
  raw_ = raw;
  merit_ = merit;
  return true;
}

}  // namespace dfo
