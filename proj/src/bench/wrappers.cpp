#include <cmath>
#include <limits>

#include "dfo/bench.hpp"

namespace dfo::bench {

ObjectiveFn noisy(ObjectiveFn f, double sigma, std::shared_ptr<Rng> rng) {
  if (sigma == 0.0) return f;
  return [f = std::move(f), sigma, rng = std::move(rng)](const Vector& x) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double r = normal(*rng);
    return (1.0 + sigma * r) * f(x);
  };
}

ObjectiveFn failing(ObjectiveFn f, double p, std::shared_ptr<Rng> rng) {
  if (p == 0.0) return f;
  return [f = std::move(f), p, rng = std::move(rng)](const Vector& x) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(*rng);
    if (u < p) return std::numeric_limits<double>::quiet_NaN();
    return f(x);
  };
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t cell) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (cell + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double convergence_cost(std::span<const double> true_values, double f0, double fstar, double tau) {
  const double target = (1.0 - tau) * (f0 - fstar);
  for (std::size_t k = 0; k < true_values.size(); ++k) {
    const double v = true_values[k];
    if (std::isnan(v)) continue;
    if (f0 - v >= target) return static_cast<double>(k + 1);
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace dfo::bench
