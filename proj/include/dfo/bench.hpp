#ifndef DFO_BENCH_HPP
#define DFO_BENCH_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dfo/types.hpp"

namespace dfo::bench {

struct BenchProblem {
  std::string name;
  Index n = 0;
  ObjectiveFn f;
  Vector x0;
  /// Known optimal value, when analytic.
  std::optional<double> fstar;
  /// Any of "convex", "nonconvex", "sum-of-squares".
  std::vector<std::string> tags;

  bool has_tag(const std::string& t) const;
};

/// Built-in unconstrained test set; identical on every call.
const std::vector<BenchProblem>& collection();

using Rng = std::mt19937_64;

/// x -> (1 + sigma R) f(x) with R ~ N(0, 1) drawn on every call.
/// sigma = 0 returns f(x) unchanged.
ObjectiveFn noisy(ObjectiveFn f, double sigma, std::shared_ptr<Rng> rng);

/// x -> NaN with probability p, f(x) otherwise. p = 0 returns f(x) unchanged.
ObjectiveFn failing(ObjectiveFn f, double p, std::shared_ptr<Rng> rng);

/// splitmix64 step; used to derive one independent seed per experiment cell.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t cell);

/// 1-based index of the first value with f0 - f_k >= (1 - tau)(f0 - fstar),
/// infinity when no value qualifies. NaN values never qualify.
double convergence_cost(std::span<const double> true_values, double f0, double fstar, double tau);

struct ProfileData {
  double tau = 0.0;
  Index runs = 1;
  std::vector<std::string> solvers;
  std::vector<double> alphas;
  /// proportion(s, a): fraction of problems solver s solves within 2^alphas[a]
  /// times the best cost on that problem.
  Matrix proportion;
  /// Fraction of problems each solver solves at all.
  Vector at_infinity;
  /// Problems no solver solved.
  std::vector<Index> all_failed;
};

/// Default abscissae: 0, 0.125, ..., 16.
std::vector<double> default_alphas();

/// costs[s][p]: cost of solver s on problem p (infinity for failure).
ProfileData profile(const std::vector<std::vector<double>>& costs, const std::vector<std::string>& solvers,
                    double tau, const std::vector<double>& alphas = default_alphas());

/// Pointwise mean of profiles sharing solvers and abscissae.
ProfileData average(std::span<const ProfileData> runs);

enum class FdVariant { CG, BFGS };

struct BaselineOptions {
  /// Forward-difference step; sqrt of the unit roundoff by default.
  double h = 1.4901161193847656e-08;
  Index max_evals = 1000;
  double gtol = 1e-5;
};

struct BaselineResult {
  Vector x;
  double fun = 0.0;
  Index neval = 0;
  Index iterations = 0;
};

/// Polak-Ribiere CG with restarts or BFGS on forward-difference gradients,
/// weak Wolfe line search. Every difference evaluation counts.
BaselineResult fd_minimize(FdVariant variant, const ObjectiveFn& f, const Vector& x0,
                           const BaselineOptions& opts = {});

/// A benchmark solver: minimizes f from x0 within `budget` evaluations.
using SolverFn = std::function<void(const ObjectiveFn& f, const Vector& x0, Index budget)>;

/// "pdfo" (automatic selection), "pdfo-nobarrier", "cobyla", "uobyqa",
/// "newuoa", "bobyqa", "lincoa", "bfgs", "cg". Throws std::invalid_argument.
SolverFn make_solver(const std::string& name);

enum class Mode { Noise, Nan };

struct ExperimentConfig {
  Mode mode = Mode::Noise;
  /// sigma values (noise) or failure probabilities (nan).
  std::vector<double> levels{0.0};
  std::vector<double> taus{1e-2};
  std::vector<std::string> solvers{"pdfo", "bfgs", "cg"};
  Index runs = 1;
  std::uint64_t seed = 0;
  Index budget_mult = 500;
  double watchdog_seconds = 60.0;
  /// Subset of the collection; all problems when empty.
  std::vector<std::string> problems;
};

struct RunRow {
  std::string problem;
  std::string solver;
  Index run = 0;
  double cost = 0.0;
};

struct LevelResult {
  double level = 0.0;
  double tau = 0.0;
  std::vector<RunRow> rows;
  ProfileData profile;
};

struct ExperimentResult {
  std::vector<LevelResult> cells;
  /// Problems whose runs hit the watchdog or threw.
  Index timeouts = 0;
  Index crashes = 0;
  std::vector<std::string> problems;
  std::vector<double> fstar;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// problem,solver,run,cost with 17 significant digits and "inf" for failures.
void write_runs_csv(std::ostream& os, const std::vector<RunRow>& rows);
/// tau,solver,alpha,proportion.
void write_profile_csv(std::ostream& os, const ProfileData& p);
void write_profile_svg(std::ostream& os, const ProfileData& p, const std::string& title);

/// Writes OUT/<sigma|p>=<level>/tau=<tau>/{runs,profile}.csv (and profile.svg).
void write_outputs(const std::string& out_dir, const ExperimentConfig& cfg, const ExperimentResult& res,
                   bool svg);

/// Entry point of the bench executable.
int run_cli(int argc, char** argv);

}  // namespace dfo::bench

#endif  // DFO_BENCH_HPP
