#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dfo/bench.hpp"

namespace dfo::bench {

namespace {

struct WatchdogTimeout : std::runtime_error {
  WatchdogTimeout() : std::runtime_error("watchdog expired") {}
};

struct CellOutcome {
  std::vector<double> true_values;
  bool timed_out = false;
  bool crashed = false;
};

CellOutcome run_cell(const BenchProblem& prob, const SolverFn& solver, const ObjectiveFn& perturbed,
                     Index budget, double watchdog) {
  CellOutcome out;
  out.true_values.reserve(static_cast<std::size_t>(budget) + 1);
  const auto start = std::chrono::steady_clock::now();
  const ObjectiveFn& f = prob.f;
  ObjectiveFn observed = [&](const Vector& x) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > watchdog) {
      out.timed_out = true;
      throw WatchdogTimeout();
    }
    const double v = perturbed(x);
    out.true_values.push_back(f(x));
    return v;
  };
  try {
    solver(observed, prob.x0, budget);
  } catch (const WatchdogTimeout&) {
    out.timed_out = true;
  } catch (const std::exception&) {
    out.crashed = !out.timed_out;
  }
  return out;
}

std::string level_dir(Mode mode, double level) {
  std::ostringstream os;
  os << (mode == Mode::Noise ? "sigma=" : "p=") << level;
  return os.str();
}

std::string tau_dir(double tau) {
  std::ostringstream os;
  os << "tau=" << tau;
  return os.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("runs must be positive");
  if (cfg.solvers.empty()) throw std::invalid_argument("no solvers given");
  for (double t : cfg.taus) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  }
  for (double l : cfg.levels) {
    if (!(l >= 0.0) || (cfg.mode == Mode::Nan && l > 1.0)) throw std::invalid_argument("bad noise or failure level");
  }
  std::vector<const BenchProblem*> probs;
  for (const BenchProblem& p : collection()) {
    if (cfg.problems.empty() || std::find(cfg.problems.begin(), cfg.problems.end(), p.name) != cfg.problems.end()) {
      probs.push_back(&p);
    }
  }
  if (probs.empty()) throw std::invalid_argument("no problems selected");
  std::vector<SolverFn> solvers;
  for (const std::string& s : cfg.solvers) solvers.push_back(make_solver(s));

  const std::size_t np = probs.size();
  const std::size_t ns = solvers.size();
  const std::size_t nr = static_cast<std::size_t>(cfg.runs);

  ExperimentResult res;
  for (const BenchProblem* p : probs) res.problems.push_back(p->name);

  // Noise-free reference runs enter every f* estimate.
  std::vector<double> clean_min(np, std::numeric_limits<double>::infinity());
  const SolverFn reference = make_solver("pdfo");
  for (std::size_t p = 0; p < np; ++p) {
    const Index budget = cfg.budget_mult * probs[p]->n;
    CellOutcome c = run_cell(*probs[p], reference, probs[p]->f, budget, cfg.watchdog_seconds);
    if (c.timed_out) ++res.timeouts;
    if (c.crashed) ++res.crashes;
    for (double v : c.true_values) {
      if (!std::isnan(v)) clean_min[p] = std::min(clean_min[p], v);
    }
  }

  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const double level = cfg.levels[li];
    // hist[r][p][s]
    std::vector<std::vector<std::vector<std::vector<double>>>> hist(
        nr, std::vector<std::vector<std::vector<double>>>(np, std::vector<std::vector<double>>(ns)));
    std::vector<double> fstar = clean_min;
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t p = 0; p < np; ++p) {
        const BenchProblem& prob = *probs[p];
        const Index budget = cfg.budget_mult * prob.n;
        for (std::size_t s = 0; s < ns; ++s) {
          const std::uint64_t cell = ((li * nr + r) * np + p) * ns + s;
          auto rng = std::make_shared<Rng>(mix_seed(cfg.seed, cell));
          const ObjectiveFn perturbed =
              cfg.mode == Mode::Noise ? noisy(prob.f, level, rng) : failing(prob.f, level, rng);
          CellOutcome c = run_cell(prob, solvers[s], perturbed, budget, cfg.watchdog_seconds);
          if (c.timed_out) ++res.timeouts;
          if (c.crashed) ++res.crashes;
          for (double v : c.true_values) {
            if (!std::isnan(v)) fstar[p] = std::min(fstar[p], v);
          }
          hist[r][p][s] = std::move(c.true_values);
        }
      }
    }
    if (li == 0) res.fstar = fstar;

    for (double tau : cfg.taus) {
      LevelResult lr;
      lr.level = level;
      lr.tau = tau;
      std::vector<ProfileData> per_run;
      for (std::size_t r = 0; r < nr; ++r) {
        std::vector<std::vector<double>> costs(ns, std::vector<double>(np));
        for (std::size_t p = 0; p < np; ++p) {
          const double f0 = probs[p]->f(probs[p]->x0);
          for (std::size_t s = 0; s < ns; ++s) {
            const double c = convergence_cost(hist[r][p][s], f0, fstar[p], tau);
            costs[s][p] = c;
            lr.rows.push_back(RunRow{probs[p]->name, cfg.solvers[s], static_cast<Index>(r), c});
          }
        }
        per_run.push_back(profile(costs, cfg.solvers, tau));
      }
      lr.profile = average(per_run);
      res.cells.push_back(std::move(lr));
    }
  }
  return res;
}

void write_runs_csv(std::ostream& os, const std::vector<RunRow>& rows) {
  os << "problem,solver,run,cost\n";
  os << std::setprecision(17);
  for (const RunRow& r : rows) {
    os << r.problem << ',' << r.solver << ',' << r.run << ',';
    if (std::isfinite(r.cost)) os << r.cost;
    else os << "inf";
    os << '\n';
  }
}

void write_outputs(const std::string& out_dir, const ExperimentConfig& cfg, const ExperimentResult& res, bool svg) {
  namespace fs = std::filesystem;
  for (const LevelResult& lr : res.cells) {
    const fs::path dir = fs::path(out_dir) / level_dir(cfg.mode, lr.level) / tau_dir(lr.tau);
    fs::create_directories(dir);
    {
      std::ofstream os(dir / "runs.csv");
      write_runs_csv(os, lr.rows);
    }
    {
      std::ofstream os(dir / "profile.csv");
      write_profile_csv(os, lr.profile);
    }
    if (svg) {
      std::ofstream os(dir / "profile.svg");
      write_profile_svg(os, lr.profile, level_dir(cfg.mode, lr.level) + ", " + tau_dir(lr.tau));
    }
  }
}

}  // namespace dfo::bench
