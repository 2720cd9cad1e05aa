#include <exception>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dfo/bench.hpp"

namespace dfo::bench {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_collection() {
  std::cout << std::setprecision(17);
  std::cout << "name,n,fstar,tags\n";
  for (const BenchProblem& p : collection()) {
    std::cout << p.name << ',' << p.n << ',';
    if (p.fstar) std::cout << *p.fstar;
    std::cout << ',';
    for (std::size_t i = 0; i < p.tags.size(); ++i) std::cout << (i ? ";" : "") << p.tags[i];
    std::cout << '\n';
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Derivative-free solver benchmark"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::vector<double> taus;
  std::string solvers;
  std::string problems;
  std::string out_dir = "bench_out";
  std::string plot = "none";
  Index runs = 1;
  std::uint64_t seed = 0;
  Index budget_mult = 500;
  double watchdog = 60.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tau", taus, "Convergence tolerance (repeatable)")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--solvers", solvers, "Comma-separated solver names");
    sub->add_option("--runs", runs, "Independent runs per cell")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--budget-mult", budget_mult, "Evaluations per dimension")->check(CLI::PositiveNumber);
    sub->add_option("--plot", plot, "Plot format")->check(CLI::IsMember({"none", "svg"}));
    sub->add_option("--problems", problems, "Comma-separated subset of the collection");
    sub->add_option("--watchdog", watchdog, "Seconds allowed per run")->check(CLI::PositiveNumber);
  };

  std::vector<double> sigmas;
  std::vector<double> ps;
  CLI::App* noise = app.add_subcommand("noise", "Multiplicative Gaussian noise experiment");
  noise->add_option("--sigma", sigmas, "Noise level (repeatable)")->check(CLI::NonNegativeNumber);
  add_common(noise);
  CLI::App* nan = app.add_subcommand("nan", "Random evaluation failure experiment");
  nan->add_option("--p", ps, "Failure probability (repeatable)")->check(CLI::Range(0.0, 1.0));
  add_common(nan);
  app.add_subcommand("list", "Print the problem collection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (app.got_subcommand("list")) {
    print_collection();
    return 0;
  }

  const bool is_noise = app.got_subcommand("noise");
  cfg.mode = is_noise ? Mode::Noise : Mode::Nan;
  if (is_noise) cfg.levels = sigmas.empty() ? std::vector<double>{0.0} : sigmas;
  else cfg.levels = ps.empty() ? std::vector<double>{0.05} : ps;
  if (!taus.empty()) cfg.taus = taus;
  if (!solvers.empty()) cfg.solvers = split_list(solvers);
  else if (!is_noise) cfg.solvers = {"pdfo", "pdfo-nobarrier"};
  cfg.problems = split_list(problems);
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.budget_mult = budget_mult;
  cfg.watchdog_seconds = watchdog;

  try {
    const ExperimentResult res = run_experiment(cfg);
    write_outputs(out_dir, cfg, res, plot == "svg");
    std::cout << std::setprecision(6);
    for (const LevelResult& lr : res.cells) {
      std::cout << (is_noise ? "sigma=" : "p=") << lr.level << " tau=" << lr.tau;
      for (std::size_t s = 0; s < lr.profile.solvers.size(); ++s) {
        std::cout << ' ' << lr.profile.solvers[s] << '=' << lr.profile.at_infinity[static_cast<Index>(s)];
      }
      std::cout << '\n';
    }
    if (res.timeouts > 0 || res.crashes > 0) {
      std::cerr << "bench: " << res.timeouts << " runs timed out, " << res.crashes << " runs crashed\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dfo::bench
