#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "biot/experiment.hpp"

namespace {

int default_workers() {
  if (const char* env = std::getenv("BIOT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring BIOT_THREADS='" << env << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crank-Nicolson solvers for the three-field Biot consolidation model"};
  // -h is taken by the mesh spacing flag.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  biot::ExperimentConfig cfg;
  cfg.workers = default_workers();
  std::string algo = "coupled";
  auto* run = app.add_subcommand("run", "Run one algorithm on one problem");
  run->set_help_flag("--help", "Print this help message and exit");
  run->add_option("--problem", cfg.problem, "example1 | barry-mercer | mandel")
      ->check(CLI::IsMember({"example1", "barry-mercer", "mandel"}));
  run->add_option("--algo", algo, "coupled | ts | git")->check(CLI::IsMember({"coupled", "ts", "git"}));
  run->add_option("--h", cfg.h_divisor, "Mesh spacing divisor (--h 64 means h = 1/64)")
      ->check(CLI::PositiveNumber);
  auto* dt = run->add_option("--dt", cfg.dt_divisor, "Time step divisor (--dt 16 means dt = 1/16)")
                 ->check(CLI::PositiveNumber);
  run->add_option("--steps", cfg.steps, "Number of time steps")
      ->check(CLI::PositiveNumber)
      ->excludes(dt);
  run->add_option("--max-iters", cfg.max_iters, "Iteration cap of the decoupled algorithms")
      ->check(CLI::PositiveNumber);
  run->add_option("--tol", cfg.tol, "Relative L2 change of xi that stops the iteration")
      ->check(CLI::PositiveNumber);
  run->add_option("--workers", cfg.workers, "Threads for the parallel step of git (env BIOT_THREADS)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--oracle-mode", cfg.oracle_mode, "ts: start each step from the coupled solution");
  run->add_flag("--strict", cfg.strict, "Exit 3 when an iteration stops at --max-iters");
  run->add_option("--out-dir", cfg.out_dir, "Directory for the CSV files");

  biot::ReproduceOptions rep;
  rep.workers = {1, 2, 4};
  std::string target;
  auto* repro = app.add_subcommand("reproduce", "Run a full experiment sweep");
  repro->set_help_flag("--help", "Print this help message and exit");
  repro->add_option("target", target, "table1 | fig2 | fig3 | mandel | speedup")
      ->required()
      ->check(CLI::IsMember({"table1", "fig2", "fig3", "mandel", "speedup"}));
  repro->add_flag("--desk", rep.desk, "Desk-scale mesh h = 1/64 for table1 and fig2");
  repro->add_option("--workers", rep.workers, "Worker counts, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  repro->add_option("--out-dir", rep.out_dir, "Directory for the CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return biot::kExitUsage;
  }

  if (*run) {
    cfg.algorithm = biot::parse_algorithm(algo);
    return biot::run(cfg, std::cout);
  }
  return biot::reproduce(target, rep, std::cout);
}
