#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biot/algorithms.hpp"
#include "biot/metrics.hpp"

namespace biot {

enum class Algorithm { Coupled, TimeStepping, GlobalInTime };

/// "coupled" | "ts" | "git". Throws std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);
std::string to_string(Algorithm a);

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitSolver = 2, kExitUnconverged = 3 };

/// One run of one algorithm. Divisor fields left at 0 take the problem defaults.
struct ExperimentConfig {
  std::string problem = "example1";
  Algorithm algorithm = Algorithm::Coupled;
  int h_divisor = 0;   // mesh spacing 1/h_divisor
  int dt_divisor = 0;  // dt = 1/dt_divisor; steps = T * dt_divisor
  int steps = 0;       // alternative to dt_divisor
  int max_iters = 30;
  double tol = 1e-8;
  int workers = 1;
  bool oracle_mode = false;
  bool strict = false;
  std::filesystem::path out_dir = ".";

  /// Throws std::invalid_argument for non-positive counts, unknown names or
  /// both dt_divisor and steps set.
  void validate() const;
  int subdivisions(const ProblemSpec& spec) const;
  /// Throws std::invalid_argument when T * dt_divisor is not an integer.
  TimeGrid grid(const ProblemSpec& spec) const;
};

struct RunOutcome {
  int exit_code = kExitOk;
  RunResult result;
  std::optional<ErrorTriple> exact_error;  // at the final time
  std::vector<std::filesystem::path> files;
};

/// Runs the configured algorithm and writes `<problem>_<algo>_*.csv` into
/// out_dir: convergence (problems with an exact solution), history (decoupled
/// algorithms, relative errors against a coupled run) and timing. Solver
/// exceptions propagate.
RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& log);

/// run_experiment mapped to exit codes: solver failures give kExitSolver,
/// unconverged iterations with `strict` give kExitUnconverged, bad
/// configurations give kExitUsage.
int run(const ExperimentConfig& config, std::ostream& log);

// --- studies shared by reproduce() and the acceptance checks ---------------

/// Coupled errors against the exact solution at T for each step count.
std::vector<ErrorSample> exact_error_study(const BiotSystem& system,
                                           const std::vector<int>& steps);

/// Coupled errors at T against the same-mesh coupled run with
/// `reference_steps`, which isolates the temporal error.
std::vector<ErrorSample> temporal_error_study(const BiotSystem& system,
                                              const std::vector<int>& steps, int reference_steps);

/// Iterates 1..max_iters of a decoupled algorithm against the coupled
/// trajectory `reference`; entry i-1 holds the errors at level N after i
/// iterations. The time-stepping algorithm needs one run per i because every
/// step uses i iterations.
std::vector<IterationRecord> iteration_study(const BiotSystem& system, const TimeGrid& grid,
                                             Algorithm algorithm, int max_iters,
                                             const std::vector<State>& reference,
                                             int workers = 1);

struct MandelStudy {
  Point probe{0.1, 0.5};
  std::vector<double> times;  // t_0..t_N
  std::vector<double> p_coupled, p_ts, p_git, p_exact;  // at the probe
  /// Space-time relative L2 pressure difference against the coupled run.
  double ts_rel_l2 = 0.0;
  double git_rel_l2 = 0.0;
};

MandelStudy mandel_study(int subdivisions, int steps, int iterations, int workers = 1);

struct SpeedupSample {
  int workers = 1;
  double step_a_seconds = 0.0;
  double step_b_seconds = 0.0;
  double total_seconds = 0.0;  // step a + step b
};

/// Global-in-time runs with a fixed iteration count for each worker count.
std::vector<SpeedupSample> speedup_study(const BiotSystem& system, const TimeGrid& grid,
                                         int iterations, const std::vector<int>& workers);

/// (T_p + T_b) / (T_p + T_b / workers) from serial phase times.
double amdahl_speedup(double step_a_seconds, double step_b_seconds, int workers);

struct ReproduceOptions {
  bool desk = false;
  std::vector<int> workers{1, 2, 4};
  std::filesystem::path out_dir = ".";
};

/// "table1" | "fig2" | "fig3" | "mandel" | "speedup". Writes the CSV bundle
/// and returns an exit code.
int reproduce(std::string_view target, const ReproduceOptions& options, std::ostream& log);

}  // namespace biot
