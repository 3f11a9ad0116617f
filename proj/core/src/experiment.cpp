#include "biot/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "biot/problems.hpp"

namespace biot {

Algorithm parse_algorithm(std::string_view name) {
  if (name == "coupled") return Algorithm::Coupled;
  if (name == "ts") return Algorithm::TimeStepping;
  if (name == "git") return Algorithm::GlobalInTime;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected coupled, ts or git)");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Coupled: return "coupled";
    case Algorithm::TimeStepping: return "ts";
    case Algorithm::GlobalInTime: return "git";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (problem != "example1" && problem != "barry-mercer" && problem != "mandel") {
    throw std::invalid_argument("unknown problem '" + problem +
                                "' (expected example1, barry-mercer or mandel)");
  }
  if (h_divisor < 0 || dt_divisor < 0 || steps < 0) {
    throw std::invalid_argument("--h, --dt and --steps must be positive");
  }
  if (dt_divisor > 0 && steps > 0) throw std::invalid_argument("give either --dt or --steps");
  if (max_iters < 1) throw std::invalid_argument("--max-iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  if (workers < 1) throw std::invalid_argument("--workers must be >= 1");
  if (oracle_mode && algorithm != Algorithm::TimeStepping) {
    throw std::invalid_argument("--oracle-mode applies to --algo ts only");
  }
}

int ExperimentConfig::subdivisions(const ProblemSpec& spec) const {
  return h_divisor > 0 ? h_divisor : spec.default_subdivisions;
}

TimeGrid ExperimentConfig::grid(const ProblemSpec& spec) const {
  if (steps > 0) return TimeGrid(spec.final_time, steps);
  if (dt_divisor > 0) {
    const double n = spec.final_time * dt_divisor;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * n) {
      throw std::invalid_argument("--dt " + std::to_string(dt_divisor) +
                                  " does not divide the final time; use --steps");
    }
    return TimeGrid(spec.final_time, static_cast<int>(rounded));
  }
  return TimeGrid(spec.final_time, spec.default_steps);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::vector<HistoryRow> history_rows(const std::vector<IterationRecord>& records) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<HistoryRow> rows;
  for (const auto& r : records) {
    if (r.iter == 0) continue;
    HistoryRow row{r.step, r.iter, nan, nan, nan, r.xi_change};
    if (r.relative) {
      row.re_u = r.relative->u_h1;
      row.re_xi = r.relative->xi_l2;
      row.re_p = r.relative->p_h1;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_rows(const std::filesystem::path& path, const std::vector<ErrorSample>& samples,
                std::vector<std::filesystem::path>* files = nullptr) {
  auto os = open_csv(path);
  if (samples.size() >= 2) {
    write_convergence_csv(os, convergence_table(samples));
  } else {
    std::vector<ErrorRow> rows;
    for (const auto& s : samples) rows.push_back({s.dt, s.h, s.err.u_h1, s.err.xi_l2, s.err.p_h1, {}, {}, {}});
    write_convergence_csv(os, rows);
  }
  if (files) files->push_back(path);
}

void write_history(const std::filesystem::path& path, const std::vector<IterationRecord>& records) {
  auto os = open_csv(path);
  write_history_csv(os, history_rows(records));
}

double mesh_size(const BiotSystem& system) {
  const Rectangle& d = system.problem().domain;
  return (d.x_max - d.x_min) / system.subdivisions();
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const int subdivisions = [&] {
    const ProblemSpec probe = problem_by_name(config.problem, 4);
    return config.subdivisions(probe);
  }();
  const BiotSystem system(problem_by_name(config.problem, subdivisions), subdivisions);
  const ProblemSpec& spec = system.problem();
  const TimeGrid grid = config.grid(spec);
  const std::string stem = config.problem + "_" + to_string(config.algorithm);
  std::filesystem::create_directories(config.out_dir);

  log << "problem " << spec.name << ", h = 1/" << subdivisions << ", N = " << grid.steps
      << ", dt = " << format_number(grid.dt()) << ", algorithm " << to_string(config.algorithm)
      << '\n';
  log << "dofs: u " << system.num_u() << ", xi " << system.num_p() << ", p " << system.num_p()
      << '\n';
  const State s0 = system.initial_state();
  if (spec.exact) {
    log << "initial displacement vs exact u(0), H1: "
        << format_number(norm_error(s0, *spec.exact, NormKind::UH1, system.mesh(),
                                    system.u_layout(), system.p_layout()))
        << '\n';
  }
  // The coupled run needs no Stokes factorization past the initial state.
  if (config.algorithm == Algorithm::Coupled) system.release_solvers();

  RunOutcome out;
  RunOptions opt;
  opt.control.max_iters = config.max_iters;
  opt.control.tol = config.tol;
  opt.workers = config.workers;
  opt.oracle_mode = config.oracle_mode;

  RunResult reference;
  if (config.algorithm == Algorithm::Coupled) {
    out.result = coupled_cn_run(system, grid, opt);
  } else {
    RunOptions ref_opt;
    ref_opt.keep_trajectory = true;
    reference = coupled_cn_run(system, grid, ref_opt);
    opt.reference = &reference.trajectory;
    out.result = config.algorithm == Algorithm::TimeStepping ? ts_decoupled_run(system, grid, opt)
                                                             : git_decoupled_run(system, grid, opt);
  }
  const RunReport& rep = out.result.report;

  if (spec.exact) {
    out.exact_error = exact_errors(out.result.final_state, *spec.exact, system.mesh(),
                                   system.u_layout(), system.p_layout());
    write_rows(config.out_dir / (stem + "_convergence.csv"),
               {{grid.dt(), mesh_size(system), *out.exact_error}}, &out.files);
    log << "errors at T: u H1 " << format_number(out.exact_error->u_h1) << ", xi L2 "
        << format_number(out.exact_error->xi_l2) << ", p H1 "
        << format_number(out.exact_error->p_h1) << '\n';
  }
  if (config.algorithm != Algorithm::Coupled) {
    const auto path = config.out_dir / (stem + "_history.csv");
    write_history(path, rep.history);
    out.files.push_back(path);
  }
  {
    const auto path = config.out_dir / (stem + "_timing.csv");
    auto os = open_csv(path);
    write_timing_csv(os, {{"factorization", rep.workers, system.factor_seconds()},
                          {"step_a", rep.workers, rep.step_a_seconds},
                          {"step_b", rep.workers, rep.step_b_seconds},
                          {"total", rep.workers, rep.total_seconds}});
    out.files.push_back(path);
  }
  if (!rep.converged) {
    log << "warning: " << rep.unconverged_steps << " step(s) stopped at max_iters = "
        << config.max_iters << " above tol = " << format_number(config.tol) << '\n';
    if (config.strict) out.exit_code = kExitUnconverged;
  }
  return out;
}

int run(const ExperimentConfig& config, std::ostream& log) {
  try {
    return run_experiment(config, log).exit_code;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SingularMatrixError& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

std::vector<ErrorSample> exact_error_study(const BiotSystem& system,
                                           const std::vector<int>& steps) {
  const ProblemSpec& spec = system.problem();
  if (!spec.exact) throw std::invalid_argument("exact_error_study: problem has no exact solution");
  (void)system.initial_state();
  system.release_solvers();
  std::vector<ErrorSample> out;
  for (int n : steps) {
    const TimeGrid grid(spec.final_time, n);
    const RunResult r = coupled_cn_run(system, grid);
    system.release_solvers();
    out.push_back({grid.dt(), mesh_size(system),
                   exact_errors(r.final_state, *spec.exact, system.mesh(), system.u_layout(),
                                system.p_layout())});
  }
  return out;
}

std::vector<ErrorSample> temporal_error_study(const BiotSystem& system,
                                              const std::vector<int>& steps,
                                              int reference_steps) {
  const double T = system.problem().final_time;
  (void)system.initial_state();
  system.release_solvers();
  const State ref = coupled_cn_run(system, TimeGrid(T, reference_steps)).final_state;
  system.release_solvers();
  std::vector<ErrorSample> out;
  for (int n : steps) {
    const TimeGrid grid(T, n);
    const State s = coupled_cn_run(system, grid).final_state;
    system.release_solvers();
    out.push_back({grid.dt(), mesh_size(system), state_errors(s, ref, system.norms())});
  }
  return out;
}

std::vector<IterationRecord> iteration_study(const BiotSystem& system, const TimeGrid& grid,
                                             Algorithm algorithm, int max_iters,
                                             const std::vector<State>& reference, int workers) {
  RunOptions opt;
  opt.control.max_iters = max_iters;
  opt.control.stop_on_tolerance = false;
  opt.reference = &reference;
  opt.workers = workers;
  std::vector<IterationRecord> out;
  if (algorithm == Algorithm::GlobalInTime) {
    for (auto& r : git_decoupled_run(system, grid, opt).report.history) {
      if (r.iter > 0) out.push_back(std::move(r));
    }
  } else if (algorithm == Algorithm::TimeStepping) {
    for (int i = 1; i <= max_iters; ++i) {
      opt.control.max_iters = i;
      auto history = ts_decoupled_run(system, grid, opt).report.history;
      out.push_back(std::move(history.back()));
    }
  } else {
    throw std::invalid_argument("iteration_study: needs a decoupled algorithm");
  }
  return out;
}

MandelStudy mandel_study(int subdivisions, int steps, int iterations, int workers) {
  const BiotSystem system(mandel_problem(), subdivisions);
  const ProblemSpec& spec = system.problem();
  const TimeGrid grid(spec.final_time, steps);
  RunOptions opt;
  opt.keep_trajectory = true;
  opt.control.max_iters = iterations;
  opt.control.stop_on_tolerance = false;
  opt.control.record_history = false;
  opt.workers = workers;
  const auto coupled = coupled_cn_run(system, grid, opt).trajectory;
  const auto ts = ts_decoupled_run(system, grid, opt).trajectory;
  const auto git = git_decoupled_run(system, grid, opt).trajectory;

  MandelStudy m;
  const Norms& norms = system.norms();
  double d_ts = 0.0, d_git = 0.0, size = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double t = grid.t(n);
    const auto probe = [&](const Vector& p) {
      return evaluate_p1(system.mesh(), system.p_layout(), p, m.probe);
    };
    m.times.push_back(t);
    m.p_coupled.push_back(probe(coupled[n].p));
    m.p_ts.push_back(probe(ts[n].p));
    m.p_git.push_back(probe(git[n].p));
    m.p_exact.push_back(spec.exact->p(m.probe.x, m.probe.y, t));
    d_ts += std::pow(norms.scalar_l2(ts[n].p - coupled[n].p), 2);
    d_git += std::pow(norms.scalar_l2(git[n].p - coupled[n].p), 2);
    size += std::pow(norms.scalar_l2(coupled[n].p), 2);
  }
  m.ts_rel_l2 = std::sqrt(d_ts / size);
  m.git_rel_l2 = std::sqrt(d_git / size);
  return m;
}

std::vector<SpeedupSample> speedup_study(const BiotSystem& system, const TimeGrid& grid,
                                         int iterations, const std::vector<int>& workers) {
  RunOptions opt;
  opt.control.max_iters = iterations;
  opt.control.stop_on_tolerance = false;
  opt.control.record_history = false;
  // Factor before timing.
  (void)system.stokes();
  (void)system.reaction_diffusion(grid.dt());
  std::vector<SpeedupSample> out;
  for (int w : workers) {
    opt.workers = w;
    const RunReport rep = git_decoupled_run(system, grid, opt).report;
    out.push_back({w, rep.step_a_seconds, rep.step_b_seconds,
                   rep.step_a_seconds + rep.step_b_seconds});
  }
  return out;
}

double amdahl_speedup(double step_a_seconds, double step_b_seconds, int workers) {
  if (workers < 1) throw std::invalid_argument("amdahl_speedup: workers must be >= 1");
  return (step_a_seconds + step_b_seconds) / (step_a_seconds + step_b_seconds / workers);
}

namespace {

void reproduce_table1(const ReproduceOptions& o, std::ostream& log) {
  const int h = o.desk ? 64 : 256;
  const BiotSystem system(example1_problem(), h);
  const std::vector<int> steps{2, 4, 8, 16};
  log << "table1: example1, h = 1/" << h << '\n';
  const auto exact = exact_error_study(system, steps);
  if (o.desk) {
    write_rows(o.out_dir / "table1_desk_exact.csv", exact);
    write_rows(o.out_dir / "table1_desk.csv", temporal_error_study(system, steps, 64));
  } else {
    write_rows(o.out_dir / "table1.csv", exact);
  }
}

void reproduce_fig2(const ReproduceOptions& o, std::ostream& log) {
  const int h = o.desk ? 64 : 256;
  const BiotSystem system(example1_problem(), h);
  const TimeGrid grid(1.0, 16);
  log << "fig2: example1, h = 1/" << h << ", N = 16\n";
  RunOptions ref_opt;
  ref_opt.keep_trajectory = true;
  const auto reference = coupled_cn_run(system, grid, ref_opt).trajectory;
  write_history(o.out_dir / "fig2_ts.csv",
                iteration_study(system, grid, Algorithm::TimeStepping, 12, reference));
  write_history(o.out_dir / "fig2_git.csv",
                iteration_study(system, grid, Algorithm::GlobalInTime, 12, reference,
                                o.workers.empty() ? 1 : o.workers.back()));
}

void reproduce_fig3(const ReproduceOptions& o, std::ostream& log) {
  const BiotSystem system(barry_mercer_problem(20), 20);
  for (int n : {16, 128}) {
    const TimeGrid grid(system.problem().final_time, n);
    log << "fig3: barry-mercer, h = 1/20, N = " << n << '\n';
    RunOptions ref_opt;
    ref_opt.keep_trajectory = true;
    const auto reference = coupled_cn_run(system, grid, ref_opt).trajectory;
    const std::string tag = "fig3_n" + std::to_string(n);
    write_history(o.out_dir / (tag + "_ts.csv"),
                  iteration_study(system, grid, Algorithm::TimeStepping, 30, reference));
    write_history(o.out_dir / (tag + "_git.csv"),
                  iteration_study(system, grid, Algorithm::GlobalInTime, 30, reference));
  }
}

void reproduce_mandel(const ReproduceOptions& o, std::ostream& log) {
  log << "mandel: h = 0.1, dt = 0.001, I = 5\n";
  const MandelStudy m = mandel_study(10, 1000, 5, o.workers.empty() ? 1 : o.workers.back());
  {
    auto os = open_csv(o.out_dir / "mandel_probe.csv");
    os << "t,p_coupled,p_ts,p_git,p_exact\n";
    for (std::size_t i = 0; i < m.times.size(); ++i) {
      os << format_number(m.times[i]) << ',' << format_number(m.p_coupled[i]) << ','
         << format_number(m.p_ts[i]) << ',' << format_number(m.p_git[i]) << ','
         << format_number(m.p_exact[i]) << '\n';
    }
  }
  auto os = open_csv(o.out_dir / "mandel_summary.csv");
  os << "algorithm,rel_l2_vs_coupled\n";
  os << "ts," << format_number(m.ts_rel_l2) << '\n';
  os << "git," << format_number(m.git_rel_l2) << '\n';
}

void reproduce_speedup(const ReproduceOptions& o, std::ostream& log) {
  const BiotSystem system(example1_problem(), 64);
  const TimeGrid grid(1.0, 64);
  log << "speedup: example1, h = 1/64, N = 64, 5 iterations\n";
  const auto samples = speedup_study(system, grid, 5, o.workers);
  std::vector<TimingRow> rows, detail;
  for (const auto& s : samples) {
    rows.push_back({"step_b", s.workers, s.step_b_seconds});
    detail.push_back({"step_a", s.workers, s.step_a_seconds});
    detail.push_back({"step_b", s.workers, s.step_b_seconds});
    detail.push_back({"total", s.workers, s.total_seconds});
    detail.push_back({"amdahl_prediction", s.workers,
                      amdahl_speedup(samples.front().step_a_seconds,
                                     samples.front().step_b_seconds, s.workers)});
  }
  auto os = open_csv(o.out_dir / "speedup.csv");
  write_timing_csv(os, rows);
  auto os2 = open_csv(o.out_dir / "speedup_detail.csv");
  write_timing_csv(os2, detail);
}

}  // namespace

int reproduce(std::string_view target, const ReproduceOptions& options, std::ostream& log) {
  try {
    for (int w : options.workers) {
      if (w < 1) throw std::invalid_argument("--workers entries must be >= 1");
    }
    std::filesystem::create_directories(options.out_dir);
    if (target == "table1") {
      reproduce_table1(options, log);
    } else if (target == "fig2") {
      reproduce_fig2(options, log);
    } else if (target == "fig3") {
      reproduce_fig3(options, log);
    } else if (target == "mandel") {
      reproduce_mandel(options, log);
    } else if (target == "speedup") {
      reproduce_speedup(options, log);
    } else {
      throw std::invalid_argument("unknown target '" + std::string(target) +
                                  "' (expected table1, fig2, fig3, mandel or speedup)");
    }
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SingularMatrixError& e) {
    log << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace biot
