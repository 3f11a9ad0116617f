#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "biot/algorithms.hpp"

namespace biot {
namespace {

RunOptions fixed_iterations(int iters, const std::vector<State>* reference = nullptr) {
  RunOptions o;
  o.control.max_iters = iters;
  o.control.stop_on_tolerance = false;
  o.reference = reference;
  return o;
}

std::vector<State> coupled_trajectory(const BiotSystem& sys, const TimeGrid& grid) {
  RunOptions o;
  o.keep_trajectory = true;
  return coupled_cn_run(sys, grid, o).trajectory;
}

double rel_diff(const Vector& a, const Vector& b) {
  const double s = b.lpNorm<Eigen::Infinity>();
  return (a - b).lpNorm<Eigen::Infinity>() / (s > 0.0 ? s : 1.0);
}

double max_rel_diff(const State& a, const State& b) {
  return std::max({rel_diff(a.u, b.u), rel_diff(a.xi, b.xi), rel_diff(a.p, b.p)});
}

// Unsymmetrized averaged system with Dirichlet rows replaced by identity rows:
//   A1 u - B^T xi = F,  B u + A2 xi - C p = 0,
//   -C^T xi + (A3 + dt/2 D) p = (A3 - dt/2 D) p' - C^T xi' + dt/2 (G + G').
struct ReferenceCn {
  Factorization lu;
  Vector scale;  // Jacobi scaling; the Mandel blocks span 20 orders of magnitude
};

State reference_cn_step(const BiotSystem& sys, const ReferenceCn& ref, const State& prev,
                        double dt, double t) {
  const auto nu = static_cast<Eigen::Index>(sys.num_u());
  const auto np = static_cast<Eigen::Index>(sys.num_p());
  Vector rhs(nu + 2 * np);
  rhs.head(nu) = sys.force(t);
  rhs.segment(nu, np).setZero();
  const SparseMatrix expl = add(sys.a3(), 1.0, sys.d(), -0.5 * dt);
  rhs.tail(np) = expl * prev.p - sys.ct() * prev.xi +
                 0.5 * dt * (sys.source(t) + sys.source(t - dt));
  const auto ud = sys.u_constraints().dofs();
  const Vector uv = sys.u_constraints().values(t);
  for (std::size_t k = 0; k < ud.size(); ++k) rhs[ud[k]] = uv[static_cast<Eigen::Index>(k)];
  const auto pd = sys.p_constraints().dofs();
  const Vector pv = sys.p_constraints().values(t);
  for (std::size_t k = 0; k < pd.size(); ++k) rhs[nu + np + pd[k]] = pv[static_cast<Eigen::Index>(k)];
  const Vector x = ref.scale.cwiseProduct(ref.lu.solve(ref.scale.cwiseProduct(rhs)));
  return {x.head(nu), x.segment(nu, np), x.tail(np), t};
}

ReferenceCn reference_cn_matrix(const BiotSystem& sys, double dt) {
  const std::size_t nu = sys.num_u(), np = sys.num_p();
  const SparseMatrix bt = sys.b().transpose().scaled(-1.0);
  const SparseMatrix mc = sys.c().scaled(-1.0);
  const SparseMatrix mct = sys.ct().scaled(-1.0);
  const SparseMatrix impl = add(sys.a3(), 1.0, sys.d(), 0.5 * dt);
  const SparseMatrix k = block_compose({{&sys.a1(), &bt, nullptr},
                                        {&sys.b(), &sys.a2(), &mc},
                                        {nullptr, &mct, &impl}},
                                       {nu, np, np}, {nu, np, np});
  std::vector<bool> fixed(nu + 2 * np, false);
  for (int d : sys.u_constraints().dofs()) fixed[static_cast<std::size_t>(d)] = true;
  for (int d : sys.p_constraints().dofs()) fixed[nu + np + static_cast<std::size_t>(d)] = true;
  Vector scale(static_cast<Eigen::Index>(k.rows()));
  for (std::size_t i = 0; i < k.rows(); ++i) {
    scale[static_cast<Eigen::Index>(i)] = fixed[i] ? 1.0 : 1.0 / std::sqrt(std::abs(k.coeff(i, i)));
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < k.rows(); ++i) {
    if (fixed[i]) {
      t.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
      continue;
    }
    for (int e = k.row_ptr()[i]; e < k.row_ptr()[i + 1]; ++e) {
      const int j = k.col_idx()[e];
      t.push_back({static_cast<int>(i), j,
                   scale[static_cast<Eigen::Index>(i)] * k.values()[e] * scale[j]});
    }
  }
  return {Factorization::factorize(SparseMatrix::from_triplets(t, k.rows(), k.cols()),
                                   FactorKind::General),
          scale};
}

TEST(Coupled, MatchesIndependentStandardCrankNicolson) {
  for (const char* name : {"example1", "barry-mercer", "mandel"}) {
    const int n = std::string(name) == "mandel" ? 10 : 8;
    const BiotSystem sys(problem_by_name(name, n), n);
    const TimeGrid grid(sys.problem().final_time, 4);
    const auto traj = coupled_trajectory(sys, grid);
    const ReferenceCn lu = reference_cn_matrix(sys, grid.dt());
    State s = sys.initial_state();
    for (int k = 1; k <= grid.steps; ++k) {
      s = reference_cn_step(sys, lu, s, grid.dt(), grid.t(k));
      EXPECT_LT(max_rel_diff(traj[k], s), 1e-9) << name << " step " << k;
    }
  }
}

TEST(Coupled, ZeroDataStaysZero) {
  ProblemSpec ps = barry_mercer_problem(8);
  ps.point_source.reset();
  const BiotSystem sys(std::move(ps), 8);
  const TimeGrid grid(sys.problem().final_time, 4);
  const auto check = [](const State& s) {
    EXPECT_EQ(s.u.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(s.xi.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(s.p.lpNorm<Eigen::Infinity>(), 0.0);
  };
  check(coupled_cn_run(sys, grid).final_state);
  check(ts_decoupled_run(sys, grid, fixed_iterations(3)).final_state);
  check(git_decoupled_run(sys, grid, fixed_iterations(3)).final_state);
}

TEST(Coupled, InitialXiMatchesExact) {
  const BiotSystem sys(example1_problem(), 16);
  const State s = sys.initial_state();
  double worst = 0.0;
  for (std::size_t i = 0; i < sys.num_p(); ++i) {
    const Point x = sys.p_layout().location(i);
    const double expect = 10.0 * std::exp((x.x + x.y) / 10.0) - 0.1;
    worst = std::max(worst, std::abs(s.xi[static_cast<Eigen::Index>(i)] - expect));
  }
  EXPECT_LT(worst, 1e-3);
  // Cached: a second call returns the same coefficients.
  EXPECT_EQ(sys.initial_state().xi, s.xi);
}

TEST(Coupled, ReleasedSolversAreRebuiltIdentically) {
  const BiotSystem sys(example1_problem(), 4);
  const TimeGrid grid(1.0, 2);
  const State a = coupled_cn_run(sys, grid).final_state;
  sys.release_solvers();
  const State b = coupled_cn_run(sys, grid).final_state;
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.p, b.p);
}

TEST(FixedPoint, CoupledSolutionIsInvariantForAllBenchmarks) {
  for (const char* name : {"example1", "barry-mercer", "mandel"}) {
    const int n = std::string(name) == "mandel" ? 10 : 8;
    const BiotSystem sys(problem_by_name(name, n), n);
    const TimeGrid grid(sys.problem().final_time, 6);
    const auto traj = coupled_trajectory(sys, grid);
    RunOptions o = fixed_iterations(1);
    o.initial_guess = &traj;
    o.keep_trajectory = true;
    o.oracle_mode = true;
    o.reference = &traj;
    const auto ts = ts_decoupled_run(sys, grid, o).trajectory;
    o.oracle_mode = false;
    const auto git = git_decoupled_run(sys, grid, o).trajectory;
    for (int k = 1; k <= grid.steps; ++k) {
      EXPECT_LT(max_rel_diff(ts[k], traj[k]), 1e-9) << name << " ts step " << k;
      EXPECT_LT(max_rel_diff(git[k], traj[k]), 1e-9) << name << " git step " << k;
    }
  }
}

TEST(Decoupled, ConvergeToCoupled) {
  const BiotSystem sys(example1_problem(), 8);
  const TimeGrid grid(1.0, 4);
  const State ref = coupled_cn_run(sys, grid).final_state;
  RunOptions o;
  o.control.tol = 1e-12;
  const RunResult ts = ts_decoupled_run(sys, grid, o);
  const RunResult git = git_decoupled_run(sys, grid, o);
  EXPECT_TRUE(ts.report.converged);
  EXPECT_TRUE(git.report.converged);
  EXPECT_LT(max_rel_diff(ts.final_state, ref), 1e-9);
  EXPECT_LT(max_rel_diff(git.final_state, ref), 1e-9);
}

TEST(GlobalInTime, WorkerCountDoesNotChangeResults) {
  const BiotSystem sys(example1_problem(), 8);
  const TimeGrid grid(1.0, 8);
  RunOptions o = fixed_iterations(4);
  o.keep_trajectory = true;
  const RunResult one = git_decoupled_run(sys, grid, o);
  for (int w : {2, 3, 4, 16}) {
    o.workers = w;
    const RunResult many = git_decoupled_run(sys, grid, o);
    ASSERT_EQ(many.trajectory.size(), one.trajectory.size());
    for (std::size_t k = 0; k < one.trajectory.size(); ++k) {
      EXPECT_EQ(many.trajectory[k].u, one.trajectory[k].u) << w;
      EXPECT_EQ(many.trajectory[k].xi, one.trajectory[k].xi) << w;
      EXPECT_EQ(many.trajectory[k].p, one.trajectory[k].p) << w;
    }
    EXPECT_EQ(many.report.workers, w);
  }
}

TEST(TimeStepping, OracleModeContraction) {
  const BiotSystem sys(example1_problem(), 8);
  const TimeGrid grid(1.0, 4);
  const auto traj = coupled_trajectory(sys, grid);
  RunOptions o = fixed_iterations(12, &traj);
  o.oracle_mode = true;
  const RunResult r = ts_decoupled_run(sys, grid, o);
  int checked = 0;
  for (int n = 1; n <= grid.steps; ++n) {
    std::vector<double> q;
    for (const auto& rec : r.report.history) {
      if (rec.step == n) q.push_back(rec.absolute->xi_l2);
    }
    ASSERT_EQ(q.size(), 13u);
    const auto ratios = contraction_series(q, 1e-12, sys.norms().scalar_l2(traj[n].xi));
    for (const auto& ratio : ratios) {
      if (!ratio) continue;
      EXPECT_LE(*ratio, 0.5 + 1e-3) << "step " << n;
      ++checked;
    }
  }
  EXPECT_GT(checked, 8);
}

TEST(GlobalInTime, SummedDifferenceContracts) {
  const BiotSystem sys(example1_problem(), 8);
  const TimeGrid grid(1.0, 8);
  const auto traj = coupled_trajectory(sys, grid);
  const RunResult r = git_decoupled_run(sys, grid, fixed_iterations(12, &traj));
  std::vector<double> q;
  for (const auto& rec : r.report.history) q.push_back(*rec.summed_difference);
  ASSERT_EQ(q.size(), 13u);
  const auto ratios = contraction_series(q, 1e-24, q.front());
  int checked = 0;
  for (const auto& ratio : ratios) {
    if (!ratio) continue;
    EXPECT_LT(*ratio, 1.0);
    EXPECT_LE(*ratio, 0.25 + 1e-3);
    ++checked;
  }
  EXPECT_GT(checked, 3);
}

TEST(Decoupled, BarryMercerTenIterations) {
  const BiotSystem sys(barry_mercer_problem(20), 20);
  const TimeGrid grid(sys.problem().final_time, 16);
  const auto traj = coupled_trajectory(sys, grid);
  const RunOptions o = fixed_iterations(10, &traj);
  for (const RunResult& r : {ts_decoupled_run(sys, grid, o), git_decoupled_run(sys, grid, o)}) {
    const IterationRecord& last = r.report.history.back();
    ASSERT_EQ(last.step, grid.steps);
    ASSERT_EQ(last.iter, 10);
    EXPECT_LT(last.relative->u_h1, 1e-2) << r.report.algorithm;
    EXPECT_LT(last.relative->xi_l2, 1e-2) << r.report.algorithm;
    EXPECT_LT(last.relative->p_h1, 1e-2) << r.report.algorithm;
  }
}

TEST(Decoupled, IterationControl) {
  const BiotSystem sys(mandel_problem(), 10);
  const TimeGrid grid(1.0, 20);
  const RunResult r = ts_decoupled_run(sys, grid, fixed_iterations(5));
  ASSERT_EQ(r.report.iterations.size(), 20u);
  for (int i : r.report.iterations) EXPECT_EQ(i, 5);
  const RunResult g = git_decoupled_run(sys, grid, fixed_iterations(5));
  EXPECT_EQ(g.report.iterations, std::vector<int>{5});
  RunOptions strict;
  strict.control.max_iters = 2;
  strict.control.tol = 1e-14;
  const RunResult u = ts_decoupled_run(sys, grid, strict);
  EXPECT_FALSE(u.report.converged);
  EXPECT_EQ(u.report.unconverged_steps, 20);
}

TEST(Errors, InvalidOptions) {
  const BiotSystem sys(example1_problem(), 4);
  const TimeGrid grid(1.0, 2);
  RunOptions o;
  o.oracle_mode = true;
  EXPECT_THROW(ts_decoupled_run(sys, grid, o), std::invalid_argument);
  const std::vector<State> short_ref(2);
  RunOptions r;
  r.reference = &short_ref;
  EXPECT_THROW(ts_decoupled_run(sys, grid, r), std::invalid_argument);
  EXPECT_THROW(git_decoupled_run(sys, grid, r), std::invalid_argument);
  RunOptions w;
  w.workers = 0;
  EXPECT_THROW(git_decoupled_run(sys, grid, w), std::invalid_argument);
  RunOptions m;
  m.control.max_iters = 0;
  EXPECT_THROW(ts_decoupled_run(sys, grid, m), std::invalid_argument);
  m.control.max_iters = 1;
  m.control.tol = 0.0;
  EXPECT_THROW(git_decoupled_run(sys, grid, m), std::invalid_argument);
  ProblemSpec bad = example1_problem();
  bad.params.mu = -1.0;
  EXPECT_THROW(BiotSystem(std::move(bad), 4), std::invalid_argument);
}

TEST(Errors, NonFiniteDataRaisesSolverError) {
  ProblemSpec ps = example1_problem();
  const VectorField f = ps.body_force;
  ps.body_force = [f](double x, double y, double t) -> std::array<double, 2> {
    if (t > 0.5) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    return f(x, y, t);
  };
  const BiotSystem sys(std::move(ps), 4);
  const TimeGrid grid(1.0, 2);
  EXPECT_THROW(coupled_cn_run(sys, grid), SolverError);
  EXPECT_THROW(ts_decoupled_run(sys, grid), SolverError);
  EXPECT_THROW(git_decoupled_run(sys, grid, fixed_iterations(1)), SolverError);
  RunOptions par = fixed_iterations(1);
  par.workers = 2;
  EXPECT_THROW(git_decoupled_run(sys, grid, par), SolverError);
}

}  // namespace
}  // namespace biot
