#pragma once

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biot/assembly.hpp"
#include "biot/fem.hpp"
#include "biot/mesh.hpp"
#include "biot/metrics.hpp"
#include "biot/problems.hpp"
#include "biot/sparse.hpp"
#include "biot/state.hpp"

namespace biot {

/// Raised for non-finite iterates and failed linear solves.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BiotSystem;

/// Generalized Stokes problem for (u, xi) with p given:
///   A1 u - B^T xi = F,   -B u - A2 xi = -C p.
/// Displacement constraints are eliminated symmetrically; the matrix is
/// factored once. solve() is const and safe to call from several threads.
class StokesSolver {
 public:
  explicit StokesSolver(const BiotSystem& system);

  void solve(const Vector& force, const Vector& p, const Vector& u_values, Vector& u,
             Vector& xi) const;
  const SparseMatrix& matrix() const { return elim_.matrix(); }

 private:
  const BiotSystem* system_;
  DirichletElimination elim_;
  Factorization factor_;
};

/// (A3 + dt/2 D) p = rhs with pressure constraints eliminated.
class ReactionDiffusionSolver {
 public:
  ReactionDiffusionSolver(const BiotSystem& system, double dt);

  double dt() const { return dt_; }
  /// (A3 - dt/2 D) p
  Vector explicit_part(const Vector& p) const { return explicit_ * p; }
  Vector solve(const Vector& rhs, const Vector& p_values) const;
  const SparseMatrix& matrix() const { return elim_.matrix(); }

 private:
  double dt_;
  SparseMatrix explicit_;
  DirichletElimination elim_;
  Factorization factor_;
};

/// Monolithic Crank-Nicolson step in symmetric quasi-definite form:
///   [ A1   -B^T   0            ] [u ]   [ F                                        ]
///   [ -B   -A2    C            ] [xi] = [ 0                                        ]
///   [ 0    C^T   -(A3+dt/2 D)  ] [p ]   [ -((A3-dt/2 D) p' - C^T xi' + dt/2 (G+G')) ]
class CoupledSolver {
 public:
  CoupledSolver(const BiotSystem& system, double dt);

  double dt() const { return dt_; }
  State step(const State& prev, const Vector& force, const Vector& source_avg, double t) const;
  const SparseMatrix& matrix() const { return elim_.matrix(); }

 private:
  const BiotSystem* system_;
  double dt_;
  SparseMatrix explicit_;
  DirichletElimination elim_;
  Factorization factor_;
};

/// Assembled discretization of one problem on one mesh. Factorizations are
/// built lazily and cached per time step size.
class BiotSystem {
 public:
  BiotSystem(ProblemSpec problem, int subdivisions);
  BiotSystem(const BiotSystem&) = delete;
  BiotSystem& operator=(const BiotSystem&) = delete;

  const ProblemSpec& problem() const { return problem_; }
  const Mesh& mesh() const { return mesh_; }
  int subdivisions() const { return mesh_.nx(); }
  const DofLayout& u_layout() const { return u_layout_; }
  /// Shared by xi and p.
  const DofLayout& p_layout() const { return p_layout_; }
  const Norms& norms() const { return norms_; }

  const SparseMatrix& a1() const { return a1_; }
  const SparseMatrix& b() const { return b_; }
  const SparseMatrix& a2() const { return a2_; }
  const SparseMatrix& c() const { return c_; }
  const SparseMatrix& ct() const { return ct_; }
  const SparseMatrix& a3() const { return a3_; }
  const SparseMatrix& d() const { return d_; }

  const DirichletSet& u_constraints() const { return u_bc_; }
  const DirichletSet& p_constraints() const { return p_bc_; }

  std::size_t num_u() const { return u_layout_.num_dofs(); }
  std::size_t num_p() const { return p_layout_.num_dofs(); }

  /// (f, v) + <f1, v> at time t.
  Vector force(double t) const;
  /// (g, psi) + <g1, psi> + point source at time t.
  Vector source(double t) const;

  /// p0 = nodal interpolant; (u0, xi0) from the generalized Stokes problem.
  /// Computed once and cached.
  State initial_state() const;

  const StokesSolver& stokes() const;
  const ReactionDiffusionSolver& reaction_diffusion(double dt) const;
  const CoupledSolver& coupled(double dt) const;

  /// Seconds spent in factorizations so far.
  double factor_seconds() const;

  /// Drops every cached factorization. References returned by stokes(),
  /// reaction_diffusion() and coupled() become invalid.
  void release_solvers() const;

 private:
  ProblemSpec problem_;
  Mesh mesh_;
  DofLayout u_layout_;
  DofLayout p_layout_;
  Norms norms_;
  SparseMatrix a1_, b_, a2_, c_, ct_, a3_, d_;
  DirichletSet u_bc_, p_bc_;
  std::optional<PointSource> point_source_;

  mutable std::mutex cache_mutex_;
  mutable std::unique_ptr<StokesSolver> stokes_;
  mutable std::map<double, std::unique_ptr<ReactionDiffusionSolver>> rd_;
  mutable std::map<double, std::unique_ptr<CoupledSolver>> coupled_;
  mutable double factor_seconds_ = 0.0;
  mutable std::optional<State> initial_;
};

struct IterationControl {
  int max_iters = 30;
  /// Relative L2 change of xi between successive iterates.
  double tol = 1e-8;
  /// When false, every step (or sweep) runs exactly max_iters iterations.
  bool stop_on_tolerance = true;
  bool record_history = true;

  void validate() const;
};

struct IterationRecord {
  int step = 0;  // time level; the final level N for the global-in-time iteration
  int iter = 0;  // 0 is the initial guess, recorded only with a reference
  double xi_change = std::numeric_limits<double>::quiet_NaN();
  std::optional<ErrorTriple> relative;  // vs the reference at `step`
  std::optional<ErrorTriple> absolute;
  /// Global-in-time only: sum_n ||e_xi^n - e_xi^{n-1}||^2 against the reference.
  std::optional<double> summed_difference;
};

struct RunReport {
  std::string algorithm;
  int steps = 0;
  int workers = 1;
  std::vector<int> iterations;  // per step (time-stepping) or one entry (global)
  std::vector<IterationRecord> history;
  bool converged = true;
  int unconverged_steps = 0;
  double step_a_seconds = 0.0;
  double step_b_seconds = 0.0;
  double total_seconds = 0.0;
};

struct RunResult {
  State final_state;
  std::vector<State> trajectory;  // levels 0..N when kept
  RunReport report;
};

struct RunOptions {
  IterationControl control;
  int workers = 1;
  /// Time-stepping only: take level n-1 from `reference` instead of the own history.
  bool oracle_mode = false;
  /// Coupled trajectory (levels 0..N) used for error records and oracle mode.
  const std::vector<State>* reference = nullptr;
  /// Iterate 0: per level for the time-stepping iteration, the whole
  /// trajectory for the global one.
  const std::vector<State>* initial_guess = nullptr;
  bool keep_trajectory = false;
};

RunResult coupled_cn_run(const BiotSystem& system, const TimeGrid& grid,
                         const RunOptions& options = {});
RunResult ts_decoupled_run(const BiotSystem& system, const TimeGrid& grid,
                           const RunOptions& options = {});
RunResult git_decoupled_run(const BiotSystem& system, const TimeGrid& grid,
                            const RunOptions& options = {});

}  // namespace biot
