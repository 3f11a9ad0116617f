#include "biot/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <utility>

namespace biot {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SparseMatrix negated(const SparseMatrix& a) { return a.scaled(-1.0); }

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

Vector concat(const Vector& a, const Vector& b, const Vector& c) {
  Vector out(a.size() + b.size() + c.size());
  out << a, b, c;
  return out;
}

void require_finite(const State& s, const char* where, int step) {
  if (!s.finite()) {
    throw SolverError(std::string(where) + ": non-finite state at step " + std::to_string(step));
  }
}

// Relative change in the mass-matrix norm; absolute when the new iterate is zero.
double relative_change(const Norms& norms, const Vector& now, const Vector& before) {
  const double diff = norms.scalar_l2(now - before);
  const double size = norms.scalar_l2(now);
  return size > 0.0 ? diff / size : diff;
}

// Registers a constraint for every scalar dof on facets whose side fixes the value.
void add_side_constraints(DirichletSet& set, const Mesh& mesh, const DofLayout& layout,
                          int component, BoundaryTag tag, const ScalarField& value,
                          std::set<std::pair<int, int>>& seen) {
  const int offset = component * static_cast<int>(layout.scalar_dofs());
  for (const auto& facet : mesh.boundary_facets()) {
    if (facet.tag != tag) continue;
    for (int s : layout.edge_dofs(mesh, facet.edge)) {
      const int dof = s + offset;
      if (!seen.insert({dof, static_cast<int>(tag)}).second) continue;
      const Point x = layout.location(static_cast<std::size_t>(s));
      set.add(dof, [value, x](double t) { return value(x.x, x.y, t); });
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

StokesSolver::StokesSolver(const BiotSystem& system) : system_(&system) {
  const SparseMatrix bt = negated(system.b().transpose());
  const SparseMatrix mb = negated(system.b());
  const SparseMatrix ma2 = negated(system.a2());
  const SparseMatrix s = block_compose({{&system.a1(), &bt}, {&mb, &ma2}},
                                       {system.num_u(), system.num_p()},
                                       {system.num_u(), system.num_p()});
  elim_ = DirichletElimination(s, system.u_constraints().dofs());
  factor_ = Factorization::factorize(elim_.matrix(), FactorKind::SymmetricIndefinite);
}

void StokesSolver::solve(const Vector& force, const Vector& p, const Vector& u_values, Vector& u,
                         Vector& xi) const {
  Vector rhs = concat(force, -(system_->c() * p));
  elim_.apply(rhs, u_values);
  const Vector x = factor_.solve(rhs);
  const auto nu = static_cast<Eigen::Index>(system_->num_u());
  u = x.head(nu);
  xi = x.tail(x.size() - nu);
}

ReactionDiffusionSolver::ReactionDiffusionSolver(const BiotSystem& system, double dt) : dt_(dt) {
  explicit_ = add(system.a3(), 1.0, system.d(), -0.5 * dt);
  elim_ = DirichletElimination(add(system.a3(), 1.0, system.d(), 0.5 * dt),
                               system.p_constraints().dofs());
  factor_ = Factorization::factorize(elim_.matrix(), FactorKind::Spd);
}

Vector ReactionDiffusionSolver::solve(const Vector& rhs, const Vector& p_values) const {
  Vector b = rhs;
  elim_.apply(b, p_values);
  return factor_.solve(b);
}

CoupledSolver::CoupledSolver(const BiotSystem& system, double dt) : system_(&system), dt_(dt) {
  explicit_ = add(system.a3(), 1.0, system.d(), -0.5 * dt);
  const SparseMatrix bt = negated(system.b().transpose());
  const SparseMatrix mb = negated(system.b());
  const SparseMatrix ma2 = negated(system.a2());
  const SparseMatrix mr = add(system.a3(), -1.0, system.d(), -0.5 * dt);
  const std::size_t nu = system.num_u(), np = system.num_p();
  const SparseMatrix k = block_compose({{&system.a1(), &bt, nullptr},
                                        {&mb, &ma2, &system.c()},
                                        {nullptr, &system.ct(), &mr}},
                                       {nu, np, np}, {nu, np, np});
  std::vector<int> dofs = system.u_constraints().dofs();
  for (int d : system.p_constraints().dofs()) dofs.push_back(d + static_cast<int>(nu + np));
  elim_ = DirichletElimination(k, std::move(dofs));
  factor_ = Factorization::factorize(elim_.matrix(), FactorKind::SymmetricIndefinite);
}

State CoupledSolver::step(const State& prev, const Vector& force, const Vector& source_avg,
                          double t) const {
  const Vector flow = explicit_ * prev.p - system_->ct() * prev.xi + dt_ * source_avg;
  Vector rhs = concat(force, Vector::Zero(static_cast<Eigen::Index>(system_->num_p())), -flow);
  elim_.apply(rhs, concat(system_->u_constraints().values(t), system_->p_constraints().values(t)));
  const Vector x = factor_.solve(rhs);
  const auto nu = static_cast<Eigen::Index>(system_->num_u());
  const auto np = static_cast<Eigen::Index>(system_->num_p());
  State s;
  s.u = x.head(nu);
  s.xi = x.segment(nu, np);
  s.p = x.tail(np);
  s.t = t;
  return s;
}

// ---------------------------------------------------------------------------

BiotSystem::BiotSystem(ProblemSpec problem, int subdivisions)
    : problem_((problem.validate(), std::move(problem))),
      mesh_(build_rect_mesh(problem_.domain.x_min, problem_.domain.x_max, problem_.domain.y_min,
                            problem_.domain.y_max, subdivisions, subdivisions)),
      u_layout_(mesh_, SpaceKind::P2Vector),
      p_layout_(mesh_, SpaceKind::P1Scalar),
      norms_(mesh_, u_layout_, p_layout_) {
  const PhysicalParams& prm = problem_.params;
  a1_ = assemble_form(FormId::A1, mesh_, u_layout_, u_layout_, prm).matrix;
  b_ = assemble_form(FormId::B, mesh_, p_layout_, u_layout_, prm).matrix;
  a2_ = assemble_form(FormId::A2, mesh_, p_layout_, p_layout_, prm).matrix;
  c_ = assemble_form(FormId::C, mesh_, p_layout_, p_layout_, prm).matrix;
  ct_ = c_.transpose();
  a3_ = assemble_form(FormId::A3, mesh_, p_layout_, p_layout_, prm).matrix;
  d_ = assemble_form(FormId::D, mesh_, p_layout_, p_layout_, prm).matrix;

  std::set<std::pair<int, int>> seen_u, seen_p;
  for (int k = 0; k < 4; ++k) {
    const auto tag = static_cast<BoundaryTag>(k);
    const SideConditions& side = problem_.sides[k];
    for (int c = 0; c < 2; ++c) {
      if (side.displacement[c]) {
        add_side_constraints(u_bc_, mesh_, u_layout_, c, tag, *side.displacement[c], seen_u);
      }
    }
    if (side.pressure) add_side_constraints(p_bc_, mesh_, p_layout_, 0, tag, *side.pressure, seen_p);
  }
  if (problem_.point_source) {
    point_source_.emplace(mesh_, p_layout_, problem_.point_source->location,
                          problem_.point_source->magnitude);
  }
}

Vector BiotSystem::force(double t) const {
  Vector f = problem_.body_force ? assemble_vector_load(mesh_, u_layout_, problem_.body_force, t)
                                 : Vector::Zero(static_cast<Eigen::Index>(num_u()));
  if (problem_.traction) {
    std::vector<BoundaryTag> tags = problem_.traction_sides(0);
    for (BoundaryTag tag : problem_.traction_sides(1)) {
      if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
    }
    // Entries of constrained components are overwritten by the elimination.
    if (!tags.empty()) f += assemble_boundary_vector_load(mesh_, u_layout_, tags, problem_.traction, t);
  }
  return f;
}

Vector BiotSystem::source(double t) const {
  Vector g = problem_.source ? assemble_load(mesh_, p_layout_, problem_.source, t)
                             : Vector::Zero(static_cast<Eigen::Index>(num_p()));
  if (problem_.flux) {
    const auto tags = problem_.flux_sides();
    if (!tags.empty()) g += assemble_boundary_load(mesh_, p_layout_, tags, problem_.flux, t);
  }
  if (point_source_) point_source_->add_to(g, t);
  return g;
}

State BiotSystem::initial_state() const {
  {
    std::lock_guard lock(cache_mutex_);
    if (initial_) return *initial_;
  }
  State s;
  const auto p0 = interpolate_scalar(p_layout_, problem_.initial_pressure);
  s.p = Eigen::Map<const Vector>(p0.data(), static_cast<Eigen::Index>(p0.size()));
  stokes().solve(force(0.0), s.p, u_bc_.values(0.0), s.u, s.xi);
  s.t = 0.0;
  require_finite(s, "initial_state", 0);
  std::lock_guard lock(cache_mutex_);
  initial_ = s;
  return s;
}

void BiotSystem::release_solvers() const {
  std::lock_guard lock(cache_mutex_);
  stokes_.reset();
  rd_.clear();
  coupled_.clear();
}

const StokesSolver& BiotSystem::stokes() const {
  std::lock_guard lock(cache_mutex_);
  if (!stokes_) {
    const auto start = Clock::now();
    stokes_ = std::make_unique<StokesSolver>(*this);
    factor_seconds_ += seconds_since(start);
  }
  return *stokes_;
}

const ReactionDiffusionSolver& BiotSystem::reaction_diffusion(double dt) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = rd_[dt];
  if (!slot) {
    const auto start = Clock::now();
    slot = std::make_unique<ReactionDiffusionSolver>(*this, dt);
    factor_seconds_ += seconds_since(start);
  }
  return *slot;
}

const CoupledSolver& BiotSystem::coupled(double dt) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = coupled_[dt];
  if (!slot) {
    const auto start = Clock::now();
    slot = std::make_unique<CoupledSolver>(*this, dt);
    factor_seconds_ += seconds_since(start);
  }
  return *slot;
}

double BiotSystem::factor_seconds() const {
  std::lock_guard lock(cache_mutex_);
  return factor_seconds_;
}

void IterationControl::validate() const {
  if (max_iters < 1) throw std::invalid_argument("IterationControl: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("IterationControl: tol must be positive");
}

// ---------------------------------------------------------------------------

namespace {

void check_trajectory(const std::vector<State>* traj, const TimeGrid& grid, const char* what) {
  if (traj && traj->size() != static_cast<std::size_t>(grid.steps) + 1) {
    throw std::invalid_argument(std::string(what) + " must hold levels 0..N");
  }
}

void record(RunReport& report, const RunOptions& opt, const BiotSystem& system, int step,
            int iter, double change, const State& s, std::optional<double> summed = {}) {
  if (!opt.control.record_history) return;
  IterationRecord rec;
  rec.step = step;
  rec.iter = iter;
  rec.xi_change = change;
  rec.summed_difference = summed;
  if (opt.reference) {
    const State& ref = (*opt.reference)[static_cast<std::size_t>(step)];
    rec.absolute = state_errors(s, ref, system.norms());
    const Norms& n = system.norms();
    const double du = n.u_h1(ref.u), dxi = n.scalar_l2(ref.xi), dp = n.scalar_h1(ref.p);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.relative = ErrorTriple{du > 0.0 ? rec.absolute->u_h1 / du : nan,
                               dxi > 0.0 ? rec.absolute->xi_l2 / dxi : nan,
                               dp > 0.0 ? rec.absolute->p_h1 / dp : nan};
  }
  report.history.push_back(std::move(rec));
}

}  // namespace

RunResult coupled_cn_run(const BiotSystem& system, const TimeGrid& grid, const RunOptions& options) {
  const auto start = Clock::now();
  RunResult out;
  out.report.algorithm = "coupled";
  out.report.steps = grid.steps;
  const CoupledSolver& solver = system.coupled(grid.dt());

  State s = system.initial_state();
  if (options.keep_trajectory) out.trajectory.push_back(s);
  Vector g_prev = system.source(0.0);
  for (int n = 1; n <= grid.steps; ++n) {
    const double t = grid.t(n);
    const Vector g = system.source(t);
    s = solver.step(s, system.force(t), 0.5 * (g + g_prev), t);
    require_finite(s, "coupled_cn_run", n);
    g_prev = g;
    if (options.keep_trajectory) out.trajectory.push_back(s);
  }
  out.final_state = std::move(s);
  out.report.total_seconds = seconds_since(start);
  return out;
}

RunResult ts_decoupled_run(const BiotSystem& system, const TimeGrid& grid,
                           const RunOptions& options) {
  options.control.validate();
  check_trajectory(options.reference, grid, "reference");
  check_trajectory(options.initial_guess, grid, "initial_guess");
  if (options.oracle_mode && !options.reference) {
    throw std::invalid_argument("ts_decoupled_run: oracle mode needs a reference trajectory");
  }
  const auto start = Clock::now();
  RunResult out;
  RunReport& rep = out.report;
  rep.algorithm = "ts";
  rep.steps = grid.steps;
  const double dt = grid.dt();
  const ReactionDiffusionSolver& rd = system.reaction_diffusion(dt);
  const StokesSolver& stokes = system.stokes();
  const Norms& norms = system.norms();

  State prev = system.initial_state();
  if (options.keep_trajectory) out.trajectory.push_back(prev);
  Vector g_prev = system.source(0.0);
  for (int n = 1; n <= grid.steps; ++n) {
    const double t = grid.t(n);
    const Vector f = system.force(t);
    const Vector g = system.source(t);
    const Vector u_values = system.u_constraints().values(t);
    const Vector p_values = system.p_constraints().values(t);
    const State& base = options.oracle_mode ? (*options.reference)[n - 1] : prev;
    const Vector fixed = rd.explicit_part(base.p) + 0.5 * dt * (g + g_prev);

    State cur = options.initial_guess ? (*options.initial_guess)[n] : base;
    cur.t = t;
    if (options.reference) record(rep, options, system, n, 0, std::numeric_limits<double>::quiet_NaN(), cur);
    bool converged = false;
    int i = 0;
    while (i < options.control.max_iters) {
      ++i;
      auto phase = Clock::now();
      cur.p = rd.solve(fixed + system.ct() * (cur.xi - base.xi), p_values);
      rep.step_a_seconds += seconds_since(phase);
      phase = Clock::now();
      const Vector xi_old = cur.xi;
      stokes.solve(f, cur.p, u_values, cur.u, cur.xi);
      rep.step_b_seconds += seconds_since(phase);
      require_finite(cur, "ts_decoupled_run", n);
      const double change = relative_change(norms, cur.xi, xi_old);
      record(rep, options, system, n, i, change, cur);
      if (change < options.control.tol) {
        converged = true;
        if (options.control.stop_on_tolerance) break;
      }
    }
    rep.iterations.push_back(i);
    if (!converged && options.control.stop_on_tolerance) {
      rep.converged = false;
      ++rep.unconverged_steps;
    }
    prev = std::move(cur);
    g_prev = g;
    if (options.keep_trajectory) out.trajectory.push_back(prev);
  }
  out.final_state = std::move(prev);
  rep.total_seconds = seconds_since(start);
  return out;
}

RunResult git_decoupled_run(const BiotSystem& system, const TimeGrid& grid,
                            const RunOptions& options) {
  options.control.validate();
  check_trajectory(options.reference, grid, "reference");
  check_trajectory(options.initial_guess, grid, "initial_guess");
  if (options.workers < 1) throw std::invalid_argument("git_decoupled_run: workers must be >= 1");
  const auto start = Clock::now();
  RunResult out;
  RunReport& rep = out.report;
  rep.algorithm = "git";
  rep.steps = grid.steps;
  rep.workers = options.workers;
  const int N = grid.steps;
  const double dt = grid.dt();
  const ReactionDiffusionSolver& rd = system.reaction_diffusion(dt);
  const StokesSolver& stokes = system.stokes();
  const Norms& norms = system.norms();
  const SparseMatrix& mass = norms.p1_mass();

  const State init = system.initial_state();
  std::vector<State> traj;
  if (options.initial_guess) {
    traj = *options.initial_guess;
  } else {
    traj.assign(static_cast<std::size_t>(N) + 1, init);
  }
  traj[0] = init;

  // Data of every level, fixed across iterations.
  std::vector<Vector> force(N + 1), source_avg(N + 1), u_values(N + 1), p_values(N + 1);
  {
    Vector g_prev = system.source(0.0);
    for (int n = 1; n <= N; ++n) {
      const double t = grid.t(n);
      traj[n].t = t;
      force[n] = system.force(t);
      const Vector g = system.source(t);
      source_avg[n] = 0.5 * dt * (g + g_prev);
      g_prev = g;
      u_values[n] = system.u_constraints().values(t);
      p_values[n] = system.p_constraints().values(t);
    }
  }

  const auto summed_difference = [&]() -> std::optional<double> {
    if (!options.reference) return std::nullopt;
    const auto& ref = *options.reference;
    double s = 0.0;
    for (int n = 1; n <= N; ++n) {
      const Vector e = (traj[n].xi - ref[n].xi) - (traj[n - 1].xi - ref[n - 1].xi);
      s += e.dot(mass * e);
    }
    return s;
  };

  if (options.reference) {
    record(rep, options, system, N, 0, std::numeric_limits<double>::quiet_NaN(), traj[N],
           summed_difference());
  }

  std::vector<double> diff2(N + 1, 0.0), size2(N + 1, 0.0);
  const auto solve_level = [&](int n) {
    Vector xi;
    stokes.solve(force[n], traj[n].p, u_values[n], traj[n].u, xi);
    const Vector delta = xi - traj[n].xi;
    diff2[n] = delta.dot(mass * delta);
    size2[n] = xi.dot(mass * xi);
    traj[n].xi = std::move(xi);
  };

  bool converged = false;
  int i = 0;
  while (i < options.control.max_iters) {
    ++i;
    auto phase = Clock::now();
    // Step a: sequential in n; level n-1 of the current sweep feeds level n.
    for (int n = 1; n <= N; ++n) {
      const Vector rhs = rd.explicit_part(traj[n - 1].p) +
                         system.ct() * (traj[n].xi - traj[n - 1].xi) + source_avg[n];
      traj[n].p = rd.solve(rhs, p_values[n]);
    }
    rep.step_a_seconds += seconds_since(phase);

    // Step b: the N Stokes solves are independent.
    phase = Clock::now();
    const int workers = std::min(options.workers, N);
    if (workers == 1) {
      for (int n = 1; n <= N; ++n) solve_level(n);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (int n = 1 + w; n <= N; n += workers) solve_level(n);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    rep.step_b_seconds += seconds_since(phase);

    double d = 0.0, s = 0.0;
    for (int n = 1; n <= N; ++n) {
      require_finite(traj[n], "git_decoupled_run", n);
      d += diff2[n];
      s += size2[n];
    }
    const double change = s > 0.0 ? std::sqrt(d / s) : std::sqrt(d);
    record(rep, options, system, N, i, change, traj[N], summed_difference());
    if (change < options.control.tol) {
      converged = true;
      if (options.control.stop_on_tolerance) break;
    }
  }
  rep.iterations.push_back(i);
  if (!converged && options.control.stop_on_tolerance) {
    rep.converged = false;
    rep.unconverged_steps = 1;
  }
  out.final_state = traj[N];
  if (options.keep_trajectory) out.trajectory = std::move(traj);
  rep.total_seconds = seconds_since(start);
  return out;
}

}  // namespace biot
