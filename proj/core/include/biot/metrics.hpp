#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biot/fem.hpp"
#include "biot/mesh.hpp"
#include "biot/problems.hpp"
#include "biot/sparse.hpp"
#include "biot/state.hpp"

namespace biot {

enum class NormKind { UH1, XiL2, PH1 };

/// Discrete norms through assembled mass and stiffness matrices. The H1 norm
/// is the full norm (L2 part plus gradient part).
class Norms {
 public:
  Norms(const Mesh& mesh, const DofLayout& u_layout, const DofLayout& p_layout);

  double u_h1(const Vector& u) const;
  double u_l2(const Vector& u) const;
  double scalar_l2(const Vector& v) const;
  double scalar_h1(const Vector& v) const;
  double measure(NormKind which, const State& s) const;

  const SparseMatrix& p1_mass() const { return m1_; }
  const SparseMatrix& p1_stiffness() const { return k1_; }

 private:
  double block_form(const SparseMatrix& a, const Vector& u) const;
  std::size_t n2_ = 0;
  SparseMatrix m1_, k1_, m2_, k2_;
};

struct ErrorTriple {
  double u_h1 = 0.0;
  double xi_l2 = 0.0;
  double p_h1 = 0.0;
};

/// Error against the exact solution at s.t by degree-6 quadrature.
double norm_error(const State& s, const ExactSolution& exact, NormKind which, const Mesh& mesh,
                  const DofLayout& u_layout, const DofLayout& p_layout);
ErrorTriple exact_errors(const State& s, const ExactSolution& exact, const Mesh& mesh,
                         const DofLayout& u_layout, const DofLayout& p_layout);

/// Error against a reference state on the same mesh. Throws
/// std::invalid_argument when the coefficient vectors differ in length.
double norm_error(const State& s, const State& reference, NormKind which, const Norms& norms);
ErrorTriple state_errors(const State& s, const State& reference, const Norms& norms);

/// Errors divided by the reference norms. Throws std::domain_error when a
/// reference norm is zero.
ErrorTriple relative_errors(const State& iterate, const State& coupled, const Norms& norms);

/// Value of a P1 field at a point of the mesh.
double evaluate_p1(const Mesh& mesh, const DofLayout& layout, const Vector& v, Point x);

struct ErrorSample {
  double dt = 0.0;
  double h = 0.0;
  ErrorTriple err;
};

struct ErrorRow {
  double dt = 0.0;
  double h = 0.0;
  double err_u_h1 = 0.0;
  double err_xi_l2 = 0.0;
  double err_p_h1 = 0.0;
  std::optional<double> order_u, order_xi, order_p;  // empty on the first row
};

/// order = log2(prev / err). Throws std::invalid_argument for fewer than two
/// rows or a zero previous error.
std::vector<ErrorRow> convergence_table(const std::vector<ErrorSample>& samples);

/// ratio_i = q_i / q_{i-1}; empty where q_{i-1} < floor * scale. `scale`
/// defaults to q.front(). Throws std::invalid_argument for fewer than two entries.
std::vector<std::optional<double>> contraction_series(const std::vector<double>& q,
                                                      double floor = 1e-12,
                                                      std::optional<double> scale = {});

/// Shortest round-trip decimal form.
std::string format_number(double v);

void write_convergence_csv(std::ostream& os, const std::vector<ErrorRow>& rows);

struct HistoryRow {
  int step = 0;
  int iter = 0;
  double re_u = 0.0;
  double re_xi = 0.0;
  double re_p = 0.0;
  double xi_change = 0.0;
};
void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows);

struct TimingRow {
  std::string phase;
  int workers = 1;
  double seconds = 0.0;
};
void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

}  // namespace biot
