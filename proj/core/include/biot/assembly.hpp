#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "biot/fem.hpp"
#include "biot/mesh.hpp"
#include "biot/sparse.hpp"

namespace biot {

using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<std::array<double, 2>(double x, double y, double t)>;

struct PhysicalParams {
  double lambda = 1.0;
  double mu = 1.0;
  double alpha = 1.0;
  double c0 = 1.0;
  double k_p = 1.0;

  /// Throws std::invalid_argument unless mu, lambda, alpha, k_p > 0 and c0 >= 0.
  void validate() const;
  /// c0 + alpha^2 / lambda
  double storage() const { return c0 + alpha * alpha / lambda; }
};

/// a1 = 2mu (eps(u), eps(v)), b = (phi, div v), a2 = (xi, phi) / lambda,
/// c = alpha/lambda (p, phi), a3 = (c0 + alpha^2/lambda)(p, psi), d = k_p (grad p, grad psi).
enum class FormId { A1, A2, A3, B, C, D };

std::string_view to_string(FormId id);

struct FormMatrix {
  FormId id;
  SpaceKind row_space;
  SpaceKind col_space;
  SparseMatrix matrix;
};

/// Quadrature degree used for every bilinear form.
inline constexpr int kFormQuadratureDegree = 4;
/// Default degree for load vectors with non-polynomial data.
inline constexpr int kLoadQuadratureDegree = 6;

/// `row` and `col` must match the form: a1 P2-vector x P2-vector; b P1 x P2-vector;
/// the others P1 x P1. Throws std::invalid_argument otherwise.
FormMatrix assemble_form(FormId id, const Mesh& mesh, const DofLayout& row, const DofLayout& col,
                         const PhysicalParams& params);

/// Coefficient-free building blocks (symmetric ones are bitwise symmetric).
SparseMatrix mass_matrix(const Mesh& mesh, const DofLayout& layout);
SparseMatrix stiffness_matrix(const Mesh& mesh, const DofLayout& layout);
/// (eps(u), eps(v)) on a P2-vector layout.
SparseMatrix strain_matrix(const Mesh& mesh, const DofLayout& vector_layout);
/// (phi, div v): rows from the P1 layout, columns from the P2-vector layout.
SparseMatrix divergence_matrix(const Mesh& mesh, const DofLayout& vector_layout,
                               const DofLayout& scalar_layout);

/// Entries (f, phi_i) on a scalar layout.
Vector assemble_load(const Mesh& mesh, const DofLayout& layout, const ScalarField& f, double t,
                     int quad_degree = kLoadQuadratureDegree);
/// Entries (f, phi_i e_c) on a vector layout.
Vector assemble_vector_load(const Mesh& mesh, const DofLayout& layout, const VectorField& f,
                            double t, int quad_degree = kLoadQuadratureDegree);

/// Line integrals <g, phi_i> over facets carrying one of `tags` (3-point Gauss per edge).
Vector assemble_boundary_load(const Mesh& mesh, const DofLayout& layout,
                              const std::vector<BoundaryTag>& tags, const ScalarField& g,
                              double t);
Vector assemble_boundary_vector_load(const Mesh& mesh, const DofLayout& layout,
                                     const std::vector<BoundaryTag>& tags, const VectorField& g,
                                     double t);

/// Load of magnitude(t) * delta(x - point) on a scalar layout.
class PointSource {
 public:
  PointSource(const Mesh& mesh, const DofLayout& layout, Point point,
              std::function<double(double)> magnitude);

  /// True when the point is a mesh vertex (single nonzero entry).
  bool on_vertex() const { return on_vertex_; }
  /// Basis values at the point: (dof, phi_dof(point)).
  const std::vector<std::pair<int, double>>& weights() const { return weights_; }

  Vector operator()(double t) const;
  void add_to(Vector& rhs, double t, double scale = 1.0) const;

 private:
  std::size_t size_ = 0;
  bool on_vertex_ = false;
  std::vector<std::pair<int, double>> weights_;
  std::function<double(double)> magnitude_;
};

/// Prescribed dof values as functions of time. A dof may be registered by
/// several boundary pieces (corners); values(t) requires them to agree.
class DirichletSet {
 public:
  using ValueFn = std::function<double(double)>;

  void add(int dof, ValueFn value);
  /// Same constraints with every dof shifted by `offset`.
  DirichletSet shifted(int offset) const;
  void merge(const DirichletSet& other);

  bool empty() const { return sources_.empty(); }
  std::size_t size() const { return sources_.size(); }
  bool contains(int dof) const { return sources_.count(dof) != 0; }
  /// Constrained dofs, ascending.
  std::vector<int> dofs() const;
  /// Values aligned with dofs(). Throws std::invalid_argument if two sources of
  /// one dof disagree or a value is not finite.
  Vector values(double t) const;

 private:
  std::map<int, std::vector<ValueFn>> sources_;
};

/// Symmetric elimination of a fixed dof set from a fixed matrix. The
/// constrained matrix is built once; apply() lifts each new right-hand side.
class DirichletElimination {
 public:
  DirichletElimination() = default;
  DirichletElimination(const SparseMatrix& a, std::vector<int> dofs);

  const SparseMatrix& matrix() const { return constrained_; }
  const std::vector<int>& dofs() const { return dofs_; }

  /// rhs_free -= A_fc g, rhs_c = g. `values` is aligned with dofs().
  void apply(Vector& rhs, const Vector& values) const;

 private:
  std::vector<int> dofs_;
  SparseMatrix constrained_;
  SparseMatrix coupling_;  // free rows x constrained columns (by position in dofs_)
};

/// One-shot form of DirichletElimination. Throws std::out_of_range for dofs
/// beyond the matrix and std::invalid_argument for conflicting constraints.
std::pair<SparseMatrix, Vector> apply_dirichlet(const SparseMatrix& a, const Vector& rhs,
                                                const DirichletSet& constraints, double t);

void write_matrix_market(const FormMatrix& form, std::ostream& os);

}  // namespace biot
