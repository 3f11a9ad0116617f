#include "biot/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace biot {

void PhysicalParams::validate() const {
  if (!(mu > 0.0) || !(lambda > 0.0) || !(alpha > 0.0) || !(c0 >= 0.0) || !(k_p > 0.0) ||
      !std::isfinite(mu + lambda + alpha + c0 + k_p)) {
    throw std::invalid_argument(
        "PhysicalParams: require mu, lambda, alpha, k_p > 0 and c0 >= 0, all finite");
  }
}

std::string_view to_string(FormId id) {
  switch (id) {
    case FormId::A1: return "a1";
    case FormId::A2: return "a2";
    case FormId::A3: return "a3";
    case FormId::B: return "b";
    case FormId::C: return "c";
    case FormId::D: return "d";
  }
  return "?";
}

namespace {

// Basis values and reference gradients tabulated at the points of one rule.
struct Tabulation {
  const QuadratureRule* rule;
  std::vector<BasisValues> basis;
};

Tabulation tabulate(ElementKind kind, int degree) {
  Tabulation tab{&quadrature(degree), {}};
  for (const auto& q : tab.rule->points) tab.basis.push_back(eval_basis(kind, q.r, q.s));
  return tab;
}

// Element kernels write a row-major (rows x cols) local matrix.
template <class Kernel>
SparseMatrix assemble(const Mesh& mesh, const DofLayout& row, const DofLayout& col, bool symmetric,
                      Kernel&& kernel) {
  const int nr = row.dofs_per_cell();
  const int nc = col.dofs_per_cell();
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.num_triangles() *
                   static_cast<std::size_t>(symmetric ? nr * (nr + 1) / 2 : nr * nc));
  std::vector<double> local(static_cast<std::size_t>(nr) * nc);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    std::fill(local.begin(), local.end(), 0.0);
    kernel(geo, local.data());
    const auto rd = row.cell_dofs(t);
    const auto cd = col.cell_dofs(t);
    for (int a = 0; a < nr; ++a) {
      for (int b = 0; b < nc; ++b) {
        // Symmetric forms keep only the upper triangle and mirror it below.
        if (symmetric && rd[a] > cd[b]) continue;
        triplets.push_back({rd[a], cd[b], local[a * nc + b]});
      }
    }
  }
  SparseMatrix upper = SparseMatrix::from_triplets(triplets, row.num_dofs(), col.num_dofs());
  if (!symmetric) return upper;

  std::vector<Triplet> strict;
  strict.reserve(upper.nnz());
  for (std::size_t i = 0; i < upper.rows(); ++i) {
    for (int k = upper.row_ptr()[i]; k < upper.row_ptr()[i + 1]; ++k) {
      if (static_cast<std::size_t>(upper.col_idx()[k]) != i) {
        strict.push_back({upper.col_idx()[k], static_cast<int>(i), upper.values()[k]});
      }
    }
  }
  return add(upper, 1.0, SparseMatrix::from_triplets(strict, upper.rows(), upper.cols()), 1.0);
}

void require(bool ok, FormId id, const char* what) {
  if (!ok) {
    throw std::invalid_argument("assemble_form(" + std::string(to_string(id)) + "): " + what);
  }
}

}  // namespace

SparseMatrix mass_matrix(const Mesh& mesh, const DofLayout& layout) {
  if (layout.kind() == SpaceKind::P2Vector) {
    throw std::invalid_argument("mass_matrix: scalar layout required");
  }
  const Tabulation tab = tabulate(layout.element(), kFormQuadratureDegree);
  const int n = layout.dofs_per_cell();
  return assemble(mesh, layout, layout, true, [&](const CellGeometry& geo, double* local) {
    const double jac = std::abs(geo.det);
    for (std::size_t q = 0; q < tab.basis.size(); ++q) {
      const double w = tab.rule->points[q].weight * jac;
      const auto& v = tab.basis[q].value;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) local[a * n + b] += w * v[a] * v[b];
      }
    }
  });
}

SparseMatrix stiffness_matrix(const Mesh& mesh, const DofLayout& layout) {
  if (layout.kind() == SpaceKind::P2Vector) {
    throw std::invalid_argument("stiffness_matrix: scalar layout required");
  }
  const Tabulation tab = tabulate(layout.element(), kFormQuadratureDegree);
  const int n = layout.dofs_per_cell();
  return assemble(mesh, layout, layout, true, [&](const CellGeometry& geo, double* local) {
    const double jac = std::abs(geo.det);
    std::array<std::array<double, 2>, 6> g{};
    for (std::size_t q = 0; q < tab.basis.size(); ++q) {
      const double w = tab.rule->points[q].weight * jac;
      for (int a = 0; a < n; ++a) g[a] = geo.physical_grad(tab.basis[q].grad[a]);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) local[a * n + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
      }
    }
  });
}

SparseMatrix strain_matrix(const Mesh& mesh, const DofLayout& vector_layout) {
  if (vector_layout.kind() != SpaceKind::P2Vector) {
    throw std::invalid_argument("strain_matrix: P2-vector layout required");
  }
  const Tabulation tab = tabulate(ElementKind::P2, kFormQuadratureDegree);
  constexpr int n = 12;
  return assemble(mesh, vector_layout, vector_layout, true,
                  [&](const CellGeometry& geo, double* local) {
                    const double jac = std::abs(geo.det);
                    std::array<std::array<double, 2>, 6> g{};
                    for (std::size_t q = 0; q < tab.basis.size(); ++q) {
                      const double w = tab.rule->points[q].weight * jac;
                      for (int a = 0; a < 6; ++a) g[a] = geo.physical_grad(tab.basis[q].grad[a]);
                      // eps(phi_a e_c) : eps(phi_b e_d) = (delta_cd grad.grad + d_d phi_a d_c phi_b) / 2
                      for (int c = 0; c < 2; ++c) {
                        for (int a = 0; a < 6; ++a) {
                          for (int d = 0; d < 2; ++d) {
                            for (int b = 0; b < 6; ++b) {
                              double v = g[a][d] * g[b][c];
                              if (c == d) v += g[a][0] * g[b][0] + g[a][1] * g[b][1];
                              local[(c * 6 + a) * n + d * 6 + b] += 0.5 * w * v;
                            }
                          }
                        }
                      }
                    }
                  });
}

SparseMatrix divergence_matrix(const Mesh& mesh, const DofLayout& vector_layout,
                               const DofLayout& scalar_layout) {
  if (vector_layout.kind() != SpaceKind::P2Vector || scalar_layout.kind() != SpaceKind::P1Scalar) {
    throw std::invalid_argument("divergence_matrix: expects P2-vector and P1 layouts");
  }
  const Tabulation tab2 = tabulate(ElementKind::P2, kFormQuadratureDegree);
  const Tabulation tab1 = tabulate(ElementKind::P1, kFormQuadratureDegree);
  return assemble(mesh, scalar_layout, vector_layout, false,
                  [&](const CellGeometry& geo, double* local) {
                    const double jac = std::abs(geo.det);
                    for (std::size_t q = 0; q < tab2.basis.size(); ++q) {
                      const double w = tab2.rule->points[q].weight * jac;
                      for (int a = 0; a < 6; ++a) {
                        const auto g = geo.physical_grad(tab2.basis[q].grad[a]);
                        for (int k = 0; k < 3; ++k) {
                          const double psi = tab1.basis[q].value[k];
                          local[k * 12 + a] += w * psi * g[0];
                          local[k * 12 + 6 + a] += w * psi * g[1];
                        }
                      }
                    }
                  });
}

FormMatrix assemble_form(FormId id, const Mesh& mesh, const DofLayout& row, const DofLayout& col,
                         const PhysicalParams& params) {
  params.validate();
  FormMatrix out{id, row.kind(), col.kind(), {}};
  switch (id) {
    case FormId::A1:
      require(row.kind() == SpaceKind::P2Vector && col.kind() == SpaceKind::P2Vector &&
                  row.num_dofs() == col.num_dofs(),
              id, "expects P2-vector rows and columns");
      out.matrix = strain_matrix(mesh, row).scaled(2.0 * params.mu);
      break;
    case FormId::B:
      require(row.kind() == SpaceKind::P1Scalar && col.kind() == SpaceKind::P2Vector, id,
              "expects P1 rows and P2-vector columns");
      out.matrix = divergence_matrix(mesh, col, row);
      break;
    case FormId::A2:
    case FormId::A3:
    case FormId::C:
    case FormId::D: {
      require(row.kind() == SpaceKind::P1Scalar && col.kind() == SpaceKind::P1Scalar &&
                  row.num_dofs() == col.num_dofs(),
              id, "expects P1 rows and columns");
      if (id == FormId::D) {
        out.matrix = stiffness_matrix(mesh, row).scaled(params.k_p);
      } else {
        const double coef = id == FormId::A2   ? 1.0 / params.lambda
                            : id == FormId::C  ? params.alpha / params.lambda
                                               : params.storage();
        out.matrix = mass_matrix(mesh, row).scaled(coef);
      }
      break;
    }
  }
  return out;
}

Vector assemble_load(const Mesh& mesh, const DofLayout& layout, const ScalarField& f, double t,
                     int quad_degree) {
  if (layout.kind() == SpaceKind::P2Vector) {
    throw std::invalid_argument("assemble_load: scalar layout required");
  }
  const Tabulation tab = tabulate(layout.element(), quad_degree);
  const int n = layout.dofs_per_cell();
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(layout.num_dofs()));
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry geo(mesh, c);
    const auto dofs = layout.cell_dofs(c);
    const double jac = std::abs(geo.det);
    for (std::size_t q = 0; q < tab.basis.size(); ++q) {
      const auto& qp = tab.rule->points[q];
      const Point x = geo.map(qp.r, qp.s);
      const double val = qp.weight * jac * f(x.x, x.y, t);
      for (int a = 0; a < n; ++a) rhs[dofs[a]] += val * tab.basis[q].value[a];
    }
  }
  return rhs;
}

Vector assemble_vector_load(const Mesh& mesh, const DofLayout& layout, const VectorField& f,
                            double t, int quad_degree) {
  if (layout.kind() != SpaceKind::P2Vector) {
    throw std::invalid_argument("assemble_vector_load: P2-vector layout required");
  }
  const Tabulation tab = tabulate(ElementKind::P2, quad_degree);
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(layout.num_dofs()));
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry geo(mesh, c);
    const auto dofs = layout.cell_dofs(c);
    const double jac = std::abs(geo.det);
    for (std::size_t q = 0; q < tab.basis.size(); ++q) {
      const auto& qp = tab.rule->points[q];
      const Point x = geo.map(qp.r, qp.s);
      const auto val = f(x.x, x.y, t);
      for (int a = 0; a < 6; ++a) {
        const double w = qp.weight * jac * tab.basis[q].value[a];
        rhs[dofs[a]] += w * val[0];
        rhs[dofs[6 + a]] += w * val[1];
      }
    }
  }
  return rhs;
}

namespace {

// Edge shape functions in the parameter s from edge vertex 0 to vertex 1,
// ordered like DofLayout::edge_dofs.
std::array<double, 3> edge_basis(ElementKind kind, double s) {
  if (kind == ElementKind::P1) return {1.0 - s, s, 0.0};
  return {(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)};
}

template <class Fn>
void for_each_tagged_facet(const Mesh& mesh, const std::vector<BoundaryTag>& tags, Fn&& fn) {
  for (const auto& facet : mesh.boundary_facets()) {
    if (std::find(tags.begin(), tags.end(), facet.tag) != tags.end()) fn(facet.edge);
  }
}

}  // namespace

Vector assemble_boundary_load(const Mesh& mesh, const DofLayout& layout,
                              const std::vector<BoundaryTag>& tags, const ScalarField& g,
                              double t) {
  if (layout.kind() == SpaceKind::P2Vector) {
    throw std::invalid_argument("assemble_boundary_load: scalar layout required");
  }
  const auto& rule = gauss_line_rule();
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(layout.num_dofs()));
  for_each_tagged_facet(mesh, tags, [&](int edge) {
    const auto& e = mesh.edges()[edge];
    const Point a = mesh.vertices()[e[0]];
    const Point b = mesh.vertices()[e[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const auto dofs = layout.edge_dofs(mesh, edge);
    for (int q = 0; q < 3; ++q) {
      const double s = rule.s[q];
      const double val = len * rule.weight[q] * g(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), t);
      const auto phi = edge_basis(layout.element(), s);
      for (std::size_t k = 0; k < dofs.size(); ++k) rhs[dofs[k]] += val * phi[k];
    }
  });
  return rhs;
}

Vector assemble_boundary_vector_load(const Mesh& mesh, const DofLayout& layout,
                                     const std::vector<BoundaryTag>& tags, const VectorField& g,
                                     double t) {
  if (layout.kind() != SpaceKind::P2Vector) {
    throw std::invalid_argument("assemble_boundary_vector_load: P2-vector layout required");
  }
  const auto& rule = gauss_line_rule();
  const int offset = static_cast<int>(layout.scalar_dofs());
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(layout.num_dofs()));
  for_each_tagged_facet(mesh, tags, [&](int edge) {
    const auto& e = mesh.edges()[edge];
    const Point a = mesh.vertices()[e[0]];
    const Point b = mesh.vertices()[e[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const auto dofs = layout.edge_dofs(mesh, edge);
    for (int q = 0; q < 3; ++q) {
      const double s = rule.s[q];
      const auto val = g(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), t);
      const auto phi = edge_basis(ElementKind::P2, s);
      for (std::size_t k = 0; k < dofs.size(); ++k) {
        const double w = len * rule.weight[q] * phi[k];
        rhs[dofs[k]] += w * val[0];
        rhs[dofs[k] + offset] += w * val[1];
      }
    }
  });
  return rhs;
}

PointSource::PointSource(const Mesh& mesh, const DofLayout& layout, Point point,
                         std::function<double(double)> magnitude)
    : size_(layout.num_dofs()), magnitude_(std::move(magnitude)) {
  if (layout.kind() == SpaceKind::P2Vector) {
    throw std::invalid_argument("PointSource: scalar layout required");
  }
  const auto& bounds = mesh.bounds();
  if (point.x < bounds.x_min || point.x > bounds.x_max || point.y < bounds.y_min ||
      point.y > bounds.y_max) {
    throw std::invalid_argument("PointSource: point outside the domain");
  }
  const VertexHit hit = mesh.locate_vertex(point);
  if (hit.exact) {
    on_vertex_ = true;
    weights_.push_back({hit.vertex, 1.0});
    return;
  }
  std::cerr << "warning: point source at (" << point.x << ", " << point.y
            << ") is not a mesh vertex; spreading it over the enclosing triangle\n";
  const int t = mesh.locate_triangle(point);
  const CellGeometry geo(mesh, static_cast<std::size_t>(t));
  const double dx = point.x - geo.origin.x, dy = point.y - geo.origin.y;
  // (r, s) = J^{-1} (p - v0); inv_transpose holds J^{-T}.
  const double r = std::clamp(geo.inv_transpose[0][0] * dx + geo.inv_transpose[1][0] * dy, 0.0, 1.0);
  const double s = std::clamp(geo.inv_transpose[0][1] * dx + geo.inv_transpose[1][1] * dy, 0.0,
                              1.0 - r);
  const BasisValues basis = eval_basis(layout.element(), r, s);
  const auto dofs = layout.cell_dofs(static_cast<std::size_t>(t));
  for (int a = 0; a < basis.count; ++a) {
    if (basis.value[a] != 0.0) weights_.push_back({dofs[a], basis.value[a]});
  }
}

Vector PointSource::operator()(double t) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(size_));
  add_to(out, t);
  return out;
}

void PointSource::add_to(Vector& rhs, double t, double scale) const {
  const double m = scale * magnitude_(t);
  for (const auto& [dof, w] : weights_) rhs[dof] += w * m;
}

void DirichletSet::add(int dof, ValueFn value) {
  if (dof < 0) throw std::out_of_range("DirichletSet: negative dof");
  sources_[dof].push_back(std::move(value));
}

DirichletSet DirichletSet::shifted(int offset) const {
  DirichletSet out;
  for (const auto& [dof, fns] : sources_) out.sources_[dof + offset] = fns;
  return out;
}

void DirichletSet::merge(const DirichletSet& other) {
  for (const auto& [dof, fns] : other.sources_) {
    auto& dst = sources_[dof];
    dst.insert(dst.end(), fns.begin(), fns.end());
  }
}

std::vector<int> DirichletSet::dofs() const {
  std::vector<int> out;
  out.reserve(sources_.size());
  for (const auto& entry : sources_) out.push_back(entry.first);
  return out;
}

Vector DirichletSet::values(double t) const {
  Vector out(static_cast<Eigen::Index>(sources_.size()));
  Eigen::Index k = 0;
  for (const auto& [dof, fns] : sources_) {
    const double v = fns.front()(t);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("DirichletSet: non-finite value at dof " + std::to_string(dof));
    }
    for (std::size_t j = 1; j < fns.size(); ++j) {
      const double w = fns[j](t);
      if (std::abs(w - v) > 1e-12 * std::max({1.0, std::abs(v), std::abs(w)})) {
        throw std::invalid_argument("DirichletSet: conflicting constraints on dof " +
                                    std::to_string(dof));
      }
    }
    out[k++] = v;
  }
  return out;
}

DirichletElimination::DirichletElimination(const SparseMatrix& a, std::vector<int> dofs)
    : dofs_(std::move(dofs)) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DirichletElimination: square matrix required");
  std::sort(dofs_.begin(), dofs_.end());
  if (std::adjacent_find(dofs_.begin(), dofs_.end()) != dofs_.end()) {
    throw std::invalid_argument("DirichletElimination: dof listed twice");
  }
  const std::size_t n = a.rows();
  if (!dofs_.empty() && (dofs_.front() < 0 || static_cast<std::size_t>(dofs_.back()) >= n)) {
    throw std::out_of_range("DirichletElimination: constrained dof outside the matrix");
  }
  std::vector<int> pos(n, -1);
  for (std::size_t k = 0; k < dofs_.size(); ++k) pos[dofs_[k]] = static_cast<int>(k);

  std::vector<int> ptr(n + 1, 0), idx, cptr(n + 1, 0), cidx;
  std::vector<double> val, cval;
  idx.reserve(a.nnz());
  val.reserve(a.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    if (pos[i] >= 0) {
      idx.push_back(static_cast<int>(i));
      val.push_back(1.0);
    } else {
      for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
        const int j = a.col_idx()[k];
        if (pos[j] >= 0) {
          cidx.push_back(pos[j]);
          cval.push_back(a.values()[k]);
        } else {
          idx.push_back(j);
          val.push_back(a.values()[k]);
        }
      }
    }
    ptr[i + 1] = static_cast<int>(idx.size());
    cptr[i + 1] = static_cast<int>(cidx.size());
  }
  constrained_ = SparseMatrix(n, n, std::move(ptr), std::move(idx), std::move(val));
  coupling_ = SparseMatrix(n, dofs_.size(), std::move(cptr), std::move(cidx), std::move(cval));
}

void DirichletElimination::apply(Vector& rhs, const Vector& values) const {
  if (static_cast<std::size_t>(values.size()) != dofs_.size()) {
    throw std::invalid_argument("DirichletElimination::apply: value count mismatch");
  }
  if (dofs_.empty()) return;
  coupling_.multiply_add(values, rhs, -1.0);
  for (std::size_t k = 0; k < dofs_.size(); ++k) rhs[dofs_[k]] = values[static_cast<Eigen::Index>(k)];
}

std::pair<SparseMatrix, Vector> apply_dirichlet(const SparseMatrix& a, const Vector& rhs,
                                                const DirichletSet& constraints, double t) {
  const DirichletElimination elim(a, constraints.dofs());
  Vector b = rhs;
  elim.apply(b, constraints.values(t));
  return {elim.matrix(), std::move(b)};
}

void write_matrix_market(const FormMatrix& form, std::ostream& os) {
  form.matrix.write_matrix_market(os);
}

}  // namespace biot
