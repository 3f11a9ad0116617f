#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "biot/mesh.hpp"

namespace biot {

enum class ElementKind { P1, P2 };

/// Shape functions on the reference triangle (0,0), (1,0), (0,1).
/// P2 ordering: the three vertex functions, then the midpoints of edges
/// (v0,v1), (v1,v2), (v2,v0).
struct BasisValues {
  int count = 0;
  std::array<double, 6> value{};
  std::array<std::array<double, 2>, 6> grad{};  // d/dr, d/ds
};

BasisValues eval_basis(ElementKind kind, double r, double s);

inline int num_local_dofs(ElementKind kind) { return kind == ElementKind::P1 ? 3 : 6; }

struct QuadraturePoint {
  double r = 0.0;
  double s = 0.0;
  double weight = 0.0;
};

/// Positive-weight rule on the reference triangle; weights sum to 1/2.
struct QuadratureRule {
  int degree = 0;
  std::vector<QuadraturePoint> points;
};

/// Rule exact for polynomials of total degree <= `degree` (0..6).
/// Throws std::invalid_argument otherwise.
const QuadratureRule& quadrature(int degree);

/// Three-point Gauss rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::array<double, 3> s;
  std::array<double, 3> weight;
};
const LineRule& gauss_line_rule();

enum class SpaceKind { P1Scalar, P2Scalar, P2Vector };

/// Global numbering for one discrete space. Vertex dofs come first, then
/// edge-midpoint dofs (keyed by edge index). The vector space is blocked:
/// all x-component dofs, then all y-component dofs.
class DofLayout {
 public:
  DofLayout(const Mesh& mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  ElementKind element() const {
    return kind_ == SpaceKind::P1Scalar ? ElementKind::P1 : ElementKind::P2;
  }
  int components() const { return kind_ == SpaceKind::P2Vector ? 2 : 1; }
  std::size_t num_dofs() const { return num_dofs_; }
  /// Dofs of one component (equals num_dofs for scalar spaces).
  std::size_t scalar_dofs() const { return scalar_dofs_; }
  int dofs_per_cell() const { return dofs_per_cell_; }

  /// Local-to-global map of triangle t. For the vector space the x-component
  /// dofs come first, then the y-component dofs.
  std::span<const int> cell_dofs(std::size_t t) const {
    return {cell_dofs_.data() + t * dofs_per_cell_, static_cast<std::size_t>(dofs_per_cell_)};
  }

  /// Geometric location of a scalar dof (component index stripped).
  Point location(std::size_t dof) const { return locations_[dof % scalar_dofs_]; }
  int component(std::size_t dof) const { return static_cast<int>(dof / scalar_dofs_); }

  /// Scalar dofs lying on a boundary edge: endpoints, then the midpoint for P2.
  std::vector<int> edge_dofs(const Mesh& mesh, int edge) const;

 private:
  SpaceKind kind_;
  std::size_t scalar_dofs_ = 0;
  std::size_t num_dofs_ = 0;
  int dofs_per_cell_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Point> locations_;
};

/// Affine map of one triangle: x = v0 + J (r, s).
struct CellGeometry {
  Point origin;
  std::array<std::array<double, 2>, 2> jacobian{};      // columns v1-v0, v2-v0
  std::array<std::array<double, 2>, 2> inv_transpose{};  // J^{-T}
  double det = 0.0;

  explicit CellGeometry(const Mesh& mesh, std::size_t t);

  Point map(double r, double s) const {
    return {origin.x + jacobian[0][0] * r + jacobian[0][1] * s,
            origin.y + jacobian[1][0] * r + jacobian[1][1] * s};
  }
  std::array<double, 2> physical_grad(const std::array<double, 2>& ref) const {
    return {inv_transpose[0][0] * ref[0] + inv_transpose[0][1] * ref[1],
            inv_transpose[1][0] * ref[0] + inv_transpose[1][1] * ref[1]};
  }
};

/// Nodal interpolation of f(x, y) into a scalar layout.
template <class F>
std::vector<double> interpolate_scalar(const DofLayout& layout, F&& f) {
  std::vector<double> out(layout.scalar_dofs());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Point p = layout.location(i);
    out[i] = f(p.x, p.y);
  }
  return out;
}

}  // namespace biot
