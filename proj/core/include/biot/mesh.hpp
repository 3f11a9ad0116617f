#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace biot {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Sides of an axis-aligned rectangle.
/// Gamma1: x = x_max, Gamma2: y = y_min, Gamma3: x = x_min, Gamma4: y = y_max.
enum class BoundaryTag { Gamma1, Gamma2, Gamma3, Gamma4 };

std::string_view to_string(BoundaryTag tag);

struct Rectangle {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct BoundaryFacet {
  int edge = -1;
  BoundaryTag tag = BoundaryTag::Gamma1;
};

struct VertexHit {
  int vertex = -1;
  bool exact = false;
};

/// Structured triangulation of a rectangle. Each grid cell is split along its
/// lower-left to upper-right diagonal. Immutable after construction.
class Mesh {
 public:
  const Rectangle& bounds() const { return bounds_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  /// Vertex pairs, smaller index first.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Local edge k of a triangle joins local vertices (k, (k+1) % 3).
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_facets_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  /// Larger of the two grid spacings.
  double grid_spacing() const;
  /// Maximum element diameter (the cell diagonal).
  double diameter() const;

  double signed_area(std::size_t triangle) const;

  /// Nearest vertex to `p`. `exact` is set when the point coincides with the
  /// vertex to machine precision.
  VertexHit locate_vertex(Point p) const;

  /// Triangle containing `p` (first match in element order), or -1.
  int locate_triangle(Point p) const;

  /// Plain-text dump: header `V F T`, then V vertex lines, T triangle lines
  /// and F facet lines (`edge tag`), with 17 significant digits.
  void write(std::ostream& os) const;

  friend Mesh build_rect_mesh(double, double, double, double, int, int);

 private:
  Rectangle bounds_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<BoundaryFacet> boundary_facets_;
};

/// Throws std::invalid_argument for nx < 1, ny < 1 or a degenerate rectangle.
Mesh build_rect_mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny);

inline Mesh build_unit_square_mesh(int n) { return build_rect_mesh(0.0, 1.0, 0.0, 1.0, n, n); }

}  // namespace biot
