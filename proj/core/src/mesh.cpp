#include "biot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace biot {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Gamma1: return "Gamma1";
    case BoundaryTag::Gamma2: return "Gamma2";
    case BoundaryTag::Gamma3: return "Gamma3";
    case BoundaryTag::Gamma4: return "Gamma4";
  }
  return "?";
}

Mesh build_rect_mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_rect_mesh: subdivision counts must be positive");
  }
  if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_max - x_min) ||
      !std::isfinite(y_max - y_min)) {
    throw std::invalid_argument("build_rect_mesh: degenerate rectangle");
  }

  Mesh mesh;
  mesh.bounds_ = {x_min, x_max, y_min, y_max};
  mesh.nx_ = nx;
  mesh.ny_ = ny;

  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.vertices_.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    // Pin the last row/column to the exact bound so tagged facets sit on it.
    const double y = (j == ny) ? y_max : y_min + (y_max - y_min) * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? x_max : x_min + (x_max - x_min) * i / nx;
      mesh.vertices_.push_back({x, y});
    }
  }

  mesh.triangles_.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh.triangles_.push_back({v00, v10, v11});
      mesh.triangles_.push_back({v00, v11, v01});
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  mesh.triangle_edges_.resize(mesh.triangles_.size());
  for (std::size_t t = 0; t < mesh.triangles_.size(); ++t) {
    const auto& tri = mesh.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(mesh.edges_.size()));
      if (inserted) mesh.edges_.push_back({a, b});
      mesh.triangle_edges_[t][k] = it->second;
    }
  }

  // Boundary facets in a fixed order: Gamma2, Gamma1, Gamma4, Gamma3.
  const auto add_facet = [&](int a, int b, BoundaryTag tag) {
    if (a > b) std::swap(a, b);
    mesh.boundary_facets_.push_back({edge_index.at({a, b}), tag});
  };
  for (int i = 0; i < nx; ++i) add_facet(vid(i, 0), vid(i + 1, 0), BoundaryTag::Gamma2);
  for (int j = 0; j < ny; ++j) add_facet(vid(nx, j), vid(nx, j + 1), BoundaryTag::Gamma1);
  for (int i = 0; i < nx; ++i) add_facet(vid(i, ny), vid(i + 1, ny), BoundaryTag::Gamma4);
  for (int j = 0; j < ny; ++j) add_facet(vid(0, j), vid(0, j + 1), BoundaryTag::Gamma3);

  return mesh;
}

double Mesh::grid_spacing() const {
  return std::max((bounds_.x_max - bounds_.x_min) / nx_, (bounds_.y_max - bounds_.y_min) / ny_);
}

double Mesh::diameter() const {
  return std::hypot((bounds_.x_max - bounds_.x_min) / nx_, (bounds_.y_max - bounds_.y_min) / ny_);
}

double Mesh::signed_area(std::size_t triangle) const {
  const auto& tri = triangles_.at(triangle);
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

VertexHit Mesh::locate_vertex(Point p) const {
  const double hx = (bounds_.x_max - bounds_.x_min) / nx_;
  const double hy = (bounds_.y_max - bounds_.y_min) / ny_;
  const int i = std::clamp(static_cast<int>(std::lround((p.x - bounds_.x_min) / hx)), 0, nx_);
  const int j = std::clamp(static_cast<int>(std::lround((p.y - bounds_.y_min) / hy)), 0, ny_);
  const int v = j * (nx_ + 1) + i;
  const Point& q = vertices_[v];
  const double scale = std::max({std::abs(bounds_.x_min), std::abs(bounds_.x_max),
                                 std::abs(bounds_.y_min), std::abs(bounds_.y_max), 1.0});
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * scale;
  return {v, std::abs(q.x - p.x) <= tol && std::abs(q.y - p.y) <= tol};
}

int Mesh::locate_triangle(Point p) const {
  const double tol = 1e-12;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Point& a = vertices_[tri[0]];
    const Point& b = vertices_[tri[1]];
    const Point& c = vertices_[tri[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double r = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    const double s = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    if (r >= -tol && s >= -tol && r + s <= 1.0 + tol) return static_cast<int>(t);
  }
  return -1;
}

void Mesh::write(std::ostream& os) const {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << vertices_.size() << ' ' << boundary_facets_.size() << ' ' << triangles_.size() << '\n';
  for (const auto& v : vertices_) os << v.x << ' ' << v.y << '\n';
  for (const auto& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& f : boundary_facets_) os << f.edge << ' ' << to_string(f.tag) << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace biot
