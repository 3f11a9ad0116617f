#include "biot/fem.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace biot {

BasisValues eval_basis(ElementKind kind, double r, double s) {
  assert(r >= -1e-12 && s >= -1e-12 && r + s <= 1.0 + 1e-12);
  BasisValues b;
  const double l0 = 1.0 - r - s, l1 = r, l2 = s;
  // Barycentric gradients in (r, s).
  constexpr std::array<double, 2> g0{-1.0, -1.0}, g1{1.0, 0.0}, g2{0.0, 1.0};

  if (kind == ElementKind::P1) {
    b.count = 3;
    b.value = {l0, l1, l2, 0.0, 0.0, 0.0};
    b.grad[0] = g0;
    b.grad[1] = g1;
    b.grad[2] = g2;
    return b;
  }

  b.count = 6;
  const std::array<double, 3> l{l0, l1, l2};
  const std::array<std::array<double, 2>, 3> g{g0, g1, g2};
  for (int i = 0; i < 3; ++i) {
    b.value[i] = l[i] * (2.0 * l[i] - 1.0);
    for (int d = 0; d < 2; ++d) b.grad[i][d] = (4.0 * l[i] - 1.0) * g[i][d];
  }
  for (int k = 0; k < 3; ++k) {
    const int i = k, j = (k + 1) % 3;
    b.value[3 + k] = 4.0 * l[i] * l[j];
    for (int d = 0; d < 2; ++d) b.grad[3 + k][d] = 4.0 * (g[i][d] * l[j] + l[i] * g[j][d]);
  }
  return b;
}

namespace {

void add_orbit3(QuadratureRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.points.push_back({a, a, 0.5 * w});
  rule.points.push_back({b, a, 0.5 * w});
  rule.points.push_back({a, b, 0.5 * w});
}

void add_orbit6(QuadratureRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  for (auto [r, s] : {std::pair{a, b}, std::pair{b, a}, std::pair{a, c}, std::pair{c, a},
                      std::pair{b, c}, std::pair{c, b}}) {
    rule.points.push_back({r, s, 0.5 * w});
  }
}

// Symmetric Dunavant rules (weights normalised to unit area, halved on insert).
std::array<QuadratureRule, 7> make_rules() {
  std::array<QuadratureRule, 7> rules;

  QuadratureRule r1{1, {{1.0 / 3.0, 1.0 / 3.0, 0.5}}};
  rules[0] = r1;
  rules[0].degree = 0;
  rules[1] = r1;

  QuadratureRule r2{2, {}};
  add_orbit3(r2, 1.0 / 6.0, 1.0 / 3.0);
  rules[2] = r2;

  QuadratureRule r4{4, {}};
  add_orbit3(r4, 0.445948490915964886318329253883, 0.223381589678011465944686045564);
  add_orbit3(r4, 0.091576213509770743459571463402, 0.109951743655321867638647287770);
  rules[3] = r4;
  rules[3].degree = 3;
  rules[4] = r4;

  const double sq15 = std::sqrt(15.0);
  QuadratureRule r5{5, {{1.0 / 3.0, 1.0 / 3.0, 0.5 * 9.0 / 40.0}}};
  add_orbit3(r5, (6.0 - sq15) / 21.0, (155.0 - sq15) / 1200.0);
  add_orbit3(r5, (6.0 + sq15) / 21.0, (155.0 + sq15) / 1200.0);
  rules[5] = r5;

  QuadratureRule r6{6, {}};
  add_orbit3(r6, 0.249286745170910421291638553107, 0.116786275726379366030690538687);
  add_orbit3(r6, 0.063089014491502228340331602870, 0.050844906370206816920936809106);
  add_orbit6(r6, 0.053145049844816947353249671631, 0.310352451033784405416607733956,
             0.082851075618373575193553456421);
  rules[6] = r6;
  return rules;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
  static const std::array<QuadratureRule, 7> rules = make_rules();
  if (degree < 0 || degree > 6) {
    throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree));
  }
  return rules[degree];
}

const LineRule& gauss_line_rule() {
  static const LineRule rule = [] {
    const double d = 0.5 * std::sqrt(3.0 / 5.0);
    return LineRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

DofLayout::DofLayout(const Mesh& mesh, SpaceKind kind) : kind_(kind) {
  const std::size_t nv = mesh.num_vertices();
  const bool p2 = kind != SpaceKind::P1Scalar;
  scalar_dofs_ = p2 ? nv + mesh.num_edges() : nv;
  num_dofs_ = scalar_dofs_ * (kind == SpaceKind::P2Vector ? 2 : 1);
  const int local = p2 ? 6 : 3;
  dofs_per_cell_ = local * (kind == SpaceKind::P2Vector ? 2 : 1);

  locations_.assign(mesh.vertices().begin(), mesh.vertices().end());
  if (p2) {
    for (const auto& e : mesh.edges()) {
      const Point& a = mesh.vertices()[e[0]];
      const Point& b = mesh.vertices()[e[1]];
      locations_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
  }

  cell_dofs_.resize(mesh.num_triangles() * dofs_per_cell_);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    int* out = cell_dofs_.data() + t * dofs_per_cell_;
    std::array<int, 6> scalar{};
    for (int k = 0; k < 3; ++k) scalar[k] = mesh.triangles()[t][k];
    if (p2) {
      for (int k = 0; k < 3; ++k) scalar[3 + k] = static_cast<int>(nv) + mesh.triangle_edges()[t][k];
    }
    for (int c = 0; c < components(); ++c) {
      for (int k = 0; k < local; ++k) {
        out[c * local + k] = scalar[k] + c * static_cast<int>(scalar_dofs_);
      }
    }
  }
}

std::vector<int> DofLayout::edge_dofs(const Mesh& mesh, int edge) const {
  const auto& e = mesh.edges().at(edge);
  std::vector<int> out{e[0], e[1]};
  if (element() == ElementKind::P2) out.push_back(static_cast<int>(mesh.num_vertices()) + edge);
  return out;
}

CellGeometry::CellGeometry(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const Point& a = mesh.vertices()[tri[0]];
  const Point& b = mesh.vertices()[tri[1]];
  const Point& c = mesh.vertices()[tri[2]];
  origin = a;
  jacobian = {{{b.x - a.x, c.x - a.x}, {b.y - a.y, c.y - a.y}}};
  det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
  const double inv = 1.0 / det;
  // J^{-1} = [[d, -b], [-c, a]] / det; transpose it.
  inv_transpose = {{{jacobian[1][1] * inv, -jacobian[1][0] * inv},
                    {-jacobian[0][1] * inv, jacobian[0][0] * inv}}};
}

}  // namespace biot
