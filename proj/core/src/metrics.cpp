#include "biot/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "biot/assembly.hpp"

namespace biot {

Norms::Norms(const Mesh& mesh, const DofLayout& u_layout, const DofLayout& p_layout) {
  if (u_layout.kind() != SpaceKind::P2Vector || p_layout.kind() != SpaceKind::P1Scalar) {
    throw std::invalid_argument("Norms: expects P2-vector and P1 layouts");
  }
  const DofLayout p2(mesh, SpaceKind::P2Scalar);
  n2_ = p2.num_dofs();
  m1_ = mass_matrix(mesh, p_layout);
  k1_ = stiffness_matrix(mesh, p_layout);
  m2_ = mass_matrix(mesh, p2);
  k2_ = stiffness_matrix(mesh, p2);
}

double Norms::block_form(const SparseMatrix& a, const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != 2 * n2_) {
    throw std::invalid_argument("Norms: displacement vector has wrong length");
  }
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Vector uc = u.segment(static_cast<Eigen::Index>(c * n2_), static_cast<Eigen::Index>(n2_));
    s += uc.dot(a * uc);
  }
  return s;
}

double Norms::u_l2(const Vector& u) const { return std::sqrt(std::max(0.0, block_form(m2_, u))); }

double Norms::u_h1(const Vector& u) const {
  return std::sqrt(std::max(0.0, block_form(m2_, u) + block_form(k2_, u)));
}

double Norms::scalar_l2(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != m1_.rows()) {
    throw std::invalid_argument("Norms: scalar vector has wrong length");
  }
  return std::sqrt(std::max(0.0, v.dot(m1_ * v)));
}

double Norms::scalar_h1(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != m1_.rows()) {
    throw std::invalid_argument("Norms: scalar vector has wrong length");
  }
  return std::sqrt(std::max(0.0, v.dot(m1_ * v) + v.dot(k1_ * v)));
}

double Norms::measure(NormKind which, const State& s) const {
  switch (which) {
    case NormKind::UH1: return u_h1(s.u);
    case NormKind::XiL2: return scalar_l2(s.xi);
    case NormKind::PH1: return scalar_h1(s.p);
  }
  return 0.0;
}

double norm_error(const State& s, const ExactSolution& exact, NormKind which, const Mesh& mesh,
                  const DofLayout& u_layout, const DofLayout& p_layout) {
  const QuadratureRule& rule = quadrature(6);
  const bool vec = which == NormKind::UH1;
  const ElementKind kind = vec ? ElementKind::P2 : ElementKind::P1;
  std::vector<BasisValues> basis;
  for (const auto& q : rule.points) basis.push_back(eval_basis(kind, q.r, q.s));

  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const double jac = std::abs(geo.det);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& qp = rule.points[q];
      const Point x = geo.map(qp.r, qp.s);
      const double w = qp.weight * jac;
      if (vec) {
        const auto dofs = u_layout.cell_dofs(t);
        std::array<double, 2> uh{};
        std::array<double, 4> guh{};
        for (int a = 0; a < 6; ++a) {
          const auto g = geo.physical_grad(basis[q].grad[a]);
          for (int c = 0; c < 2; ++c) {
            const double coef = s.u[dofs[c * 6 + a]];
            uh[c] += coef * basis[q].value[a];
            guh[2 * c] += coef * g[0];
            guh[2 * c + 1] += coef * g[1];
          }
        }
        const auto ue = exact.u(x.x, x.y, s.t);
        const auto ge = exact.grad_u(x.x, x.y, s.t);
        double e = 0.0;
        for (int c = 0; c < 2; ++c) e += (uh[c] - ue[c]) * (uh[c] - ue[c]);
        for (int k = 0; k < 4; ++k) e += (guh[k] - ge[k]) * (guh[k] - ge[k]);
        sum += w * e;
      } else {
        const auto dofs = p_layout.cell_dofs(t);
        const Vector& v = which == NormKind::XiL2 ? s.xi : s.p;
        double vh = 0.0;
        std::array<double, 2> gh{};
        for (int a = 0; a < 3; ++a) {
          const auto g = geo.physical_grad(basis[q].grad[a]);
          vh += v[dofs[a]] * basis[q].value[a];
          gh[0] += v[dofs[a]] * g[0];
          gh[1] += v[dofs[a]] * g[1];
        }
        if (which == NormKind::XiL2) {
          const double e = vh - exact.xi(x.x, x.y, s.t);
          sum += w * e * e;
        } else {
          const double e = vh - exact.p(x.x, x.y, s.t);
          const auto ge = exact.grad_p(x.x, x.y, s.t);
          sum += w * (e * e + (gh[0] - ge[0]) * (gh[0] - ge[0]) + (gh[1] - ge[1]) * (gh[1] - ge[1]));
        }
      }
    }
  }
  return std::sqrt(sum);
}

ErrorTriple exact_errors(const State& s, const ExactSolution& exact, const Mesh& mesh,
                         const DofLayout& u_layout, const DofLayout& p_layout) {
  return {norm_error(s, exact, NormKind::UH1, mesh, u_layout, p_layout),
          norm_error(s, exact, NormKind::XiL2, mesh, u_layout, p_layout),
          norm_error(s, exact, NormKind::PH1, mesh, u_layout, p_layout)};
}

double norm_error(const State& s, const State& reference, NormKind which, const Norms& norms) {
  if (s.u.size() != reference.u.size() || s.xi.size() != reference.xi.size() ||
      s.p.size() != reference.p.size()) {
    throw std::invalid_argument("norm_error: states live on different meshes");
  }
  switch (which) {
    case NormKind::UH1: return norms.u_h1(s.u - reference.u);
    case NormKind::XiL2: return norms.scalar_l2(s.xi - reference.xi);
    case NormKind::PH1: return norms.scalar_h1(s.p - reference.p);
  }
  return 0.0;
}

ErrorTriple state_errors(const State& s, const State& reference, const Norms& norms) {
  return {norm_error(s, reference, NormKind::UH1, norms),
          norm_error(s, reference, NormKind::XiL2, norms),
          norm_error(s, reference, NormKind::PH1, norms)};
}

ErrorTriple relative_errors(const State& iterate, const State& coupled, const Norms& norms) {
  const ErrorTriple e = state_errors(iterate, coupled, norms);
  const double nu = norms.u_h1(coupled.u);
  const double nxi = norms.scalar_l2(coupled.xi);
  const double np = norms.scalar_h1(coupled.p);
  if (nu == 0.0 || nxi == 0.0 || np == 0.0) {
    throw std::domain_error("relative_errors: reference solution has a zero norm");
  }
  return {e.u_h1 / nu, e.xi_l2 / nxi, e.p_h1 / np};
}

double evaluate_p1(const Mesh& mesh, const DofLayout& layout, const Vector& v, Point x) {
  const int t = mesh.locate_triangle(x);
  if (t < 0) throw std::invalid_argument("evaluate_p1: point outside the mesh");
  const CellGeometry geo(mesh, static_cast<std::size_t>(t));
  const double dx = x.x - geo.origin.x, dy = x.y - geo.origin.y;
  const double r = geo.inv_transpose[0][0] * dx + geo.inv_transpose[1][0] * dy;
  const double s = geo.inv_transpose[0][1] * dx + geo.inv_transpose[1][1] * dy;
  const auto dofs = layout.cell_dofs(static_cast<std::size_t>(t));
  return v[dofs[0]] * (1.0 - r - s) + v[dofs[1]] * r + v[dofs[2]] * s;
}

std::vector<ErrorRow> convergence_table(const std::vector<ErrorSample>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("convergence_table: need at least two rows");
  const auto order = [](double prev, double err) {
    if (prev == 0.0) throw std::invalid_argument("convergence_table: zero previous error");
    return std::log2(prev / err);
  };
  std::vector<ErrorRow> rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ErrorRow row{s.dt, s.h, s.err.u_h1, s.err.xi_l2, s.err.p_h1, {}, {}, {}};
    if (i > 0) {
      const auto& prev = samples[i - 1].err;
      row.order_u = order(prev.u_h1, s.err.u_h1);
      row.order_xi = order(prev.xi_l2, s.err.xi_l2);
      row.order_p = order(prev.p_h1, s.err.p_h1);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::optional<double>> contraction_series(const std::vector<double>& q, double floor,
                                                      std::optional<double> scale) {
  if (q.size() < 2) throw std::invalid_argument("contraction_series: need at least two entries");
  const double ref = scale.value_or(q.front());
  std::vector<std::optional<double>> out;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i - 1] < floor * ref || q[i - 1] == 0.0) {
      out.emplace_back();
    } else {
      out.emplace_back(q[i] / q[i - 1]);
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {
std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }
}  // namespace

void write_convergence_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
  os << "dt,h,err_u_h1,order_u,err_xi_l2,order_xi,err_p_h1,order_p\n";
  for (const auto& r : rows) {
    os << format_number(r.dt) << ',' << format_number(r.h) << ',' << format_number(r.err_u_h1)
       << ',' << opt(r.order_u) << ',' << format_number(r.err_xi_l2) << ',' << opt(r.order_xi)
       << ',' << format_number(r.err_p_h1) << ',' << opt(r.order_p) << '\n';
  }
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows) {
  os << "step,iter,re_u,re_xi,re_p,xi_change\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.iter << ',' << format_number(r.re_u) << ',' << format_number(r.re_xi)
       << ',' << format_number(r.re_p) << ',' << format_number(r.xi_change) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << "phase,workers,seconds\n";
  for (const auto& r : rows) {
    os << r.phase << ',' << r.workers << ',' << format_number(r.seconds) << '\n';
  }
}

}  // namespace biot
