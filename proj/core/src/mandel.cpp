#include "biot/mandel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace biot {

double poisson_ratio(const PhysicalParams& params) {
  return params.lambda / (2.0 * (params.lambda + params.mu));
}

std::vector<double> mandel_roots(double nu, double nu_u, int count) {
  if (!(nu < nu_u) || !(nu_u < 0.5) || count < 1) {
    throw std::invalid_argument("mandel_roots: require nu < nu_u < 0.5 and count >= 1");
  }
  const double k = (1.0 - nu) / (nu_u - nu);
  // sin(r) - k r cos(r) has the roots of tan(r) = k r without the poles.
  // Long double keeps the sign reliable down to the last double of the bracket.
  const auto f = [k](double r) {
    const long double x = r;
    return static_cast<double>(std::sin(x) - static_cast<long double>(k) * x * std::cos(x));
  };
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) {
    const double base = (n - 1) * std::numbers::pi;
    double lo = n == 1 ? 1e-8 : base;
    double hi = base + 0.5 * std::numbers::pi;
    double flo = f(lo);
    if (flo * f(hi) > 0.0) {
      throw std::invalid_argument("mandel_roots: bracket " + std::to_string(n) +
                                  " does not contain a sign change");
    }
    for (;;) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = f(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi);
  }
  return roots;
}

MandelParams make_mandel_params(const PhysicalParams& params, MandelParams mp) {
  if (!(mp.B > 0.0 && mp.B <= 1.0)) throw std::invalid_argument("Mandel: require 0 < B <= 1");
  if (mp.series_terms < 1) throw std::invalid_argument("Mandel: series_terms must be positive");
  mp.roots = mandel_roots(poisson_ratio(params), mp.nu_u, mp.series_terms);
  return mp;
}

double mandel_consolidation_coefficient(const MandelParams& mp, const PhysicalParams& params) {
  const double nu = poisson_ratio(params);
  const double nu_u = mp.nu_u;
  return 2.0 * params.k_p * mp.B * mp.B * params.mu * (1.0 - nu) * (1.0 + nu_u) * (1.0 + nu_u) /
         (9.0 * (1.0 - nu_u) * (nu_u - nu));
}

MandelValue mandel_exact(const MandelParams& mp, const PhysicalParams& params, double x, double y,
                         double t) {
  const double F = mp.F, a = mp.a, mu = params.mu, nu_u = mp.nu_u;
  const double nu = poisson_ratio(params);
  MandelValue v;
  if (t <= 0.0) {
    v.u1 = F * nu_u * x / (2.0 * mu * a);
    v.u2 = -F * (1.0 - nu_u) * y / (2.0 * mu * a);
    v.p = F * mp.B * (1.0 + nu_u) / (3.0 * a);
    v.du1_dx = F * nu_u / (2.0 * mu * a);
    v.du2_dy = -F * (1.0 - nu_u) / (2.0 * mu * a);
    return v;
  }
  if (mp.roots.size() < static_cast<std::size_t>(mp.series_terms)) {
    throw std::invalid_argument("mandel_exact: roots not precomputed (use make_mandel_params)");
  }
  const double c = mandel_consolidation_coefficient(mp, params);
  double sp = 0.0, sp_dx = 0.0, s_sc = 0.0, s_ux = 0.0, s_ux_dx = 0.0;
  for (int n = 0; n < mp.series_terms; ++n) {
    const double r = mp.roots[static_cast<std::size_t>(n)];
    const double sr = std::sin(r), cr = std::cos(r);
    const double denom = r - sr * cr;
    const double decay = std::exp(-r * r * c * t / (a * a));
    sp += sr / denom * (std::cos(r * x / a) - cr) * decay;
    sp_dx -= sr / denom * (r / a) * std::sin(r * x / a) * decay;
    s_sc += sr * cr / denom * decay;
    s_ux += cr / denom * std::sin(r * x / a) * decay;
    s_ux_dx += cr / denom * (r / a) * std::cos(r * x / a) * decay;
  }
  const double p_scale = 2.0 * F * mp.B * (1.0 + nu_u) / (3.0 * a);
  v.p = p_scale * sp;
  v.dp_dx = p_scale * sp_dx;
  const double ax = F * nu / (2.0 * mu * a) - F * nu_u / (mu * a) * s_sc;
  v.u1 = ax * x + F / mu * s_ux;
  v.du1_dx = ax + F / mu * s_ux_dx;
  v.du2_dy = -F * (1.0 - nu) / (2.0 * mu * a) + F * (1.0 - nu_u) / (mu * a) * s_sc;
  v.u2 = v.du2_dy * y;
  return v;
}

double mandel_tail_bound(const MandelParams& mp, const PhysicalParams& params, double t) {
  // The next root exceeds (n - 1) pi for n = series_terms + 1; each pressure
  // term is bounded by 2 / (r - 1) times the decay factor.
  const double r = mp.series_terms * std::numbers::pi;
  const double c = mandel_consolidation_coefficient(mp, params);
  const double p_scale = 2.0 * mp.F * mp.B * (1.0 + mp.nu_u) / (3.0 * mp.a);
  return p_scale * 2.0 / (r - 1.0) * std::exp(-r * r * c * std::max(t, 0.0) / (mp.a * mp.a));
}

}  // namespace biot
