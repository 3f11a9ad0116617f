#include "biot/problems.hpp"

#include <cmath>
#include <iostream>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace biot {

std::vector<BoundaryTag> ProblemSpec::traction_sides(int c) const {
  std::vector<BoundaryTag> out;
  for (int k = 0; k < 4; ++k) {
    if (!sides[k].displacement[c]) out.push_back(static_cast<BoundaryTag>(k));
  }
  return out;
}

std::vector<BoundaryTag> ProblemSpec::flux_sides() const {
  std::vector<BoundaryTag> out;
  for (int k = 0; k < 4; ++k) {
    if (!sides[k].pressure) out.push_back(static_cast<BoundaryTag>(k));
  }
  return out;
}

void ProblemSpec::validate() const {
  params.validate();
  // Each component needs a Dirichlet side, otherwise a rigid translation is free.
  bool fixed_u[2] = {false, false};
  bool fixed_p = false;
  for (const auto& s : sides) {
    for (int c = 0; c < 2; ++c) fixed_u[c] = fixed_u[c] || s.displacement[c].has_value();
    fixed_p = fixed_p || s.pressure.has_value();
  }
  for (int c = 0; c < 2; ++c) {
    if (!fixed_u[c]) {
      throw std::invalid_argument(name + ": no side prescribes displacement component " +
                                  std::to_string(c + 1));
    }
  }
  if (!fixed_p) throw std::invalid_argument(name + ": no side prescribes the pressure");
  if (!initial_pressure) throw std::invalid_argument(name + ": missing initial pressure");
  if (!(final_time > 0.0)) throw std::invalid_argument(name + ": final time must be positive");
}

std::pair<double, double> lame_from_young_poisson(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("lame_from_young_poisson: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) {
    throw std::invalid_argument("lame_from_young_poisson: require 0 <= nu < 0.5");
  }
  return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

ProblemSpec example1_problem() {
  ProblemSpec ps;
  ps.name = "example1";
  ps.params = {1.0, 1.0, 1.0, 1.0, 1.0};
  const PhysicalParams prm = ps.params;

  ExactSolution ex;
  ex.u = [](double x, double y, double t) -> std::array<double, 2> {
    return {0.1 * std::exp(t) * (x + y * y * y), 0.1 * t * t * (x * x * x + y * y * y)};
  };
  ex.grad_u = [](double x, double y, double t) -> std::array<double, 4> {
    return {0.1 * std::exp(t), 0.3 * std::exp(t) * y * y, 0.3 * t * t * x * x, 0.3 * t * t * y * y};
  };
  ex.p = [](double x, double y, double t) {
    return 10.0 * std::exp((x + y) / 10.0) * (1.0 + t * t * t);
  };
  ex.grad_p = [](double x, double y, double t) -> std::array<double, 2> {
    const double g = std::exp((x + y) / 10.0) * (1.0 + t * t * t);
    return {g, g};
  };
  ex.xi = [prm, p = ex.p](double x, double y, double t) {
    const double div_u = 0.1 * std::exp(t) + 0.3 * t * t * y * y;
    return prm.alpha * p(x, y, t) - prm.lambda * div_u;
  };

  ps.body_force = [prm](double x, double y, double t) -> std::array<double, 2> {
    const double e = std::exp((x + y) / 10.0) * (1.0 + t * t * t);
    return {-0.6 * prm.mu * std::exp(t) * y + prm.alpha * e,
            -2.0 * prm.mu * (0.3 * t * t * x + 0.6 * t * t * y) + prm.alpha * e -
                prm.lambda * 0.6 * t * t * y};
  };
  ps.source = [prm](double x, double y, double t) {
    const double e = std::exp((x + y) / 10.0);
    return prm.c0 * 30.0 * t * t * e + prm.alpha * (0.1 * std::exp(t) + 0.6 * t * y * y) -
           prm.k_p * 0.2 * e * (1.0 + t * t * t);
  };

  const ScalarField u1 = [u = ex.u](double x, double y, double t) { return u(x, y, t)[0]; };
  const ScalarField u2 = [u = ex.u](double x, double y, double t) { return u(x, y, t)[1]; };
  for (auto& s : ps.sides) s = {{u1, u2}, ex.p};
  ps.initial_pressure = [p = ex.p](double x, double y) { return p(x, y, 0.0); };
  ps.exact = std::move(ex);
  ps.final_time = 1.0;
  ps.default_subdivisions = 64;
  ps.default_steps = 16;
  return ps;
}

double barry_mercer_omega(const PhysicalParams& params) {
  return (params.lambda + 2.0 * params.mu) * params.k_p;
}

ProblemSpec barry_mercer_problem(int subdivisions, bool rounded_lame) {
  ProblemSpec ps;
  ps.name = "barry-mercer";
  auto [lambda, mu] = lame_from_young_poisson(1.0e5, 0.1);
  if (rounded_lame) {
    lambda = 1.1e4;
    mu = 4.5e4;
  }
  ps.params = {lambda, mu, 1.0, 0.0, 1.0e-6};
  const double omega = barry_mercer_omega(ps.params);
  if (subdivisions % 4 != 0) {
    std::cerr << "warning: barry-mercer with " << subdivisions
              << " subdivisions: the point source (0.25, 0.25) is not a mesh vertex\n";
  }

  const ScalarField zero = [](double, double, double) { return 0.0; };
  // Gamma1, Gamma3 (x = const): u2 = 0. Gamma2, Gamma4 (y = const): u1 = 0.
  for (BoundaryTag tag : {BoundaryTag::Gamma1, BoundaryTag::Gamma3}) {
    ps.sides[static_cast<int>(tag)] = {{std::nullopt, zero}, zero};
  }
  for (BoundaryTag tag : {BoundaryTag::Gamma2, BoundaryTag::Gamma4}) {
    ps.sides[static_cast<int>(tag)] = {{zero, std::nullopt}, zero};
  }
  ps.point_source = PointSourceSpec{
      {0.25, 0.25}, [omega](double t) { return 2.0 * omega * std::sin(omega * t); }};
  ps.initial_pressure = [](double, double) { return 0.0; };
  ps.final_time = std::numbers::pi / (2.0 * omega);
  ps.default_subdivisions = 20;
  ps.default_steps = 16;
  return ps;
}

PhysicalParams mandel_physical_params() {
  return {1.65e9, 2.475e9, 1.0, 6.061e-11, 9.869e-11};
}

ProblemSpec mandel_problem(const MandelParams& overrides) {
  ProblemSpec ps;
  ps.name = "mandel";
  ps.params = mandel_physical_params();
  const PhysicalParams prm = ps.params;
  const auto mp = std::make_shared<const MandelParams>(make_mandel_params(prm, overrides));
  ps.domain = {0.0, mp->a, 0.0, mp->b};

  const ScalarField zero = [](double, double, double) { return 0.0; };
  const ScalarField top = [mp, prm](double x, double y, double t) {
    return mandel_exact(*mp, prm, x, y, t).u2;
  };
  ps.sides[static_cast<int>(BoundaryTag::Gamma1)] = {{std::nullopt, std::nullopt}, zero};
  ps.sides[static_cast<int>(BoundaryTag::Gamma2)] = {{std::nullopt, zero}, std::nullopt};
  ps.sides[static_cast<int>(BoundaryTag::Gamma3)] = {{zero, std::nullopt}, std::nullopt};
  ps.sides[static_cast<int>(BoundaryTag::Gamma4)] = {{std::nullopt, top}, std::nullopt};

  ExactSolution ex;
  ex.u = [mp, prm](double x, double y, double t) -> std::array<double, 2> {
    const auto v = mandel_exact(*mp, prm, x, y, t);
    return {v.u1, v.u2};
  };
  ex.grad_u = [mp, prm](double x, double y, double t) -> std::array<double, 4> {
    const auto v = mandel_exact(*mp, prm, x, y, t);
    return {v.du1_dx, 0.0, 0.0, v.du2_dy};
  };
  ex.p = [mp, prm](double x, double y, double t) { return mandel_exact(*mp, prm, x, y, t).p; };
  ex.grad_p = [mp, prm](double x, double y, double t) -> std::array<double, 2> {
    return {mandel_exact(*mp, prm, x, y, t).dp_dx, 0.0};
  };
  ex.xi = [mp, prm](double x, double y, double t) {
    const auto v = mandel_exact(*mp, prm, x, y, t);
    return prm.alpha * v.p - prm.lambda * (v.du1_dx + v.du2_dy);
  };
  ps.exact = std::move(ex);

  const double p0 = mp->F * mp->B * (1.0 + mp->nu_u) / (3.0 * mp->a);
  ps.initial_pressure = [p0](double, double) { return p0; };
  ps.final_time = 1.0;
  ps.default_subdivisions = 10;
  ps.default_steps = 1000;
  return ps;
}

ProblemSpec problem_by_name(std::string_view name, int subdivisions) {
  if (name == "example1") return example1_problem();
  if (name == "barry-mercer") return barry_mercer_problem(subdivisions);
  if (name == "mandel") return mandel_problem();
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected example1, barry-mercer or mandel)");
}

}  // namespace biot
