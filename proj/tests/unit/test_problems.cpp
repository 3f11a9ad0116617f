#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biot/problems.hpp"

namespace biot {
namespace {

// Independent long-double copy of the manufactured solution; f and g of the
// problem definition are checked against finite differences of it.
using ld = long double;
ld u1(ld x, ld y, ld t) { return 0.1L * std::exp(t) * (x + y * y * y); }
ld u2(ld x, ld y, ld t) { return 0.1L * t * t * (x * x * x + y * y * y); }
ld pex(ld x, ld y, ld t) { return 10.0L * std::exp((x + y) / 10.0L) * (1.0L + t * t * t); }

constexpr ld kStep = 1e-5L;

template <class F>
ld dx(F f, ld x, ld y, ld t) { return (f(x + kStep, y, t) - f(x - kStep, y, t)) / (2 * kStep); }
template <class F>
ld dy(F f, ld x, ld y, ld t) { return (f(x, y + kStep, t) - f(x, y - kStep, t)) / (2 * kStep); }
template <class F>
ld dt(F f, ld x, ld y, ld t) { return (f(x, y, t + kStep) - f(x, y, t - kStep)) / (2 * kStep); }
template <class F>
ld dxx(F f, ld x, ld y, ld t) {
  return (f(x + kStep, y, t) - 2 * f(x, y, t) + f(x - kStep, y, t)) / (kStep * kStep);
}
template <class F>
ld dyy(F f, ld x, ld y, ld t) {
  return (f(x, y + kStep, t) - 2 * f(x, y, t) + f(x, y - kStep, t)) / (kStep * kStep);
}
template <class F>
ld dxy(F f, ld x, ld y, ld t) {
  return (f(x + kStep, y + kStep, t) - f(x + kStep, y - kStep, t) - f(x - kStep, y + kStep, t) +
          f(x - kStep, y - kStep, t)) /
         (4 * kStep * kStep);
}

TEST(Example1, ResidualOracle) {
  const ProblemSpec ps = example1_problem();
  const PhysicalParams& prm = ps.params;
  const ld lambda = prm.lambda, mu = prm.mu, alpha = prm.alpha, c0 = prm.c0, kp = prm.k_p;
  const auto xi = [&](ld x, ld y, ld t) {
    return alpha * pex(x, y, t) - lambda * (dx(u1, x, y, t) + dy(u2, x, y, t));
  };
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ld x = unit(rng), y = unit(rng), t = unit(rng);
    // -div(2 mu eps(u)) + grad xi = f
    const ld div_sigma1 = mu * (2 * dxx(u1, x, y, t) + dyy(u1, x, y, t) + dxy(u2, x, y, t));
    const ld div_sigma2 = mu * (dxx(u2, x, y, t) + dxy(u1, x, y, t) + 2 * dyy(u2, x, y, t));
    const auto f = ps.body_force(static_cast<double>(x), static_cast<double>(y), static_cast<double>(t));
    const ld r1 = -div_sigma1 + dx(xi, x, y, t) - f[0];
    const ld r2 = -div_sigma2 + dy(xi, x, y, t) - f[1];
    // div u + xi / lambda = alpha p / lambda
    const ld r3 = dx(u1, x, y, t) + dy(u2, x, y, t) + xi(x, y, t) / lambda - alpha * pex(x, y, t) / lambda;
    // (c0 + alpha^2/lambda) p_t - alpha/lambda xi_t - div(k_p grad p) = g
    const ld r4 = (c0 + alpha * alpha / lambda) * dt(pex, x, y, t) - alpha / lambda * dt(xi, x, y, t) -
                  kp * (dxx(pex, x, y, t) + dyy(pex, x, y, t)) -
                  ps.source(static_cast<double>(x), static_cast<double>(y), static_cast<double>(t));
    for (ld r : {r1, r2, r3, r4}) worst = std::max(worst, static_cast<double>(std::fabs(r)));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Example1, ExactFieldsMatchIndependentCopy) {
  const ProblemSpec ps = example1_problem();
  ASSERT_TRUE(ps.exact.has_value());
  const auto& ex = *ps.exact;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = unit(rng), y = unit(rng), t = unit(rng);
    EXPECT_NEAR(ex.u(x, y, t)[0], static_cast<double>(u1(x, y, t)), 1e-14);
    EXPECT_NEAR(ex.u(x, y, t)[1], static_cast<double>(u2(x, y, t)), 1e-14);
    EXPECT_NEAR(ex.p(x, y, t), static_cast<double>(pex(x, y, t)), 1e-12);
    const auto g = ex.grad_u(x, y, t);
    EXPECT_NEAR(g[0], static_cast<double>(dx(u1, x, y, t)), 1e-8);
    EXPECT_NEAR(g[1], static_cast<double>(dy(u1, x, y, t)), 1e-8);
    EXPECT_NEAR(g[2], static_cast<double>(dx(u2, x, y, t)), 1e-8);
    EXPECT_NEAR(g[3], static_cast<double>(dy(u2, x, y, t)), 1e-8);
    const auto gp = ex.grad_p(x, y, t);
    EXPECT_NEAR(gp[0], static_cast<double>(dx(pex, x, y, t)), 1e-8);
    EXPECT_NEAR(gp[1], static_cast<double>(dy(pex, x, y, t)), 1e-8);
  }
}

TEST(Example1, InitialValues) {
  const ProblemSpec ps = example1_problem();
  EXPECT_DOUBLE_EQ(ps.exact->p(0.0, 0.0, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(ps.initial_pressure(0.0, 0.0), 10.0);
  for (double x : {0.0, 0.3, 1.0}) {
    for (double y : {0.0, 0.6, 1.0}) {
      EXPECT_NEAR(ps.exact->xi(x, y, 0.0), 10.0 * std::exp((x + y) / 10.0) - 0.1, 1e-13);
    }
  }
  EXPECT_EQ(ps.final_time, 1.0);
  EXPECT_NO_THROW(ps.validate());
}

TEST(Lame, Examples) {
  auto [l1, m1] = lame_from_young_poisson(1e5, 0.1);
  EXPECT_NEAR(l1, 1.1364e4, 1.0);
  EXPECT_NEAR(m1, 4.5455e4, 1.0);
  auto [l2, m2] = lame_from_young_poisson(3.0, 0.0);
  EXPECT_EQ(l2, 0.0);
  EXPECT_EQ(m2, 1.5);
  auto [l3, m3] = lame_from_young_poisson(2.0, 0.25);
  EXPECT_DOUBLE_EQ(l3, 0.8);
  EXPECT_DOUBLE_EQ(m3, 0.8);
  EXPECT_THROW(lame_from_young_poisson(1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(lame_from_young_poisson(0.0, 0.2), std::invalid_argument);
}

TEST(BarryMercer, OmegaAndSource) {
  const ProblemSpec ps = barry_mercer_problem(20);
  const double omega = barry_mercer_omega(ps.params);
  EXPECT_NEAR(omega, 0.10227, 1e-5);
  EXPECT_EQ(ps.params.c0, 0.0);
  ASSERT_TRUE(ps.point_source.has_value());
  EXPECT_EQ(ps.point_source->magnitude(0.0), 0.0);
  EXPECT_NEAR(ps.point_source->magnitude(ps.final_time), 2.0 * omega, 1e-15);
  EXPECT_NEAR(ps.final_time, std::numbers::pi / (2.0 * omega), 1e-12);
  EXPECT_GT(ps.params.storage(), 0.0);
  EXPECT_NO_THROW(ps.validate());
}

TEST(BarryMercer, RoundedLame) {
  const ProblemSpec ps = barry_mercer_problem(20, true);
  EXPECT_EQ(ps.params.lambda, 1.1e4);
  EXPECT_EQ(ps.params.mu, 4.5e4);
  EXPECT_NEAR(barry_mercer_omega(ps.params), 0.101, 1e-12);
}

TEST(Problems, ByName) {
  EXPECT_EQ(problem_by_name("example1", 8).name, "example1");
  EXPECT_EQ(problem_by_name("barry-mercer", 8).name, "barry-mercer");
  EXPECT_EQ(problem_by_name("mandel", 10).name, "mandel");
  EXPECT_THROW(problem_by_name("terzaghi", 8), std::invalid_argument);
}

TEST(Problems, ValidateRejectsFloatingPressure) {
  ProblemSpec ps = example1_problem();
  for (auto& s : ps.sides) s.pressure.reset();
  EXPECT_THROW(ps.validate(), std::invalid_argument);
  ProblemSpec free = example1_problem();
  for (auto& s : free.sides) s.displacement[1].reset();
  EXPECT_THROW(free.validate(), std::invalid_argument);
}

// --- Mandel -----------------------------------------------------------------

struct MandelFixture : ::testing::Test {
  PhysicalParams prm = mandel_physical_params();
  MandelParams mp = make_mandel_params(prm);
  double p0() const { return mp.F * mp.B * (1.0 + mp.nu_u) / 3.0; }
};

TEST_F(MandelFixture, TableParameters) {
  EXPECT_EQ(prm.lambda, 1.65e9);
  EXPECT_EQ(prm.mu, 2.475e9);
  EXPECT_EQ(prm.c0, 6.061e-11);
  EXPECT_EQ(prm.k_p, 9.869e-11);
  EXPECT_EQ(mp.F, 6.0e8);
  EXPECT_NEAR(p0(), 2.399e8, 1e5);
}

TEST_F(MandelFixture, RootResidualsAndBrackets) {
  const double nu = poisson_ratio(prm);
  const auto roots = mandel_roots(nu, mp.nu_u, 200);
  ASSERT_EQ(roots.size(), 200u);
  const long double k = (1.0L - nu) / (mp.nu_u - nu);
  const auto residual = [k](double r) {
    const long double x = r;
    return static_cast<double>(std::fabs(std::tan(x) - k * x) / (1.0L + x));
  };
  int literal_checked = 0;
  for (std::size_t n = 0; n < roots.size(); ++n) {
    const double r = roots[n];
    EXPECT_GT(r, static_cast<double>(n) * std::numbers::pi);
    EXPECT_LT(r, static_cast<double>(n) * std::numbers::pi + std::numbers::pi / 2.0);
    if (n > 0) {
      EXPECT_GT(r, roots[n - 1]);
    }
    // No neighbouring double is a better root.
    EXPECT_LE(residual(r), residual(std::nextafter(r, 0.0))) << n;
    EXPECT_LE(residual(r), residual(std::nextafter(r, 1e300))) << n;
    // Half an ulp of r moves tan by (1 + tan^2) ulp / 2.
    const double slope = 1.0 + static_cast<double>(k * k) * r * r;
    const double floor = slope * (std::nextafter(r, 1e300) - r) / (1.0 + r);
    if (floor <= 1e-10) {
      EXPECT_LE(residual(r), 1e-10) << n;
      ++literal_checked;
    } else {
      EXPECT_LE(residual(r), floor) << n;
    }
  }
  EXPECT_GE(literal_checked, 50);
  // Tends to the upper end of the bracket.
  EXPECT_LT(std::numbers::pi / 2.0 - (roots[199] - 199.0 * std::numbers::pi), 0.01);
  EXPECT_THROW(mandel_roots(0.4, 0.3, 5), std::invalid_argument);
  EXPECT_THROW(mandel_roots(0.2, 0.3, 0), std::invalid_argument);
}

TEST_F(MandelFixture, UndrainedLimits) {
  const double t = 1e-8;
  for (int i = 0; i <= 8; ++i) {
    const double x = 0.1 * i;
    EXPECT_NEAR(mandel_exact(mp, prm, x, 0.5, t).p / p0(), 1.0, 5e-3) << x;
  }
  // The truncated series misses the thin drained layer at x = a; more terms
  // push the agreement towards the edge.
  MandelParams many = mp;
  many.series_terms = 5000;
  many = make_mandel_params(prm, many);
  for (double x : {0.9, 0.95, 0.99}) {
    EXPECT_NEAR(mandel_exact(many, prm, x, 0.5, t).p / p0(), 1.0, 5e-3) << x;
  }
  const double u2_top = -mp.F * (1.0 - mp.nu_u) / (2.0 * prm.mu) * mp.b;
  EXPECT_NEAR(u2_top, -0.06788, 1e-5);
  EXPECT_NEAR(mandel_exact(mp, prm, 0.5, mp.b, t).u2 / u2_top, 1.0, 5e-3);
  EXPECT_NEAR(mp.F * mp.nu_u / (2.0 * prm.mu), 0.05333, 1e-5);
  const MandelValue at0 = mandel_exact(mp, prm, 1.0, 0.3, 0.0);
  EXPECT_NEAR(at0.u1, 0.05333, 1e-5);
  EXPECT_DOUBLE_EQ(at0.p, p0());
}

TEST_F(MandelFixture, DrainedLimit) {
  EXPECT_LE(std::abs(mandel_exact(mp, prm, 0.3, 0.5, 100.0).p), 0.01 * p0());
}

TEST_F(MandelFixture, SeriesSelfConsistency) {
  MandelParams hundred = mp;
  hundred.series_terms = 100;
  hundred.roots.resize(100);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> xs(0.0, 1.0), ts(0.01, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double x = xs(rng), t = ts(rng);
    const double a = mandel_exact(mp, prm, x, 0.5, t).p;
    const double b = mandel_exact(hundred, prm, x, 0.5, t).p;
    EXPECT_LE(std::abs(a - b), 1e-8 * std::abs(a)) << "x=" << x << " t=" << t;
  }
}

TEST_F(MandelFixture, ProblemBoundaryData) {
  const ProblemSpec ps = mandel_problem();
  EXPECT_NO_THROW(ps.validate());
  const auto& top = ps.side(BoundaryTag::Gamma4).displacement[1];
  ASSERT_TRUE(top.has_value());
  EXPECT_NEAR((*top)(0.4, 1.0, 0.0), -0.06788, 1e-5);
  EXPECT_DOUBLE_EQ(ps.initial_pressure(0.7, 0.2), p0());
  EXPECT_TRUE(ps.side(BoundaryTag::Gamma1).pressure.has_value());
  EXPECT_FALSE(ps.side(BoundaryTag::Gamma3).pressure.has_value());
  EXPECT_EQ(ps.default_subdivisions, 10);
  EXPECT_EQ(ps.default_steps, 1000);
}

}  // namespace
}  // namespace biot
