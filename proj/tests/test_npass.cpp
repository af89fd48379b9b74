#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "passage/analytic.hpp"
#include "passage/errors.hpp"
#include "passage/npass.hpp"
#include "passage/quadrature.hpp"

using namespace passage;

namespace {

constexpr double kPi = std::numbers::pi;

LinearBoundaryProblem problem(double d, double b) { return {d, b, 0.0}; }

double arcsine_cdf(double z) { return 2.0 / kPi * std::asin(std::sqrt(z)); }

}  // namespace

TEST_CASE("last-passage density examples") {
  CHECK(last_passage_density(problem(1, 0), 1, 0.5) == doctest::Approx(2 / kPi).epsilon(1e-15));
  CHECK(last_passage_density(problem(1, -1), 1, 0.5) ==
        doctest::Approx(0.614832523000282099890).epsilon(1e-13));
  CHECK_THROWS_AS(last_passage_density(problem(1, 0), 1, 0.0), DomainError);
  CHECK_THROWS_AS(last_passage_density(problem(1, 0), 1, 1.0), DomainError);
  CHECK_THROWS_AS(last_passage_density(problem(1, 0), 1, 1.5), DomainError);
}

TEST_CASE("last-passage density is a probability density") {
  const QuadConfig cfg{1e-12, 1e-15};
  for (double t : {0.3, 1.0, 7.0}) {
    const auto est = last_passage_cdf(problem(1, 0), t, t, cfg);
    CHECK(std::abs(est.value - 1.0) <= 1e-10);
    for (double z : {0.1, 0.5, 0.9}) {
      CHECK(last_passage_cdf(problem(1, 0), t, z * t, cfg).value ==
            doctest::Approx(arcsine_cdf(z)).epsilon(1e-10));
    }
  }
  for (double b : {-0.3, -1.0, -2.0, -5.0}) {
    for (double t : {0.5, 1.0, 4.0}) {
      CHECK(std::abs(last_passage_cdf(problem(1, b), t, t).value - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("last-passage density does not depend on the barrier level") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double b = -3.0 * u(rng);
    const double a = 0.1 + 3.0 * u(rng);
    const double t = 0.01 + 20.0 * u(rng);
    const double s = t * (0.001 + 0.998 * u(rng));
    CHECK(last_passage_density({a, b, 0}, t, s) == last_passage_density({a + 1, b, 0}, t, s));
  }
}

TEST_CASE("conditional second-passage law") {
  const auto p = problem(1, 0);
  CHECK(t2_cdf_conditional(p, 1, 1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(t2_cdf_conditional(p, 1, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(t2_cdf_conditional(p, 1e12, 1) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(t2_conditional_density(p, 1, 1) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-14));
  CHECK(t2_conditional_density(p, 1, 4) == doctest::Approx(2 / (5 * kPi)).epsilon(1e-14));
  const auto mass = integrate_semi_infinite(
      [&](double t) { return t2_conditional_density(p, t, 1.0); }, 0.0, {1e-10, 1e-14});
  CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-8));
  // Conditional density is the t-derivative of the conditional CDF.
  for (double b : {0.0, -0.7}) {
    for (double s : {0.5, 2.0}) {
      for (double t : {0.3, 1.0, 5.0}) {
        const double h = 1e-4 * t;
        const auto q = problem(1, b);
        const double fd =
            (t2_cdf_conditional(q, t + h, s, {1e-12, 1e-15}) -
             t2_cdf_conditional(q, t - h, s, {1e-12, 1e-15})) / (2 * h);
        CHECK(fd == doctest::Approx(t2_conditional_density(q, t, s)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("second-passage distribution function") {
  const auto p = problem(1, 0);
  CHECK(t2_cdf(p, 0.0) == 0.0);
  CHECK(t2_cdf(p, 1e14) > 1 - 1e-5);
  const double oracle[] = {0.151781737586571931876, 0.372467546473586035324,
                           0.639576047823936085292};
  const double ts[] = {0.1, 1.0, 10.0};
  for (int i = 0; i < 3; ++i) {
    const double nested = t2_cdf(p, ts[i]);
    const double arccos = t2_cdf_arccos(p, ts[i]);
    CHECK(std::abs(nested - arccos) <= 1e-6);
    CHECK(std::abs(arccos - oracle[i]) <= 1e-8);
  }
  CHECK_THROWS_AS(t2_cdf_arccos(problem(1, -1), 1.0), ParameterError);
  CHECK(t2_cdf(problem(1, -1), 1e12) == doctest::Approx(1 - t2_defect(problem(1, -1))).epsilon(1e-5));
  CHECK(tn_cdf(p, 2, 1.0) == doctest::Approx(t2_cdf(p, 1.0)).epsilon(1e-12));
  CHECK(tn_cdf(p, 1, 1.0) == doctest::Approx(fpt_cdf(p, 1.0)).epsilon(1e-12));
}

TEST_CASE("second-passage density") {
  const auto p = problem(1, 0);
  CHECK(t2_density(p, 1.0) == doctest::Approx(0.117197903397524100287).epsilon(1e-7));
  std::vector<double> scaled;
  for (double t : {1e-4, 1e-5, 1e-6}) scaled.push_back(std::sqrt(t) * t2_density(p, t));
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo - 1.0 <= 0.05);
  for (double b : {0.0, -1.0}) {
    const auto q = problem(1, b);
    for (double t : {0.05, 1.0, 20.0}) {
      const double h = 1e-3 * t;
      const double fd = (t2_cdf(q, t + h, {1e-11, 1e-15}) - t2_cdf(q, t - h, {1e-11, 1e-15})) / (2 * h);
      CHECK(std::abs(fd - t2_density(q, t)) <= 1e-4 * std::max(1.0, t2_density(q, t)));
    }
  }
}

TEST_CASE("defect and its Jensen bound") {
  CHECK(t2_defect(problem(1, 0)) == 0.0);
  CHECK(gamma_bound(problem(1, 0)) == 0.0);
  CHECK(gamma_bound(problem(1, -1)) == doctest::Approx(0.682689492137085897).epsilon(1e-14));
  CHECK(t2_defect(problem(1, -1)) == doctest::Approx(0.602147307626416523655).epsilon(1e-8));
  CHECK(t2_defect(problem(1, -2)) == doctest::Approx(0.783299686443567187828).epsilon(1e-8));
  CHECK(t2_defect(problem(1, -0.5)) == doctest::Approx(0.429706825697332361393).epsilon(1e-8));
  for (double b : {-2.0, -1.0, -0.5, -0.1}) {
    const auto p = problem(1, b);
    CHECK(t2_defect(p) > 0.0);
    CHECK(t2_defect(p) <= gamma_bound(p));
    CHECK(gamma_bound(p) == gamma_bound(LinearBoundaryProblem{-1, -b, 0}));
  }
  CHECK_THROWS_AS(t2_defect(problem(1, 0.5)), RegimeError);
}

TEST_CASE("steep drift") {
  const auto p = problem(1, -10);
  CHECK(t2_defect(p) == doctest::Approx(0.995653039738753153544).epsilon(1e-8));
  CHECK(t2_cdf(p, 1e3) + t2_defect(p) == doctest::Approx(1.0).epsilon(1e-6));
  for (double b : {-1e4, -1e100, -1.7e308}) {
    const double v = last_passage_density(problem(1, b), 1.0, 0.5);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("tau2 density and transform") {
  const auto p = problem(1, 0);
  CHECK(tau2_density(p, 1.0) == doctest::Approx(0.152451605991435683897).epsilon(1e-7));
  CHECK(tau2_laplace(p, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tau2_laplace(p, 1.0) == doctest::Approx(0.124535360149672386497).epsilon(1e-7));
  for (double b : {0.0, -0.5, -1.0, -2.0}) {
    const auto q = problem(1, b);
    const auto mass = integrate_semi_infinite([&](double t) { return tau2_density(q, t); }, 0.0,
                                              {1e-7, 1e-12});
    CHECK(std::abs(mass.value - (1 - t2_defect(q))) <= 1e-4);
  }
  const auto q = problem(1, -1);
  CHECK(tau2_laplace(q, 0.0) == doctest::Approx(1 - t2_defect(q)).epsilon(1e-5));
  for (double lambda : {0.25, 1.0, 4.0}) {
    CHECK(tau2_laplace(p, lambda) < fpt_laplace_closed(p, lambda));
  }
}

TEST_CASE("second-passage mean diverges at zero drift") {
  const auto p = problem(1, 0);
  const QuadConfig cfg{1e-7, 1e-12};
  auto partial = [&](double big_t) {
    return integrate_finite(
               [&](double y) {
                 const double t = std::exp(y);
                 return t * t * t2_density(p, t, cfg);
               },
               std::log(1e-8), std::log(big_t), cfg)
        .value;
  };
  const double m2 = partial(1e2);
  const double m3 = partial(1e3);
  const double m4 = partial(1e4);
  CHECK(m3 > m2 * 1.01);
  CHECK(m4 > m3 * 1.01);
  // Tail t f(t) ~ t^-1/2: increments grow with each decade instead of shrinking.
  CHECK((m4 - m3) / (m3 - m2) > 2.0);
}

TEST_CASE("nth-passage curves") {
  const auto p = problem(1, 0);
  const auto grid = default_passage_grid(p);
  REQUIRE(grid.size() == 400);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e4));
  CHECK(default_passage_grid(problem(2, 0)).back() == doctest::Approx(4e4));

  const auto c1 = nth_passage_density(p, 1, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(c1.values()[i] - fpt_density(p, grid[i])) <= 1e-12);
  }
  const auto c2 = nth_passage_density(p, 2, grid);
  const auto c2r = passage_recursion_step(p, c1, 2);
  double peak1 = 0, peak2 = 0, arg1 = 0, arg2 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(c2r.values()[i] - c2.values()[i]) <= 1e-4);
    if (c1.values()[i] > peak1) peak1 = c1.values()[i], arg1 = grid[i];
    if (c2.values()[i] > peak2) peak2 = c2.values()[i], arg2 = grid[i];
  }
  CHECK(arg2 > arg1);
  CHECK(peak2 < peak1);

  // P(tau_3 <= 1e4) = 0.92003 at b = 0 (independent integral of f_tau2 against the conditional
  // arcsine law); the 1e4 grid therefore cannot hold 0.95 of the mass.
  const auto c3 = nth_passage_density(p, 3, grid);
  CHECK(std::abs(c3.trapezoid_mass() - 0.92003) <= 2e-3);
  CHECK(c3.resolution_warning());
  CHECK(c3.defect_mass() == doctest::Approx(1 - c3.trapezoid_mass()));
  const auto wide = log_grid(1e-3, 1e6, 500);
  const auto c3w = nth_passage_density(p, 3, wide);
  CHECK(std::abs(c3w.trapezoid_mass() - 0.98590) <= 2e-3);
  CHECK(c3w.trapezoid_mass() >= 0.95);

  CHECK_THROWS_AS(nth_passage_density(p, 0, grid), ParameterError);
  CHECK_THROWS_AS(nth_passage_density(p, kMaxPassageOrder + 1, grid), ParameterError);
}

TEST_CASE("regime guard") {
  CHECK_THROWS_AS(t2_density(problem(1, 0.5), 1.0), RegimeError);
  CHECK_THROWS_AS(tau2_density(problem(1, 0.5), 1.0), RegimeError);
  CHECK_NOTHROW(t2_density(LinearBoundaryProblem{-1, 0.5, 0}, 1.0));
}
