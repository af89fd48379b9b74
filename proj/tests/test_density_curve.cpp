#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "passage/analytic.hpp"
#include "passage/density_curve.hpp"
#include "passage/errors.hpp"

using namespace passage;

TEST_CASE("grids") {
  const auto g = log_grid(1e-3, 1e4, 400);
  REQUIRE(g.size() == 400);
  CHECK(g.front() == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(g.back() == doctest::Approx(1e4).epsilon(1e-14));
  for (std::size_t i = 2; i < g.size(); ++i) {
    CHECK(g[i] > g[i - 1]);
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-10));
  }
  const auto l = linear_grid(0.0, 1.0, 11);
  CHECK(l[5] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 10), ParameterError);
  CHECK_THROWS_AS(log_grid(1.0, 1.0, 10), ParameterError);
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 1), ParameterError);
}

TEST_CASE("trapezoid rule") {
  const std::vector<double> x{0, 1, 3};
  const std::vector<double> y{0, 2, 2};
  CHECK(trapezoid(x, y) == doctest::Approx(5.0));
  const auto g = linear_grid(0, 1, 1001);
  std::vector<double> v;
  for (double t : g) v.push_back(t);
  CHECK(trapezoid(g, v) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("curve invariants are enforced") {
  CHECK_THROWS_AS(DensityCurve({1, 2}, {1}, 0, "x"), ParameterError);
  CHECK_THROWS_AS(DensityCurve({1, 1}, {1, 1}, 0, "x"), ParameterError);
  CHECK_THROWS_AS(DensityCurve({0, 1}, {1, 1}, 0, "x"), ParameterError);
  CHECK_THROWS_AS(DensityCurve({1, 2}, {-1e-3, 1}, 0, "x"), ParameterError);
  CHECK_THROWS_AS(DensityCurve({1, 2}, {1, 1}, 1.5, "x"), ParameterError);
  // Mass 2 on [1, 3] plus zero defect exceeds 1.
  CHECK_THROWS_AS(DensityCurve({1, 3}, {1, 1}, 0, "x"), ParameterError);
  const DensityCurve c({1, 2}, {0.5, 0.5}, 0.5, "half", true);
  CHECK(c.trapezoid_mass() == doctest::Approx(0.5));
  CHECK(c.defect_mass() == 0.5);
  CHECK(c.label() == "half");
  CHECK(c.resolution_warning());
}

TEST_CASE("monotone interpolant reproduces nodes and stays nonnegative") {
  const LinearBoundaryProblem p{1, 0, 0};
  const auto g = log_grid(1e-2, 1e3, 300);
  std::vector<double> v;
  for (double t : g) v.push_back(fpt_density(p, t));
  const DensityCurve c(g, v, 0.0, "tau1");
  const CurveInterpolant f(c);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(f(g[i]) == doctest::Approx(v[i]).epsilon(1e-12));
  CHECK(f(g.front() / 2) == 0.0);
  CHECK(f(g.back() * 2) == 0.0);
  const double peak = *std::max_element(v.begin(), v.end());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(std::log(g.front()), std::log(g.back()));
  for (int i = 0; i < 2000; ++i) {
    const double t = std::exp(u(rng));
    const double y = f(t);
    CHECK(y >= 0.0);
    CHECK(std::abs(y - fpt_density(p, t)) <= 1e-4 * peak);
  }
}

TEST_CASE("interpolant does not overshoot monotone data") {
  const std::vector<double> g{1, 2, 3, 4, 5, 6};
  const std::vector<double> v{0, 0, 0, 0.1, 0.1, 0.1};
  const DensityCurve c(g, v, 0.5, "step");
  const CurveInterpolant f(c);
  for (double t = 1.0; t <= 6.0; t += 0.01) {
    CHECK(f(t) >= 0.0);
    CHECK(f(t) <= 0.1 + 1e-15);
  }
  CHECK_THROWS_AS(CurveInterpolant(DensityCurve({1, 2, 3}, {0, 0, 0}, 0, "short")), ParameterError);
}
