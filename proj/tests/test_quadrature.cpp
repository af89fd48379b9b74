#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "passage/analytic.hpp"
#include "passage/errors.hpp"
#include "passage/npass.hpp"
#include "passage/quadrature.hpp"

using namespace passage;

namespace {

constexpr double kPi = std::numbers::pi;

void check_contract(const IntegralEstimate& est, const QuadConfig& cfg) {
  CHECK(est.error_estimate >= 0.0);
  if (est.converged) {
    CHECK(est.error_estimate <= std::max(cfg.rel_tol * std::abs(est.value), cfg.abs_tol));
  }
}

struct ClosedForm {
  Integrand f;
  double lo;
  double hi;
  double exact;
  // Mass inside the last representable ulp next to a singular endpoint; no rule can see it.
  double floor = 0.0;
};

std::vector<ClosedForm> closed_forms() {
  return {
      {[](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0, 2.0},
      {[](double u) { return 1.0 / (kPi * std::sqrt(u * (1.0 - u))); }, 0.0, 1.0, 1.0,
       2.0 * std::sqrt(std::numeric_limits<double>::epsilon() / 2) / kPi},
      {[](double t) { return 12.0 * t * t; }, 0.0, 1.0, 4.0},
      {[](double t) { return std::exp(-t); }, 0.0, 3.0, 1.0 - std::exp(-3.0)},
      {[](double t) { return std::cos(t); }, 0.0, 2.0, std::sin(2.0)},
  };
}

}  // namespace

TEST_CASE("integrate_finite examples") {
  const QuadConfig cfg;
  for (const auto& c : closed_forms()) {
    const auto est = integrate_finite(c.f, c.lo, c.hi, cfg);
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(c.exact).epsilon(1e-8));
    check_contract(est, cfg);
  }
}

TEST_CASE("integrate_finite never samples the endpoints") {
  const auto est = integrate_finite(
      [](double t) {
        REQUIRE(t > 0.0);
        REQUIRE(t < 1.0);
        return std::log(t);
      },
      0.0, 1.0);
  CHECK(est.value == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("NaN from the integrand is reported") {
  CHECK_THROWS_AS(integrate_finite([](double t) { return t > 0.5 ? std::nan("") : 1.0; }, 0, 1),
                  NumericalError);
  try {
    integrate_finite([](double) { return std::nan(""); }, 0, 1);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("at abscissa") != std::string::npos);
  }
}

TEST_CASE("exhausted subdivision budget returns the best estimate") {
  QuadConfig cfg{1e-14, 0.0, 3};
  const auto est = integrate_finite([](double t) { return std::sin(1.0 / t) / t; }, 1e-4, 1.0, cfg);
  CHECK_FALSE(est.converged);
  CHECK(std::isfinite(est.value));
  CHECK_THROWS_AS(require_converged(est, cfg, "probe"), NumericalError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(integrate_finite([](double t) { return t; }, 0, 1, {0.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(integrate_finite([](double t) { return t; }, 0, 1, {1e-8, -1.0}), ParameterError);
  CHECK_THROWS_AS(integrate_finite([](double t) { return t; }, 0, 1, {1e-8, 0.0, 0}),
                  ParameterError);
  CHECK_THROWS_AS(integrate_finite([](double t) { return t; }, 1, 0), DomainError);
  QuadConfig cfg;
  cfg.inner_tol_relaxation = 10.0;
  CHECK(cfg.inner().rel_tol == doctest::Approx(cfg.rel_tol / 10.0));
}

TEST_CASE("integrate_sqrt_endpoint examples") {
  const QuadConfig cfg{1e-11, 1e-14};
  auto a = integrate_sqrt_endpoint([](double s) { return 1.0 / std::sqrt(1.0 - s); }, 0, 1,
                                   SingularEnd::hi, cfg);
  CHECK(a.value == doctest::Approx(2.0).epsilon(1e-10));
  auto b = integrate_sqrt_endpoint([](double s) { return 1.0 / std::sqrt(s * (1.0 - s)); }, 0, 1,
                                   SingularEnd::both, cfg);
  CHECK(b.value == doctest::Approx(kPi).epsilon(1e-10));
  auto c = integrate_sqrt_endpoint([](double s) { return 1.0 / std::sqrt(s); }, 0, 1,
                                   SingularEnd::lo, cfg);
  CHECK(c.value == doctest::Approx(2.0).epsilon(1e-10));
  const Integrand g = [](double s) {
    return std::exp(-1.0 / (2.0 * s)) / (s * std::sqrt(1.0 - s));
  };
  const auto via_map = integrate_sqrt_endpoint(g, 0, 1, SingularEnd::hi, cfg);
  const auto direct = integrate_finite(g, 0, 1, cfg);
  CHECK(std::abs(via_map.value - direct.value) <= 1e-7);
  check_contract(via_map, cfg);
}

TEST_CASE("integrate_semi_infinite examples") {
  const QuadConfig cfg{1e-11, 1e-14};
  CHECK(integrate_semi_infinite([](double t) { return std::exp(-t); }, 0, cfg).value ==
        doctest::Approx(1.0).epsilon(1e-10));
  const auto mass = integrate_semi_infinite(
      [](double t) { return std::pow(t, -1.5) * std_normal_pdf(1.0 / std::sqrt(t)); }, 0, cfg);
  CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(integrate_semi_infinite([](double t) { return std::exp(-t * t / 2); }, 0, cfg).value ==
        doctest::Approx(std::sqrt(kPi / 2)).epsilon(1e-10));
  CHECK(integrate_semi_infinite([](double t) { return std::exp(-t); }, 2.0, cfg).value ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("non-decaying tail is flagged") {
  const auto est = integrate_semi_infinite([](double t) { return 1.0 / (1.0 + t); }, 0);
  CHECK_FALSE(est.converged);
}

TEST_CASE("laplace_numeric examples") {
  const QuadConfig cfg{1e-11, 1e-14};
  CHECK(laplace_numeric([](double t) { return std::exp(-t); }, 1.0, cfg).value ==
        doctest::Approx(0.5).epsilon(1e-10));
  const LinearBoundaryProblem p{1, 0, 0};
  const Integrand f = [&](double t) { return fpt_density(p, t); };
  CHECK(laplace_numeric(f, 0.5, cfg).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(laplace_numeric(f, 0.0, cfg).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(laplace_numeric(f, -1.0, cfg), DomainError);
}

TEST_CASE("linearity") {
  const Integrand f = [](double t) { return std::exp(-t) * std::cos(3 * t); };
  const Integrand g = [](double t) { return 1.0 / (1.0 + t * t); };
  const QuadConfig cfg{1e-13, 1e-15};
  for (double alpha : {-2.0, 0.5, 3.0}) {
    for (double beta : {-1.0, 0.25, 7.0}) {
      const double lhs =
          integrate_finite([&](double t) { return alpha * f(t) + beta * g(t); }, 0, 4, cfg).value;
      const double rhs = alpha * integrate_finite(f, 0, 4, cfg).value +
                         beta * integrate_finite(g, 0, 4, cfg).value;
      CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
  }
}

TEST_CASE("halving the tolerance never increases the true error") {
  for (const auto& c : closed_forms()) {
    double prev_err = std::numeric_limits<double>::infinity();
    for (double rel = 1e-3; rel > 1e-13; rel /= 2) {
      const double err =
          std::abs(integrate_finite(c.f, c.lo, c.hi, {rel, 0.0, 5000}).value - c.exact);
      // Slack of a few ulps once both errors are at rounding level.
      CHECK(err <= std::max(prev_err, c.floor) +
                       8 * std::numeric_limits<double>::epsilon() * std::abs(c.exact));
      prev_err = std::min(prev_err, err);
    }
  }
}

TEST_CASE("nested integrals are stable under inner tolerance relaxation") {
  for (double b : {0.0, -1.0}) {
    const LinearBoundaryProblem p{1, b, 0};
    for (double t : {0.5, 3.0}) {
      QuadConfig cfg;
      std::vector<double> values;
      for (double relax : {1.0, 10.0, 100.0}) {
        cfg.inner_tol_relaxation = relax;
        values.push_back(t2_cdf(p, t, cfg));
      }
      for (double v : values) CHECK(std::abs(v - values[1]) <= 5 * cfg.rel_tol * std::abs(values[1]));
    }
  }
}

TEST_CASE("adjacent pieces combine") {
  const Integrand f = [](double t) { return t * t; };
  const auto sum = integrate_finite(f, 0, 1) + integrate_finite(f, 1, 2);
  CHECK(sum.value == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(sum.converged);
}
