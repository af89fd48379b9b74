#pragma once

#include <cstddef>
#include <functional>

namespace passage {

using Integrand = std::function<double(double)>;

struct QuadConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t max_subdivisions = 2000;
  /// Inner integrals of a two-level nested quadrature run at rel_tol / inner_tol_relaxation.
  double inner_tol_relaxation = 10.0;

  /// Configuration for the inner level of a nested integral.
  QuadConfig inner() const;
  void validate() const;
};

struct IntegralEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

enum class SingularEnd { lo, hi, both };

/// Globally adaptive Gauss-Kronrod (10/21) on (lo, hi). Endpoints are never sampled, so
/// integrable endpoint singularities are allowed. Throws NumericalError if f returns NaN.
IntegralEstimate integrate_finite(const Integrand& f, double lo, double hi,
                                  const QuadConfig& cfg = {});

/// Removes an inverse-square-root endpoint singularity with s = lo + w^2 and/or s = hi - w^2.
IntegralEstimate integrate_sqrt_endpoint(const Integrand& f, double lo, double hi,
                                         SingularEnd singular_end, const QuadConfig& cfg = {});

/// Integral over (lo, inf) through u = lo + scale * w / (1 - w). The mapped integrand is
/// integrated with the square-root rule at w = 1 so algebraic tails down to u^-1.5 stay regular.
/// A tail that does not decay faster than 1/u reports converged = false.
IntegralEstimate integrate_semi_infinite(const Integrand& f, double lo,
                                         const QuadConfig& cfg = {}, double scale = 1.0);

/// int_0^inf exp(-lambda t) density(t) dt.
IntegralEstimate laplace_numeric(const Integrand& density, double lambda,
                                 const QuadConfig& cfg = {}, double scale = 1.0);

/// Combines two estimates of adjacent pieces of one integral.
/// Value of est, or NumericalError when it did not converge and its error exceeds 100x the
/// requested tolerance.
double require_converged(const IntegralEstimate& est, const QuadConfig& cfg, const char* what);

IntegralEstimate operator+(const IntegralEstimate& lhs, const IntegralEstimate& rhs);

}  // namespace passage
