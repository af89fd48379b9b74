#include "passage/analytic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "passage/errors.hpp"

namespace passage {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

void require_positive_time(double t, const char* what) {
  if (!(t > 0.0) || std::isnan(t)) {
    throw DomainError(std::string(what) + ": time must be > 0, got " + std::to_string(t));
  }
}

void require_nondegenerate(const LinearBoundaryProblem& p, const char* what) {
  if (p.a == p.x) {
    throw DegenerateProblemError(std::string(what) + ": start point lies on the barrier (a == x)");
  }
}

}  // namespace

double LinearBoundaryProblem::distance() const { return std::abs(a - x); }

double LinearBoundaryProblem::effective_slope() const {
  if (a > x) return b;
  if (a < x) return -b;
  return b;
}

HitRegime LinearBoundaryProblem::regime() const {
  return (a - x) * b > 0.0 ? HitRegime::defective : HitRegime::certain;
}

bool LinearBoundaryProblem::standing_regime() const {
  return (b <= 0.0 && x < a) || (b >= 0.0 && x > a);
}

double std_normal_pdf(double z) {
  if (!std::isfinite(z)) throw DomainError("std_normal_pdf: non-finite argument");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double std_normal_cdf(double z) {
  if (std::isnan(z)) throw DomainError("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double log_std_normal_cdf(double z) {
  if (std::isnan(z)) throw DomainError("log_std_normal_cdf: NaN argument");
  if (z > -30.0) return std::log(std_normal_cdf(z));
  // Mills-ratio asymptotic series; the fourth term is already below 1e-6 here.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 + std::log(kInvSqrt2Pi) - std::log(-z) + std::log(series);
}

double fpt_density(const LinearBoundaryProblem& p, double t) {
  require_positive_time(t, "fpt_density");
  require_nondegenerate(p, "fpt_density");
  if (std::isinf(t)) return 0.0;
  const double d = p.distance();
  const double z = (d + p.effective_slope() * t) / std::sqrt(t);
  return d / (t * std::sqrt(t)) * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double fpt_cdf(const LinearBoundaryProblem& p, double t) {
  require_positive_time(t, "fpt_cdf");
  require_nondegenerate(p, "fpt_cdf");
  if (std::isinf(t)) return hit_probability(p);
  const double d = p.distance();
  const double beta = p.effective_slope();
  const double sq = std::sqrt(t);
  // 1 - Phi(z1) + exp(-2 beta d) Phi(z2), second term evaluated in log space.
  const double z1 = d / sq + beta * sq;
  const double z2 = beta * sq - d / sq;
  const double first = std_normal_cdf(-z1);
  const double second = std::exp(-2.0 * beta * d + log_std_normal_cdf(z2));
  const double value = first + second;
  return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

double hit_probability(const LinearBoundaryProblem& p) {
  const double beta = p.effective_slope();
  if (p.a != p.x && beta > 0.0) return std::exp(-2.0 * beta * p.distance());
  return 1.0;
}

double fpt_mean(const LinearBoundaryProblem& p) {
  require_nondegenerate(p, "fpt_mean");
  if (p.regime() == HitRegime::defective) {
    throw RegimeError("fpt_mean: tau_1 is infinite with positive probability ((a-x)b > 0)");
  }
  if (p.b == 0.0) return std::numeric_limits<double>::infinity();
  return p.distance() / std::abs(p.b);
}

double fpt_laplace_closed(const LinearBoundaryProblem& p, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("fpt_laplace_closed: lambda must be >= 0");
  require_nondegenerate(p, "fpt_laplace_closed");
  const double beta = p.effective_slope();
  return std::exp(-p.distance() * (std::sqrt(beta * beta + 2.0 * lambda) + beta));
}

}  // namespace passage
