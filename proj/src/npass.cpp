#include "passage/npass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "passage/errors.hpp"

namespace passage {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110452530069867406099;

void require_standing(const LinearBoundaryProblem& p, const char* what) {
  if (p.a == p.x) throw DegenerateProblemError(std::string(what) + ": a == x");
  if (!p.standing_regime()) {
    throw RegimeError(std::string(what) +
                      ": requires (b <= 0 and x < a) or (b >= 0 and x > a)");
  }
}

// 2 sgn(b) (Phi(b sqrt(s)) - 1/2) written without cancellation.
double no_return_probability(double b, double s) {
  if (b == 0.0) return 0.0;
  return std::erf(std::abs(b) * std::sqrt(0.5 * s));
}

// Where the tau_1 law sits: d^2 without drift, the mean d / |b| once drift dominates.
double time_scale(const LinearBoundaryProblem& p) {
  const double d = p.distance();
  return p.b == 0.0 ? d * d : std::min(d * d, d / std::abs(p.b));
}

}  // namespace

double last_passage_density(const LinearBoundaryProblem& p, double t, double u) {
  if (!(u > 0.0 && u < t)) throw DomainError("last_passage_density: need 0 < u < t");
  const double b = p.b;
  const double r = t - u;
  // The bracket grows at most linearly in |b|; once the prefactor underflows the product is 0.
  const double prefactor = std::exp(-0.5 * b * b * u);
  if (prefactor == 0.0) return 0.0;
  const double bracket =
      std::exp(-0.5 * b * b * r) + 0.5 * b * std::sqrt(2.0 * std::numbers::pi * r) *
                                       std::erf(b * std::sqrt(0.5 * r));
  return prefactor / (std::numbers::pi * std::sqrt(u * r)) * bracket;
}

IntegralEstimate last_passage_cdf(const LinearBoundaryProblem& p, double t, double z,
                                  const QuadConfig& cfg) {
  if (!(t > 0.0)) throw DomainError("last_passage_cdf: t must be > 0");
  if (z <= 0.0) return {0.0, 0.0, 0, true};
  const double hi = std::min(z, t);
  return integrate_sqrt_endpoint([&](double u) { return last_passage_density(p, t, u); }, 0.0,
                                 hi, SingularEnd::both, cfg);
}

IntegralEstimate no_touch_probability(const LinearBoundaryProblem& p, double s, double t,
                                      const QuadConfig& cfg) {
  if (!(s > 0.0)) throw DomainError("no_touch_probability: s must be > 0");
  if (!(t >= 0.0)) throw DomainError("no_touch_probability: t must be >= 0");
  if (std::isinf(t)) return {no_return_probability(p.b, s), 0.0, 0, true};
  const double horizon = s + t;
  return integrate_sqrt_endpoint([&](double y) { return last_passage_density(p, horizon, y); },
                                 0.0, s, SingularEnd::both, cfg);
}

double t2_cdf_conditional(const LinearBoundaryProblem& p, double t, double s,
                          const QuadConfig& cfg) {
  require_standing(p, "t2_cdf_conditional");
  const IntegralEstimate g = no_touch_probability(p, s, t, cfg);
  return 1.0 - require_converged(g, cfg, "t2_cdf_conditional");
}

double t2_cdf(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg) {
  require_standing(p, "t2_cdf");
  if (!(t >= 0.0)) throw DomainError("t2_cdf: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return 1.0 - t2_defect(p, cfg);
  const QuadConfig inner = cfg.inner();
  const Integrand outer = [&](double s) {
    const double f1 = fpt_density(p, s);
    if (f1 == 0.0) return 0.0;
    return f1 * require_converged(no_touch_probability(p, s, t, inner), inner, "t2_cdf inner");
  };
  const double survival = require_converged(integrate_semi_infinite(outer, 0.0, cfg, time_scale(p)), cfg, "t2_cdf");
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

double t2_cdf_arccos(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg) {
  require_standing(p, "t2_cdf_arccos");
  if (p.b != 0.0) throw ParameterError("t2_cdf_arccos: closed inner form holds only for b = 0");
  if (!(t >= 0.0)) throw DomainError("t2_cdf_arccos: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  const Integrand f = [&](double s) {
    return 2.0 / std::numbers::pi * std::acos(std::sqrt(s / (s + t))) * fpt_density(p, s);
  };
  return require_converged(integrate_semi_infinite(f, 0.0, cfg, time_scale(p)), cfg, "t2_cdf_arccos");
}

double t2_conditional_density(const LinearBoundaryProblem& p, double t, double s) {
  if (!(t > 0.0) || !(s > 0.0)) throw DomainError("t2_conditional_density: need t > 0, s > 0");
  const double b = p.b;
  return std::exp(-0.5 * b * b * (s + t)) * std::sqrt(s) / (std::numbers::pi * (s + t) * std::sqrt(t));
}

double t2_density(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg) {
  require_standing(p, "t2_density");
  if (!(t > 0.0)) throw DomainError("t2_density: t must be > 0");
  const Integrand f = [&](double s) {
    const double f1 = fpt_density(p, s);
    return f1 == 0.0 ? 0.0 : f1 * t2_conditional_density(p, t, s);
  };
  return require_converged(integrate_semi_infinite(f, 0.0, cfg, time_scale(p)), cfg, "t2_density");
}

double t2_defect(const LinearBoundaryProblem& p, const QuadConfig& cfg) {
  require_standing(p, "t2_defect");
  if (p.b == 0.0) return 0.0;
  const Integrand f = [&](double s) {
    const double f1 = fpt_density(p, s);
    return f1 == 0.0 ? 0.0 : no_return_probability(p.b, s) * f1;
  };
  return require_converged(integrate_semi_infinite(f, 0.0, cfg, time_scale(p)), cfg, "t2_defect");
}

double gamma_bound(const LinearBoundaryProblem& p) {
  if (p.b == 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * p.distance() * std::abs(p.b)));
}

double tau2_density(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg) {
  require_standing(p, "tau2_density");
  if (!(t > 0.0)) throw DomainError("tau2_density: t must be > 0");
  const double d = p.distance();
  const double beta = p.effective_slope();
  const Integrand g = [&](double s) {
    if (!(s > 0.0)) return 0.0;
    const double z = d + beta * s;
    const double e = std::exp(-z * z / (2.0 * s));
    if (e == 0.0) return 0.0;
    return d * e / (kSqrt2Pi * s * std::sqrt(t - s));
  };
  // Decades up to t/2 carry the peak near s ~ d^2 and the 1/s tail; the last half gets the
  // square-root rule for (t - s)^-1/2.
  const double half = 0.5 * t;
  IntegralEstimate est = integrate_sqrt_endpoint(g, half, t, SingularEnd::hi, cfg);
  double lo = 0.0;
  double hi = std::min(d * d, half);
  while (true) {
    est = est + integrate_finite(g, lo, hi, cfg);
    if (hi >= half) break;
    lo = hi;
    hi = std::min(10.0 * hi, half);
  }
  const double inner = require_converged(est, cfg, "tau2_density");
  return std::exp(-0.5 * p.b * p.b * t) / (std::numbers::pi * t) * inner;
}

double tau2_laplace(const LinearBoundaryProblem& p, double lambda, const QuadConfig& cfg) {
  require_standing(p, "tau2_laplace");
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double t) { return tau2_density(p, t, inner); };
  return require_converged(laplace_numeric(f, lambda, cfg, time_scale(p)), cfg, "tau2_laplace");
}

std::vector<double> default_passage_grid(const LinearBoundaryProblem& p) {
  const double scale = time_scale(p);
  if (!(scale > 0.0)) throw DegenerateProblemError("default_passage_grid: a == x");
  return log_grid(1e-3 * scale, 1e4 * scale, 400);
}

namespace {

DensityCurve make_passage_curve(const LinearBoundaryProblem& p, std::vector<double> grid,
                                std::vector<double> values, std::string label) {
  const double mass = trapezoid(grid, values);
  const double deficit = std::clamp(1.0 - mass, 0.0, 1.0);
  const bool warn = p.b == 0.0 && deficit > 0.05;
  return DensityCurve(std::move(grid), std::move(values), deficit, std::move(label), warn);
}

}  // namespace

DensityCurve passage_recursion_step(const LinearBoundaryProblem& p, const DensityCurve& prev,
                                    std::size_t order, const QuadConfig& cfg) {
  require_standing(p, "passage_recursion_step");
  const CurveInterpolant f_prev(prev);
  const std::vector<double>& grid = prev.grid();
  const double b2 = p.b * p.b;
  std::vector<double> values(grid.size(), 0.0);

  // Cell-by-cell over the previous grid: the interpolant is smooth inside a cell, and the
  // (t - s)^-1/2 factor only matters in the last cell, which gets the square-root rule.
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t = grid[k];
    const Integrand kernel = [&](double s) {
      const double fs = f_prev(s);
      if (fs == 0.0) return 0.0;
      return std::sqrt(s) / (t * std::sqrt(t - s)) * fs;
    };
    double acc = 0.0;
    for (std::size_t c = 1; c < k; ++c) {
      acc += integrate_finite(kernel, grid[c - 1], grid[c], cfg).value;
    }
    acc += integrate_sqrt_endpoint(kernel, grid[k - 1], t, SingularEnd::hi, cfg).value;
    values[k] = std::max(0.0, std::exp(-0.5 * b2 * t) / std::numbers::pi * acc);
  }
  return make_passage_curve(p, grid, std::move(values), "tau" + std::to_string(order) + ":recursion");
}

DensityCurve nth_passage_density(const LinearBoundaryProblem& p, std::size_t n,
                                 std::span<const double> grid, const QuadConfig& cfg) {
  require_standing(p, "nth_passage_density");
  if (n == 0 || n > kMaxPassageOrder) {
    throw ParameterError("nth_passage_density: n must be in [1, " +
                         std::to_string(kMaxPassageOrder) + "]");
  }
  std::vector<double> g(grid.begin(), grid.end());
  std::vector<double> values(g.size());
  if (n == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) values[i] = fpt_density(p, g[i]);
    return make_passage_curve(p, std::move(g), std::move(values), "tau1:inverse-gaussian");
  }
  for (std::size_t i = 0; i < g.size(); ++i) values[i] = tau2_density(p, g[i], cfg);
  DensityCurve curve = make_passage_curve(p, std::move(g), std::move(values), "tau2:convolution");
  for (std::size_t k = 3; k <= n; ++k) curve = passage_recursion_step(p, curve, k, cfg);
  return curve;
}

double tn_cdf(const LinearBoundaryProblem& p, std::size_t n, double t, const QuadConfig& cfg) {
  require_standing(p, "tn_cdf");
  if (n == 0 || n > kMaxPassageOrder) throw ParameterError("tn_cdf: n must be in [1, 6]");
  if (!(t >= 0.0)) throw DomainError("tn_cdf: t must be >= 0");
  if (n == 1) return t == 0.0 ? 0.0 : fpt_cdf(p, t);
  if (n == 2) return t2_cdf(p, t, cfg);
  if (t == 0.0) return 0.0;

  const std::vector<double> grid = default_passage_grid(p);
  const DensityCurve prev = nth_passage_density(p, n - 1, grid, cfg);
  const CurveInterpolant f_prev(prev);
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double s) {
    const double fs = f_prev(s);
    if (fs == 0.0) return 0.0;
    return fs * require_converged(no_touch_probability(p, s, t, inner), inner, "tn_cdf inner");
  };
  double survival = prev.defect_mass();  // mass beyond the grid never returns within t
  for (std::size_t c = 1; c < grid.size(); ++c) {
    survival += integrate_finite(f, grid[c - 1], grid[c], cfg).value;
  }
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

}  // namespace passage
