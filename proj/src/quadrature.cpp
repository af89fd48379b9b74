#include "passage/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "passage/errors.hpp"

namespace passage {
namespace {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21). Abscissae are
// strictly inside (-1, 1).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452334, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for kXgk[1], kXgk[3], ..., kXgk[9].
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked_eval(const Integrand& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integrand returned " << y << " at abscissa " << x;
    throw NumericalError(msg.str());
  }
  return y;
}

Segment gauss_kronrod_21(const Integrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  // Nodes near the ends of a tiny segment can round onto an endpoint; keep them inside.
  const double inner_lo = std::nextafter(lo, hi);
  const double inner_hi = std::nextafter(hi, lo);
  auto node = [&](double x) { return std::clamp(x, inner_lo, inner_hi); };
  std::array<double, 21> fv{};
  for (std::size_t j = 0; j < 10; ++j) {
    fv[2 * j] = checked_eval(f, node(center - half * kXgk[j]));
    fv[2 * j + 1] = checked_eval(f, node(center + half * kXgk[j]));
  }
  fv[20] = checked_eval(f, center);

  double resk = kWgk[10] * fv[20];
  double resg = 0.0;
  double resabs = std::abs(resk);
  for (std::size_t j = 0; j < 10; ++j) {
    const double pair = fv[2 * j] + fv[2 * j + 1];
    resk += kWgk[j] * pair;
    resabs += kWgk[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
    if (j % 2 == 1) resg += kWg[j / 2] * pair;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fv[20] - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
  }

  const double habs = std::abs(half);
  resk *= half;
  resabs *= habs;
  resasc *= habs;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  return {lo, hi, resk, err};
}

double tolerance_for(double value, const QuadConfig& cfg) {
  return std::max(cfg.rel_tol * std::abs(value), cfg.abs_tol);
}

}  // namespace

QuadConfig QuadConfig::inner() const {
  QuadConfig c = *this;
  c.rel_tol = rel_tol / inner_tol_relaxation;
  c.abs_tol = abs_tol / inner_tol_relaxation;
  return c;
}

void QuadConfig::validate() const {
  if (!(rel_tol > 0.0)) throw ParameterError("QuadConfig: rel_tol must be > 0");
  if (!(abs_tol >= 0.0)) throw ParameterError("QuadConfig: abs_tol must be >= 0");
  if (max_subdivisions < 1) throw ParameterError("QuadConfig: max_subdivisions must be >= 1");
  if (!(inner_tol_relaxation >= 1.0)) {
    throw ParameterError("QuadConfig: inner_tol_relaxation must be >= 1");
  }
}

double require_converged(const IntegralEstimate& est, const QuadConfig& cfg, const char* what) {
  const double target = tolerance_for(est.value, cfg);
  if (!est.converged && est.error_estimate > 100.0 * target) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << ": quadrature did not converge (estimate " << est.value << ", error "
        << est.error_estimate << ")";
    throw NumericalError(msg.str());
  }
  return est.value;
}

IntegralEstimate operator+(const IntegralEstimate& lhs, const IntegralEstimate& rhs) {
  return {lhs.value + rhs.value, lhs.error_estimate + rhs.error_estimate,
          lhs.evaluations + rhs.evaluations, lhs.converged && rhs.converged};
}

IntegralEstimate integrate_finite(const Integrand& f, double lo, double hi, const QuadConfig& cfg) {
  cfg.validate();
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("integrate_finite: need finite lo < hi");
  }

  std::priority_queue<Segment> work;
  std::vector<Segment> frozen;  // too narrow to bisect further
  const Segment first = gauss_kronrod_21(f, lo, hi);
  work.push(first);
  std::size_t evaluations = 21;
  std::size_t subdivisions = 1;
  double total = first.value;
  double total_err = first.error;

  while (!work.empty() && total_err > tolerance_for(total, cfg)) {
    if (subdivisions >= cfg.max_subdivisions) break;
    const Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi) ||
        (worst.hi - worst.lo) < 8.0 * kEps * std::max(std::abs(mid), kTiny)) {
      frozen.push_back(worst);
      continue;
    }
    const Segment left = gauss_kronrod_21(f, worst.lo, mid);
    const Segment right = gauss_kronrod_21(f, mid, worst.hi);
    evaluations += 42;
    ++subdivisions;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
  }

  // Re-sum to shed the drift of the running totals.
  double value = 0.0;
  double error = 0.0;
  for (const Segment& s : frozen) {
    value += s.value;
    error += s.error;
  }
  while (!work.empty()) {
    value += work.top().value;
    error += work.top().error;
    work.pop();
  }
  return {value, error, evaluations, error <= tolerance_for(value, cfg)};
}

IntegralEstimate integrate_sqrt_endpoint(const Integrand& f, double lo, double hi,
                                         SingularEnd singular_end, const QuadConfig& cfg) {
  if (!(lo < hi)) throw DomainError("integrate_sqrt_endpoint: need lo < hi");
  switch (singular_end) {
    case SingularEnd::lo: {
      const Integrand g = [&](double w) {
        return 2.0 * w * f(std::max(lo + w * w, std::nextafter(lo, hi)));
      };
      return integrate_finite(g, 0.0, std::sqrt(hi - lo), cfg);
    }
    case SingularEnd::hi: {
      const Integrand g = [&](double w) {
        return 2.0 * w * f(std::min(hi - w * w, std::nextafter(hi, lo)));
      };
      return integrate_finite(g, 0.0, std::sqrt(hi - lo), cfg);
    }
    case SingularEnd::both: {
      const double mid = 0.5 * (lo + hi);
      return integrate_sqrt_endpoint(f, lo, mid, SingularEnd::lo, cfg) +
             integrate_sqrt_endpoint(f, mid, hi, SingularEnd::hi, cfg);
    }
  }
  throw ParameterError("integrate_sqrt_endpoint: unknown endpoint flag");
}

IntegralEstimate integrate_semi_infinite(const Integrand& f, double lo, const QuadConfig& cfg,
                                         double scale) {
  if (!std::isfinite(lo)) throw DomainError("integrate_semi_infinite: lo must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("integrate_semi_infinite: scale must be positive");
  }
  // u = lo + scale * w / (1 - w) followed by w = 1 - v^2, i.e. u = lo + scale * (1/v^2 - 1).
  const Integrand mapped = [&](double v) {
    const double v2 = v * v;
    const double u = lo + scale * (1.0 - v2) / v2;
    if (!std::isfinite(u)) return 0.0;
    const double fu = f(u);
    if (fu == 0.0) return 0.0;
    return fu * 2.0 * scale / v2 / v;
  };
  IntegralEstimate est = integrate_finite(mapped, 0.0, 1.0, cfg);

  // Tail probe: u * |f(u)| must shrink between two far points.
  const double u1 = lo + scale * 1e6;
  const double u2 = lo + scale * 1e9;
  const double m1 = u1 * std::abs(f(u1));
  const double m2 = u2 * std::abs(f(u2));
  est.evaluations += 2;
  if (m2 > 0.0 && m2 >= m1) est.converged = false;
  return est;
}

IntegralEstimate laplace_numeric(const Integrand& density, double lambda, const QuadConfig& cfg,
                                 double scale) {
  if (!(lambda >= 0.0)) throw DomainError("laplace_numeric: lambda must be >= 0");
  const Integrand weighted = [&](double t) {
    const double d = density(t);
    return d == 0.0 ? 0.0 : std::exp(-lambda * t) * d;
  };
  return integrate_semi_infinite(weighted, 0.0, cfg, scale);
}

}  // namespace passage
