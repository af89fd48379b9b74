#include "passage/transformed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "passage/errors.hpp"
#include "passage/npass.hpp"

namespace passage {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest x in [lo, hi] with g(x) >= y for increasing g. Stops once the bracket is within
// 1e-12 relative and g is within 1e-13 of y, or the bracket cannot be split further.
double bisect_increasing(const RealMap& g, double y, double lo, double hi) {
  if (g(lo) >= y) return lo;
  const double y_tol = 1e-13 * std::max(1.0, std::abs(y));
  for (int it = 0; it < 2200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double gm = g(mid);
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid)) && std::abs(gm - y) <= y_tol) return mid;
    (gm < y ? lo : hi) = mid;
  }
  return std::abs(g(lo) - y) < std::abs(g(hi) - y) ? lo : hi;
}

// Upper bracket for an increasing g on [lo, inf) reaching y, grown by doubling.
double grow_bracket(const RealMap& g, double y, double lo) {
  double hi = std::max(1.0, 2.0 * std::abs(lo));
  for (int it = 0; it < 2000 && g(hi) < y; ++it) hi = lo + 2.0 * (hi - lo);
  return hi;
}

void require_kind(const ModelSpec& m, ModelKind kind, const char* what) {
  if (m.kind != kind) throw ParameterError(std::string(what) + ": wrong model kind");
  m.validate();
}

// Clock value as a usable Brownian time: 0 and overflow both mean "no density here".
bool clock_usable(double r) { return r > 0.0 && std::isfinite(r); }

double tau1_density_raw(const ModelSpec& m, const LinearBoundaryProblem& p, double t) {
  const double r = m.clock->rho(t);
  if (!clock_usable(r)) return 0.0;
  const double f = fpt_density(p, r);
  return f == 0.0 ? 0.0 : f * m.clock->rho_prime(t);
}

double tau2_density_raw(const ModelSpec& m, const LinearBoundaryProblem& p, double t,
                        const QuadConfig& cfg) {
  const double r = m.clock->rho(t);
  if (!clock_usable(r)) return 0.0;
  const double f = tau2_density(p, r, cfg);
  return f == 0.0 ? 0.0 : f * m.clock->rho_prime(t);
}

// Clock times of the Brownian times d^2 4^k, k = -4..4, below the clock limit.
std::vector<double> clock_breakpoints(const ModelSpec& m) {
  const TimeChange& c = *m.clock;
  const double d2 = (m.a - m.x) * (m.a - m.x);
  std::vector<double> cuts;
  for (int k = -4; k <= 4; ++k) {
    const double target = d2 * std::pow(4.0, k);
    if (!(target < c.rho_limit)) break;
    const double t = c.rho_inverse(target);
    if (std::isfinite(t) && t > 0.0 && (cuts.empty() || t > cuts.back())) cuts.push_back(t);
  }
  return cuts;
}

// int_0^inf f for integrands carried by the clock. Breaking at the clock breakpoints keeps the
// rule from stepping over a narrow bulk of mass.
IntegralEstimate integrate_clock_time(const ModelSpec& m, const Integrand& f, const QuadConfig& cfg) {
  const TimeChange& c = *m.clock;
  const std::vector<double> cuts = clock_breakpoints(m);
  if (cuts.empty()) {
    return integrate_semi_infinite(f, 0.0, cfg, m.clock->rho_inverse(0.5 * c.rho_limit));
  }
  IntegralEstimate est{0.0, 0.0, 0, true};
  double lo = 0.0;
  for (double cut : cuts) {
    est = est + integrate_finite(f, lo, cut, cfg);
    lo = cut;
  }
  return est + integrate_semi_infinite(f, lo, cfg, lo);
}

}  // namespace

SpaceTransform SpaceTransform::cir() {
  SpaceTransform s;
  s.name = "cir";
  s.v = [](double x) { return 2.0 * std::sqrt(x); };
  s.v_inverse = [](double y) { return 0.25 * y * y; };
  s.domain_lo = 0.0;
  s.domain_hi = kInf;
  s.drift = [](double) { return 0.25; };
  s.diffusion = [](double x) { return std::sqrt(std::max(x, 0.0)); };
  return s;
}

SpaceTransform SpaceTransform::wright_fisher() {
  SpaceTransform s;
  s.name = "wf";
  s.v = [](double x) { return 2.0 * std::asin(std::sqrt(std::clamp(x, 0.0, 1.0))); };
  s.v_inverse = [](double y) {
    const double h = std::sin(0.5 * y);
    return h * h;
  };
  s.domain_lo = 0.0;
  s.domain_hi = 1.0;
  s.drift = [](double x) { return 0.25 * (1.0 - 2.0 * x); };
  s.diffusion = [](double x) { return std::sqrt(std::clamp(x * (1.0 - x), 0.0, 0.25)); };
  return s;
}

SpaceTransform SpaceTransform::custom(std::string name, RealMap v, double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("SpaceTransform::custom: need lo < hi");
  SpaceTransform s;
  s.name = std::move(name);
  s.v = v;
  s.domain_lo = lo;
  s.domain_hi = hi;
  s.v_inverse = [v, lo, hi](double y) {
    const double top = std::isfinite(hi) ? hi : grow_bracket(v, y, lo);
    return bisect_increasing(v, y, lo, top);
  };
  return s;
}

void SpaceTransform::check_invariants(std::span<const double> sample) const {
  if (!v || !v_inverse) throw ParameterError("SpaceTransform: missing map");
  double prev = -kInf;
  for (double x : sample) {
    if (!contains(x)) throw DomainError("SpaceTransform: sample point outside domain");
    const double y = v(x);
    if (!(y > prev)) throw ParameterError("SpaceTransform: v not strictly increasing");
    prev = y;
    if (std::abs(v(v_inverse(y)) - y) > 1e-10 * std::max(1.0, std::abs(y))) {
      throw ParameterError("SpaceTransform: v(v_inverse(y)) != y");
    }
  }
}

TimeChange TimeChange::identity() {
  TimeChange c;
  c.name = "identity";
  c.rho = [](double t) { return t; };
  c.rho_prime = [](double) { return 1.0; };
  c.rho_inverse = [](double r) { return r; };
  c.rho_increment = [](double, double h) { return h; };
  c.rho_limit = kInf;
  c.growth_alpha = 1.0;
  return c;
}

TimeChange TimeChange::cubic() {
  TimeChange c;
  c.name = "cubic";
  c.rho = [](double t) { return t * t * t / 3.0; };
  c.rho_prime = [](double t) { return t * t; };
  c.rho_inverse = [](double r) { return std::cbrt(3.0 * r); };
  c.rho_increment = [](double t, double h) { return h * (3.0 * t * (t + h) + h * h) / 3.0; };
  c.rho_limit = kInf;
  c.growth_alpha = 3.0;
  return c;
}

TimeChange TimeChange::ornstein_uhlenbeck(double mu, double sigma) {
  if (!(mu > 0.0) || !(sigma > 0.0)) throw ParameterError("ou clock: need mu > 0, sigma > 0");
  TimeChange c;
  c.name = "ou";
  const double s2 = sigma * sigma;
  c.rho = [mu, s2](double t) { return s2 / (2.0 * mu) * std::expm1(2.0 * mu * t); };
  c.rho_prime = [mu, s2](double t) { return s2 * std::exp(2.0 * mu * t); };
  c.rho_inverse = [mu, s2](double r) { return std::log1p(2.0 * mu * r / s2) / (2.0 * mu); };
  c.rho_increment = [mu, s2](double t, double h) {
    return s2 / (2.0 * mu) * std::exp(2.0 * mu * t) * std::expm1(2.0 * mu * h);
  };
  c.rho_limit = kInf;
  c.exponential_growth = true;
  return c;
}

TimeChange TimeChange::custom(std::string name, RealMap rho, RealMap rho_prime, double rho_limit,
                              std::optional<double> growth_alpha, bool exponential_growth) {
  if (!(rho_limit > 0.0)) throw ParameterError("TimeChange::custom: rho_limit must be > 0");
  TimeChange c;
  c.name = std::move(name);
  c.rho = rho;
  c.rho_prime = rho_prime;
  // Below 1e-4 relative steps the difference of two clock values loses more digits than the
  // midpoint rule's O(h^3) error.
  c.rho_increment = [rho, rho_prime](double t, double h) {
    if (h < 1e-4 * t) return rho_prime(t + 0.5 * h) * h;
    return rho(t + h) - rho(t);
  };
  c.rho_limit = rho_limit;
  c.growth_alpha = growth_alpha;
  c.exponential_growth = exponential_growth;
  c.rho_inverse = [rho, rho_limit](double r) {
    if (r <= 0.0) return 0.0;
    if (r >= rho_limit) return kInf;
    return bisect_increasing(rho, r, 0.0, grow_bracket(rho, r, 0.0));
  };
  return c;
}

void TimeChange::check_invariants(std::span<const double> sample) const {
  if (!rho || !rho_prime || !rho_inverse || !rho_increment) {
    throw ParameterError("TimeChange: missing map");
  }
  if (rho(0.0) != 0.0) throw ParameterError("TimeChange: rho(0) != 0");
  double prev = 0.0;
  for (double t : sample) {
    if (!(t > 0.0)) throw DomainError("TimeChange: sample times must be > 0");
    const double r = rho(t);
    if (!(r > prev)) throw ParameterError("TimeChange: rho not strictly increasing");
    const double r_next = rho(1.5 * t);
    if (std::abs(rho_increment(t, 0.5 * t) - (r_next - r)) > 1e-9 * std::max(1.0, r_next)) {
      throw ParameterError("TimeChange: rho_increment disagrees with rho");
    }
    prev = r;
    if (std::abs(rho_inverse(r) - t) > 1e-9 * std::max(1.0, t)) {
      throw ParameterError("TimeChange: rho_inverse(rho(t)) != t");
    }
  }
}

ModelSpec ModelSpec::bm(double a, double x, double b) {
  ModelSpec m;
  m.kind = ModelKind::bm_linear;
  m.a = a;
  m.x = x;
  m.b = b;
  return m;
}

ModelSpec ModelSpec::conjugated(SpaceTransform v, double a, double x) {
  ModelSpec m;
  m.kind = ModelKind::conjugated;
  m.a = a;
  m.x = x;
  m.space = std::move(v);
  return m;
}

ModelSpec ModelSpec::time_changed(TimeChange rho, double a, double x) {
  ModelSpec m;
  m.kind = ModelKind::time_changed;
  m.a = a;
  m.x = x;
  m.clock = std::move(rho);
  return m;
}

ModelSpec ModelSpec::ornstein_uhlenbeck(double mu, double sigma, double a, double x) {
  ModelSpec m = time_changed(TimeChange::ornstein_uhlenbeck(mu, sigma), a, x);
  m.ou = OuParams{mu, sigma};
  return m;
}

void ModelSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(x) || !std::isfinite(b)) {
    throw ParameterError("model: a, x, b must be finite");
  }
  switch (kind) {
    case ModelKind::bm_linear:
      if (a == x) throw DegenerateProblemError("model: a == x");
      return;
    case ModelKind::conjugated:
      if (!space) throw ParameterError("model: conjugated kind needs a space transform");
      if (!space->contains(a) || !space->contains(x)) {
        throw DomainError("model: a and x must lie in the domain of v");
      }
      break;
    case ModelKind::time_changed:
      if (!clock) throw ParameterError("model: time-changed kind needs a clock");
      if (ou && (!(ou->mu > 0.0) || !(ou->sigma > 0.0))) {
        throw ParameterError("model: ou needs mu > 0 and sigma > 0");
      }
      break;
  }
  if (b != 0.0) throw ParameterError("model: slope b applies to the bm kind only");
  if (!(x < a)) throw ParameterError("model: need x < a");
}

LinearBoundaryProblem ModelSpec::bm_problem() const {
  switch (kind) {
    case ModelKind::bm_linear:
      return {.a = a, .b = b, .x = x};
    case ModelKind::conjugated:
      return {.a = space->v(a), .b = 0.0, .x = space->v(x)};
    case ModelKind::time_changed:
      return {.a = a, .b = 0.0, .x = x};
  }
  throw ParameterError("model: unknown kind");
}

std::string ModelSpec::label() const {
  switch (kind) {
    case ModelKind::bm_linear:
      return "bm";
    case ModelKind::conjugated:
      return space->name;
    case ModelKind::time_changed:
      return clock->name;
  }
  return "unknown";
}

LinearBoundaryProblem conj_problem(const ModelSpec& m) {
  require_kind(m, ModelKind::conjugated, "conj_problem");
  return m.bm_problem();
}

double conj_tau1_density(const ModelSpec& m, double t) { return fpt_density(conj_problem(m), t); }

double conj_t1_cdf(const ModelSpec& m, double t) { return fpt_cdf(conj_problem(m), t); }

double conj_t2_density(const ModelSpec& m, double t, const QuadConfig& cfg) {
  return t2_density(conj_problem(m), t, cfg);
}

double conj_tau2_density(const ModelSpec& m, double t, const QuadConfig& cfg) {
  return tau2_density(conj_problem(m), t, cfg);
}

double conj_tn_cdf(const ModelSpec& m, std::size_t n, double t, const QuadConfig& cfg) {
  return tn_cdf(conj_problem(m), n, t, cfg);
}

DensityCurve conj_nth_passage(const ModelSpec& m, std::size_t n, std::span<const double> grid,
                              const QuadConfig& cfg) {
  return nth_passage_density(conj_problem(m), n, grid, cfg);
}

double tc_time_scale(const ModelSpec& m) {
  require_kind(m, ModelKind::time_changed, "tc_time_scale");
  const double d2 = (m.a - m.x) * (m.a - m.x);
  const double target = d2 < 0.5 * m.clock->rho_limit ? d2 : 0.5 * m.clock->rho_limit;
  return m.clock->rho_inverse(target);
}

double tc_tau1_density(const ModelSpec& m, double t) {
  require_kind(m, ModelKind::time_changed, "tc_tau1_density");
  if (!(t > 0.0)) throw DomainError("tc_tau1_density: t must be > 0");
  return tau1_density_raw(m, m.bm_problem(), t);
}

double tc_tau1_cdf(const ModelSpec& m, double t) {
  require_kind(m, ModelKind::time_changed, "tc_tau1_cdf");
  if (!(t >= 0.0)) throw DomainError("tc_tau1_cdf: t must be >= 0");
  const double r = m.clock->rho(t);
  if (!(r > 0.0)) return 0.0;
  if (!std::isfinite(r)) return 1.0;
  return fpt_cdf(m.bm_problem(), r);
}

MeanEstimate tc_tau1_mean(const ModelSpec& m, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_tau1_mean");
  const TimeChange& c = *m.clock;
  if (std::isfinite(c.rho_limit)) {
    return {kInf, 0.0, "bounded clock: tau_1 = inf with positive probability"};
  }
  if (c.growth_alpha && *c.growth_alpha <= 2.0) {
    return {kInf, 0.0, "rho(t) ~ c t^alpha with alpha <= 2: mean diverges"};
  }
  const LinearBoundaryProblem p = m.bm_problem();
  const std::vector<double> cuts = clock_breakpoints(m);
  const double scale = cuts.empty() ? tc_time_scale(m) : cuts.back();
  const Integrand tf = [&](double t) {
    const double f = tau1_density_raw(m, p, t);
    return f == 0.0 ? 0.0 : t * f;
  };

  // Partial integrals over the far decades must shrink geometrically. Only the tail end counts:
  // a clock can look linear for several decades before it speeds up.
  std::vector<double> inc;
  for (int k = 0; k <= 8; ++k) {
    const double lo = scale * std::pow(10.0, k);
    inc.push_back(integrate_finite(tf, lo, 10.0 * lo, cfg).value);
  }
  const std::size_t n = inc.size();
  if (inc[n - 1] > cfg.abs_tol && inc[n - 1] > 0.9 * inc[n - 2] && inc[n - 2] > 0.9 * inc[n - 3]) {
    return {kInf, 0.0, "partial integrals over decades do not shrink: mean diverges"};
  }

  const IntegralEstimate est = integrate_clock_time(m, tf, cfg);
  if (!est.converged && est.error_estimate > 100.0 * cfg.rel_tol * std::abs(est.value)) {
    return {kInf, est.error_estimate, "quadrature did not settle: mean treated as divergent"};
  }
  return {est.value, est.error_estimate, "finite"};
}

double tc_t2_density(const ModelSpec& m, double t, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_t2_density");
  if (!(t > 0.0)) throw DomainError("tc_t2_density: t must be > 0");
  const LinearBoundaryProblem p = m.bm_problem();
  const TimeChange& c = *m.clock;
  const Integrand f = [&](double s) {
    const double f1 = tau1_density_raw(m, p, s);
    if (f1 == 0.0) return 0.0;
    const double rs = c.rho(s);
    const double u = c.rho_increment(s, t);
    if (!clock_usable(u)) return 0.0;
    return f1 * t2_conditional_density(p, u, rs) * c.rho_prime(t + s);
  };
  return require_converged(integrate_clock_time(m, f, cfg), cfg, "tc_t2_density");
}

double tc_t2_density_unconditioned(const ModelSpec& m, double t, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_t2_density_unconditioned");
  if (!(t > 0.0)) throw DomainError("tc_t2_density_unconditioned: t must be > 0");
  const LinearBoundaryProblem p = m.bm_problem();
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double s) {
    const double f1 = tau1_density_raw(m, p, s);
    return f1 == 0.0 ? 0.0 : f1 * tau2_density_raw(m, p, t + s, inner);
  };
  return require_converged(integrate_clock_time(m, f, cfg), cfg,
                 "tc_t2_density_unconditioned");
}

double tc_tau2_density(const ModelSpec& m, double t, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_tau2_density");
  if (!(t > 0.0)) throw DomainError("tc_tau2_density: t must be > 0");
  return tau2_density_raw(m, m.bm_problem(), t, cfg);
}

double tc_t2_defect(const ModelSpec& m, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_t2_defect");
  const double limit = m.clock->rho_limit;
  if (!std::isfinite(limit)) return 0.0;
  const LinearBoundaryProblem p = m.bm_problem();
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double u) { return tau2_density(p, u, inner); };
  const double mass = require_converged(integrate_finite(f, 0.0, limit, cfg), cfg, "tc_t2_defect");
  return std::clamp(1.0 - mass, 0.0, 1.0);
}

double tc_t2_defect_conditional(const ModelSpec& m, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_t2_defect_conditional");
  const double limit = m.clock->rho_limit;
  if (!std::isfinite(limit)) return 0.0;
  const LinearBoundaryProblem p = m.bm_problem();
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double r) {
    const double f1 = fpt_density(p, r);
    return f1 == 0.0 ? 0.0 : f1 * t2_cdf_conditional(p, limit - r, r, inner);
  };
  const double mass = require_converged(integrate_finite(f, 0.0, limit, cfg), cfg,
                              "tc_t2_defect_conditional");
  return std::clamp(1.0 - mass, 0.0, 1.0);
}

double tc_laplace(const ModelSpec& m, PassageIndex which, double lambda, const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_laplace");
  if (!(lambda >= 0.0)) throw DomainError("tc_laplace: lambda must be >= 0");
  const LinearBoundaryProblem p = m.bm_problem();
  const QuadConfig inner = cfg.inner();
  const Integrand f = [&](double t) {
    const double d = which == PassageIndex::tau1 ? tau1_density_raw(m, p, t)
                                                 : tau2_density_raw(m, p, t, inner);
    return d == 0.0 ? 0.0 : std::exp(-lambda * t) * d;
  };
  return require_converged(integrate_clock_time(m, f, cfg), cfg, "tc_laplace");
}

DensityCurve tc_nth_passage(const ModelSpec& m, std::size_t n, std::span<const double> grid,
                            const QuadConfig& cfg) {
  require_kind(m, ModelKind::time_changed, "tc_nth_passage");
  if (n == 0 || n > kMaxPassageOrder) throw ParameterError("tc_nth_passage: n must be in [1, 6]");
  const TimeChange& c = *m.clock;
  const LinearBoundaryProblem p = m.bm_problem();
  std::vector<double> g(grid.begin(), grid.end());
  std::vector<double> values(g.size());

  if (n == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) values[i] = tc_tau1_density(m, g[i]);
    const double mass = trapezoid(g, values);
    return DensityCurve(std::move(g), std::move(values), std::clamp(1.0 - mass, 0.0, 1.0),
                        "tau1:time-changed");
  }

  std::vector<double> image(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    image[i] = c.rho(g[i]);
    if (!clock_usable(image[i]) || (i > 0 && !(image[i] > image[i - 1]))) {
      throw DomainError("tc_nth_passage: grid must map to increasing finite positive clock values");
    }
  }
  const DensityCurve bm = nth_passage_density(p, n, image, cfg);
  for (std::size_t i = 0; i < g.size(); ++i) values[i] = bm.values()[i] * c.rho_prime(g[i]);
  const double mass = trapezoid(g, values);
  const bool warn = bm.resolution_warning() && !std::isfinite(c.rho_limit);
  return DensityCurve(std::move(g), std::move(values), std::clamp(1.0 - mass, 0.0, 1.0),
                      "tau" + std::to_string(n) + ":time-changed", warn);
}

}  // namespace passage
