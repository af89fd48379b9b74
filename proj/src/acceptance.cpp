#include "passage/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <ostream>

#include "passage/analytic.hpp"
#include "passage/montecarlo.hpp"
#include "passage/npass.hpp"
#include "passage/quadrature.hpp"
#include "passage/transformed.hpp"

namespace passage {
namespace {

std::string format(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome within_runtime(Outcome o, double seconds, double limit) {
  if (seconds >= limit) {
    o.passed = false;
    o.detail += format("; runtime %.2fs >= %.0fs", seconds, limit);
  }
  return o;
}

Outcome cubic_mean() {
  const ModelSpec m = ModelSpec::time_changed(TimeChange::cubic(), 1.0, 0.0);
  const MeanEstimate e = tc_tau1_mean(m);
  return {std::abs(e.value - 3.594) <= 0.01, format("E[tau1] = %.6f, target 3.594 +/- 0.01", e.value)};
}

Outcome cubic_mc(std::size_t workers) {
  const ModelSpec m = ModelSpec::time_changed(TimeChange::cubic(), 1.0, 0.0);
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.t_max = 1e6;
  cfg.workers = workers;
  const EstimateCI e = simulate_tau1(m, cfg).estimate;
  return {e.mean >= 3.55 && e.mean <= 3.85,
          format("MC mean = %.4f (+/- %.4f, censored %.2g), target [3.55, 3.85]", e.mean,
                 e.half_width_95, e.censored_fraction)};
}

Outcome ou_mean(std::size_t workers) {
  const ModelSpec m = ModelSpec::ornstein_uhlenbeck(1.0, 1.0, 1.0, 0.0);
  const MeanEstimate q = tc_tau1_mean(m);
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.t_max = 100.0;
  cfg.workers = workers;
  const EstimateCI e = simulate_tau1(m, cfg).estimate;
  const bool quad_ok = std::abs(q.value - 1.025) <= 0.01;
  const bool mc_ok = e.mean >= 1.00 && e.mean <= 1.10;
  return {quad_ok && mc_ok,
          format("quadrature E[tau1] = %.6f (target 1.025 +/- 0.01: %s); MC mean = %.4f "
                 "(+/- %.4f, target [1.00, 1.10]: %s)",
                 q.value, quad_ok ? "ok" : "miss", e.mean, e.half_width_95, mc_ok ? "ok" : "miss")};
}

Outcome cdf_consistency() {
  QuadConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-15;
  const double slopes[] = {-2.0, -0.5, 0.0, 0.3, 1.0};
  const double dist_horizon[][2] = {{0.5, 0.2}, {1.0, 1.0}, {2.0, 5.0}, {3.0, 50.0}};
  double worst = 0.0;
  int count = 0;
  for (double b : slopes) {
    for (const auto& dh : dist_horizon) {
      const LinearBoundaryProblem p{.a = dh[0], .b = b, .x = 0.0};
      const Integrand f = [&](double t) { return fpt_density(p, t); };
      const double integral = integrate_finite(f, 0.0, dh[1], cfg).value;
      worst = std::max(worst, std::abs(integral - fpt_cdf(p, dh[1])));
      ++count;
    }
  }
  return {worst <= 1e-8 && count == 20,
          format("%d combinations, max |int f - F| = %.3g, target 1e-8", count, worst)};
}

Outcome arcsine(std::size_t workers) {
  const LinearBoundaryProblem p{.a = 0.0, .b = 0.0, .x = 0.0};
  QuadConfig q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-14;
  const double mass = last_passage_cdf(p, 1.0, 1.0, q).value;

  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-4;
  cfg.t_max = 1.0;
  cfg.workers = workers;
  cfg.bridge_correction = true;
  const std::vector<double> z = {0.25, 0.5, 0.75};
  const LastPassageEstimate est = estimate_last_passage_cdf(p, 1.0, z, cfg);
  const double ks = ks_distance(est.samples, [](double u) {
    return 2.0 / std::numbers::pi * std::asin(std::sqrt(std::clamp(u, 0.0, 1.0)));
  });
  const bool ok = std::abs(mass - 1.0) <= 1e-10 && ks <= 0.01;
  return {ok, format("|int psi - 1| = %.3g (target 1e-10); MC KS = %.5f over %zu paths (target 0.01)",
                     std::abs(mass - 1.0), ks, est.n_conditioning)};
}

Outcome psi_normalization() {
  double worst = 0.0;
  for (double b : {-0.5, -1.0, -2.0}) {
    const LinearBoundaryProblem p{.a = 1.0, .b = b, .x = 0.0};
    for (double t : {0.5, 1.0, 4.0}) {
      worst = std::max(worst, std::abs(last_passage_cdf(p, t, t).value - 1.0));
    }
  }
  return {worst <= 1e-6, format("max |int_0^t psi_t - 1| = %.3g over b in {-0.5,-1,-2}, target 1e-6", worst)};
}

Outcome defect_identities() {
  const QuadConfig cfg;
  const LinearBoundaryProblem p0{.a = 1.0, .b = 0.0, .x = 0.0};
  const bool zero_exact = t2_defect(p0) == 0.0;
  bool ordered = true;
  double worst_mass = 0.0;
  std::string table;
  for (double b : {-2.0, -1.0, -0.5, -0.1, 0.0}) {
    const LinearBoundaryProblem p{.a = 1.0, .b = b, .x = 0.0};
    const double defect = t2_defect(p, cfg);
    const double gamma = gamma_bound(p);
    if (b != 0.0) {
      ordered = ordered && defect <= gamma;
      table += format(" b=%g:%.4f<=%.4f", b, defect, gamma);
    }
    const Integrand f = [&](double t) { return tau2_density(p, t, cfg.inner()); };
    const double mass = integrate_semi_infinite(f, 0.0, cfg, 1.0).value;
    worst_mass = std::max(worst_mass, std::abs(mass + defect - 1.0));
  }
  return {zero_exact && ordered && worst_mass <= 1e-4,
          format("defect(b=0) == 0: %s; defect <= gamma:%s; max |int f_tau2 - (1 - defect)| = "
                 "%.3g (target 1e-4)",
                 zero_exact ? "yes" : "no", table.c_str(), worst_mass)};
}

Outcome dual_t2_cdf() {
  const LinearBoundaryProblem p{.a = 1.0, .b = 0.0, .x = 0.0};
  double worst = 0.0;
  for (double t : {0.1, 1.0, 10.0}) worst = std::max(worst, std::abs(t2_cdf(p, t) - t2_cdf_arccos(p, t)));
  return {worst <= 1e-6, format("max |nested - arccos| = %.3g at t in {0.1, 1, 10}, target 1e-6", worst)};
}

Outcome laplace_checks() {
  QuadConfig tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-13;
  double worst = 0.0;
  for (double b : {0.0, -0.5, 0.5}) {
    const LinearBoundaryProblem p{.a = 1.0, .b = b, .x = 0.0};
    const Integrand f = [&](double t) { return fpt_density(p, t); };
    for (double lambda : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      worst = std::max(worst, std::abs(laplace_numeric(f, lambda, tight).value -
                                       fpt_laplace_closed(p, lambda)));
    }
  }
  bool ordered = true;
  double min_gap = 1.0;
  for (double b : {0.0, -0.5}) {
    const LinearBoundaryProblem p{.a = 1.0, .b = b, .x = 0.0};
    for (int k = 1; k <= 20; ++k) {
      const double lambda = 0.25 * k;
      const double gap = fpt_laplace_closed(p, lambda) - tau2_laplace(p, lambda);
      min_gap = std::min(min_gap, gap);
      ordered = ordered && gap >= 0.0;
    }
  }
  return {worst <= 1e-6 && ordered,
          format("max |closed - numeric tau1 LT| = %.3g (target 1e-6); min LT1 - LT2 on (0,5] = %.3g",
                 worst, min_gap)};
}

Outcome cir_conjugation(std::size_t workers) {
  const ModelSpec m = ModelSpec::conjugated(SpaceTransform::cir(), 1.0, 0.25);
  McConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-4;
  cfg.t_max = 2.0;
  cfg.workers = workers;
  cfg.euler = true;
  const SampleSet s = simulate_tau1(m, cfg);
  const double ks = ks_distance_censored(
      s.samples, [&](double t) { return t > 0.0 ? conj_t1_cdf(m, t) : 0.0; }, cfg.t_max);
  return {ks <= 0.02, format("Euler KS = %.5f on [0, %.0f] (censored %.3f), target 0.02", ks,
                             cfg.t_max, s.estimate.censored_fraction)};
}

Outcome small_t_asymptotic() {
  const LinearBoundaryProblem p{.a = 1.0, .b = 0.0, .x = 0.0};
  double lo = INFINITY;
  double hi = 0.0;
  for (double t : {1e-6, 1e-5, 1e-4, 1e-3}) {
    const double v = std::sqrt(t) * t2_density(p, t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double spread = hi / lo - 1.0;
  return {spread <= 0.05, format("sqrt(t) f_T2 in [%.6f, %.6f] over t in [1e-6, 1e-3], spread %.3g, target 0.05",
                                 lo, hi, spread)};
}

Outcome recursion() {
  const LinearBoundaryProblem p{.a = 1.0, .b = 0.0, .x = 0.0};
  const std::vector<double> grid = default_passage_grid(p);
  const DensityCurve tau1 = nth_passage_density(p, 1, grid);
  const DensityCurve rec2 = passage_recursion_step(p, tau1, 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::max(worst, std::abs(rec2.values()[i] - tau2_density(p, grid[i])));
  }
  const std::vector<double> extended = log_grid(1e-3, 1e6, 400);
  const double mass3 = nth_passage_density(p, 3, extended).trapezoid_mass();
  return {worst <= 1e-4 && mass3 >= 0.95,
          format("max |recursion n=2 - tau2| = %.3g (target 1e-4); tau3 mass on [1e-3, 1e6] = %.4f "
                 "(target 0.95)",
                 worst, mass3)};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  struct Entry {
    int id;
    const char* name;
    double limit;  // seconds, 0 when the criterion has no runtime bound
    std::function<Outcome()> run;
  };
  const std::size_t w = options.workers;
  const std::vector<Entry> entries = {
      {1, "cubic-clock mean by quadrature", 1.0, cubic_mean},
      {2, "cubic-clock mean by simulation", 60.0, [w] { return cubic_mc(w); }},
      {3, "OU mean, quadrature and simulation", 60.0, [w] { return ou_mean(w); }},
      {4, "first-passage density integrates to the CDF", 1.0, cdf_consistency},
      {5, "arcsine law for the last zero", 120.0, [w] { return arcsine(w); }},
      {6, "last-passage density normalization", 0.0, psi_normalization},
      {7, "second-passage defect identities", 0.0, defect_identities},
      {8, "second-passage CDF by two routes", 0.0, dual_t2_cdf},
      {9, "Laplace transforms", 0.0, laplace_checks},
      {10, "CIR simulation vs conjugation", 120.0, [w] { return cir_conjugation(w); }},
      {11, "small-t asymptotic of the T2 density", 0.0, small_t_asymptotic},
      {12, "nth-passage recursion", 0.0, recursion},
  };

  std::vector<CriterionResult> results;
  for (const Entry& e : entries) {
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("threw: ") + ex.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (e.limit > 0.0) o = within_runtime(std::move(o), r.seconds, e.limit);
    r.passed = o.passed;
    r.detail = std::move(o.detail);
    results.push_back(std::move(r));
  }
  return results;
}

void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results) {
  std::size_t passed = 0;
  for (const CriterionResult& r : results) {
    out << format("%s  #%-2d %-46s (%7.2fs)  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds)
        << r.detail << '\n';
    passed += r.passed ? 1 : 0;
  }
  out << passed << "/" << results.size() << " criteria passed\n";
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace passage
