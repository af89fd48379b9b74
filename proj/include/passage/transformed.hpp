#pragma once

// Passage laws for diffusions that reduce to Brownian motion through a monotone change of space
// (X = v^-1(B + v(x))) or of time (X = x + B(rho(t))).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "passage/analytic.hpp"
#include "passage/density_curve.hpp"
#include "passage/quadrature.hpp"

namespace passage {

using RealMap = std::function<double(double)>;

/// Strictly increasing v with v(0) = 0 on [domain_lo, domain_hi].
struct SpaceTransform {
  std::string name;
  RealMap v;
  RealMap v_inverse;
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  // SDE coefficients of X, used by the Euler scheme in the Monte Carlo module.
  RealMap drift;
  RealMap diffusion;

  /// v(x) = 2 sqrt(x); dX = dt/4 + sqrt(X) dB on [0, inf).
  static SpaceTransform cir();
  /// v(x) = 2 arcsin(sqrt(x)); dX = (1 - 2X)/4 dt + sqrt(X(1 - X)) dB on [0, 1].
  static SpaceTransform wright_fisher();
  /// Inverse by bisection on [v(lo), v(hi)] to 1e-12. hi may be +inf.
  static SpaceTransform custom(std::string name, RealMap v, double lo, double hi);

  bool contains(double x) const { return x >= domain_lo && x <= domain_hi; }
  /// Throws ParameterError unless v is strictly increasing on the sample and v(v^-1(y)) = y
  /// within 1e-10.
  void check_invariants(std::span<const double> sample) const;
};

/// Increasing differentiable clock with rho(0) = 0.
struct TimeChange {
  std::string name;
  RealMap rho;
  RealMap rho_prime;
  RealMap rho_inverse;
  /// (t, h) -> rho(t + h) - rho(t), free of cancellation for small h.
  std::function<double(double, double)> rho_increment;
  double rho_limit = 0.0;                 ///< sup rho, possibly +inf
  std::optional<double> growth_alpha;     ///< rho(t) ~ c t^alpha
  bool exponential_growth = false;

  static TimeChange identity();
  /// rho(t) = t^3 / 3.
  static TimeChange cubic();
  /// rho(t) = sigma^2 / (2 mu) (e^{2 mu t} - 1), the clock of e^{mu t} X_t for OU X.
  static TimeChange ornstein_uhlenbeck(double mu, double sigma);
  /// Inverse by bisection to 1e-12 (relative), bracket grown geometrically.
  static TimeChange custom(std::string name, RealMap rho, RealMap rho_prime, double rho_limit,
                           std::optional<double> growth_alpha = std::nullopt,
                           bool exponential_growth = false);

  /// Throws ParameterError unless rho(0) = 0, rho increases on the sample and
  /// rho^-1(rho(t)) = t within 1e-9.
  void check_invariants(std::span<const double> sample) const;
};

enum class ModelKind { bm_linear, conjugated, time_changed };

struct OuParams {
  double mu = 1.0;
  double sigma = 1.0;
};

/// A model with start x and barrier a in state units. For bm_linear the barrier is a + b t;
/// with ou set the barrier is a e^{-mu t} and the clock is the OU clock.
struct ModelSpec {
  ModelKind kind = ModelKind::bm_linear;
  double a = 1.0;
  double x = 0.0;
  double b = 0.0;
  std::optional<SpaceTransform> space;
  std::optional<TimeChange> clock;
  std::optional<OuParams> ou;

  static ModelSpec bm(double a, double x, double b);
  static ModelSpec conjugated(SpaceTransform v, double a, double x);
  static ModelSpec time_changed(TimeChange rho, double a, double x);
  static ModelSpec ornstein_uhlenbeck(double mu, double sigma, double a, double x);

  /// Throws ParameterError / DomainError when the model is incomplete or outside its domain.
  void validate() const;
  /// The Brownian problem the model reduces to.
  LinearBoundaryProblem bm_problem() const;
  std::string label() const;
};

// ---- Space transformations -------------------------------------------------------------

/// (a, b, x) = (v(a), 0, v(x)).
LinearBoundaryProblem conj_problem(const ModelSpec& m);
double conj_tau1_density(const ModelSpec& m, double t);
/// 2 (1 - Phi((v(a) - v(x)) / sqrt(t))).
double conj_t1_cdf(const ModelSpec& m, double t);
double conj_t2_density(const ModelSpec& m, double t, const QuadConfig& cfg = {});
double conj_tau2_density(const ModelSpec& m, double t, const QuadConfig& cfg = {});
double conj_tn_cdf(const ModelSpec& m, std::size_t n, double t, const QuadConfig& cfg = {});
DensityCurve conj_nth_passage(const ModelSpec& m, std::size_t n, std::span<const double> grid,
                              const QuadConfig& cfg = {});

// ---- Time changes -----------------------------------------------------------------------

/// Time at which the clock reaches (a - x)^2, or half its limit when that is out of reach.
double tc_time_scale(const ModelSpec& m);

/// f_{tau1^B}(rho(t)) rho'(t).
double tc_tau1_density(const ModelSpec& m, double t);
/// P(tau_1^B <= rho(t)).
double tc_tau1_cdf(const ModelSpec& m, double t);

struct MeanEstimate {
  double value = 0.0;  ///< +inf when the mean does not exist
  double error_estimate = 0.0;
  std::string diagnostic;
};

/// int_0^inf t f_{tau1}(t) dt from the density.
MeanEstimate tc_tau1_mean(const ModelSpec& m, const QuadConfig& cfg = {});

/// Density of T_2 = tau_2 - tau_1:
/// int f_{tau1}(s) k(rho(t+s) - rho(s) | rho(s)) rho'(t+s) ds, k the Brownian conditional law.
double tc_t2_density(const ModelSpec& m, double t, const QuadConfig& cfg = {});
/// int f_{tau2^B}(rho(t+s)) rho'(t+s) f_{tau1}(s) ds, integrating the unconditional tau_2^B
/// law; kept for comparison, it does not integrate to 1 - defect.
double tc_t2_density_unconditioned(const ModelSpec& m, double t, const QuadConfig& cfg = {});
/// f_{tau2^B}(rho(t)) rho'(t).
double tc_tau2_density(const ModelSpec& m, double t, const QuadConfig& cfg = {});
/// P(T_2 = inf) = 1 - P(tau_2^B < rho_limit).
double tc_t2_defect(const ModelSpec& m, const QuadConfig& cfg = {});
/// Same probability through the conditional law given tau_1^B.
double tc_t2_defect_conditional(const ModelSpec& m, const QuadConfig& cfg = {});

enum class PassageIndex { tau1, tau2 };
/// E[e^{-lambda tau}; tau < inf].
double tc_laplace(const ModelSpec& m, PassageIndex which, double lambda, const QuadConfig& cfg = {});

/// f_{tau_n^B}(rho(t)) rho'(t) on grid, computed on the image grid rho(grid).
DensityCurve tc_nth_passage(const ModelSpec& m, std::size_t n, std::span<const double> grid,
                            const QuadConfig& cfg = {});

}  // namespace passage
