#pragma once

// Closed-form kernels for Brownian motion x + B_t against the line S(t) = a + b t.

namespace passage {

enum class HitRegime { certain, defective };

struct LinearBoundaryProblem {
  double a = 1.0;  ///< barrier intercept
  double b = 0.0;  ///< barrier slope
  double x = 0.0;  ///< starting point

  /// |a - x|.
  double distance() const;
  /// Slope seen from the start side: b * sgn(a - x). Hitting is certain iff this is <= 0.
  double effective_slope() const;
  HitRegime regime() const;
  /// (b <= 0 and x < a) or (b >= 0 and x > a); required by the second/nth-passage laws.
  bool standing_regime() const;
};

double std_normal_pdf(double z);
double std_normal_cdf(double z);
/// log Phi(z), accurate far into the lower tail.
double log_std_normal_cdf(double z);

/// Inverse-Gaussian first-passage density.
double fpt_density(const LinearBoundaryProblem& p, double t);
/// Bachelier-Levy first-passage distribution function.
double fpt_cdf(const LinearBoundaryProblem& p, double t);
double hit_probability(const LinearBoundaryProblem& p);
/// E[tau_1]; +inf at b = 0. Throws RegimeError in the defective regime.
double fpt_mean(const LinearBoundaryProblem& p);
/// E[exp(-lambda tau_1)], including the defect (value at 0 is hit_probability).
double fpt_laplace_closed(const LinearBoundaryProblem& p, double lambda);

}  // namespace passage
