#pragma once

// Second- and nth-passage laws of x + B_t through S(t) = a + b t, built from the last-passage
// density psi_t(u). Everything here except last_passage_density requires
// p.standing_regime().

#include <cstddef>
#include <span>
#include <vector>

#include "passage/analytic.hpp"
#include "passage/density_curve.hpp"
#include "passage/quadrature.hpp"

namespace passage {

inline constexpr std::size_t kMaxPassageOrder = 6;

/// Density of the last boundary touch before t, conditional on tau_1 <= t. Depends on b only.
double last_passage_density(const LinearBoundaryProblem& p, double t, double u);

/// P(last touch before t <= z | tau_1 <= t), by quadrature of last_passage_density.
IntegralEstimate last_passage_cdf(const LinearBoundaryProblem& p, double t, double z,
                                  const QuadConfig& cfg = {});

/// int_0^s psi_{s+t}(y) dy: probability of no boundary touch in (s, s+t).
IntegralEstimate no_touch_probability(const LinearBoundaryProblem& p, double s, double t,
                                      const QuadConfig& cfg = {});

/// P(T_2 <= t | tau_1 = s).
double t2_cdf_conditional(const LinearBoundaryProblem& p, double t, double s,
                          const QuadConfig& cfg = {});

/// P(T_2 <= t) by nested quadrature over tau_1 and the last-passage law.
double t2_cdf(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg = {});

/// P(T_2 <= t) at b = 0 through the single-integral arccos form. Throws ParameterError if b != 0.
double t2_cdf_arccos(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg = {});

/// Density of T_2 given tau_1 = s.
double t2_conditional_density(const LinearBoundaryProblem& p, double t, double s);

/// Density of T_2 = tau_2 - tau_1.
double t2_density(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg = {});

/// P(T_2 = inf) = 2 sgn(b) E[Phi(b sqrt(tau_1)) - 1/2]. Exactly 0 at b = 0.
double t2_defect(const LinearBoundaryProblem& p, const QuadConfig& cfg = {});

/// Jensen upper bound on t2_defect; even in b.
double gamma_bound(const LinearBoundaryProblem& p);

/// Density of tau_2 by convolution of the conditional T_2 law with tau_1.
double tau2_density(const LinearBoundaryProblem& p, double t, const QuadConfig& cfg = {});

/// Laplace transform of tau2_density (includes the defect: value at 0 is the mass).
double tau2_laplace(const LinearBoundaryProblem& p, double lambda, const QuadConfig& cfg = {});

/// Log-spaced grid over [1e-3, 1e4] * (a-x)^2 with 400 nodes.
std::vector<double> default_passage_grid(const LinearBoundaryProblem& p);

/// Density of tau_n on grid. n = 1, 2 evaluate the closed/convolution forms; n >= 3 recurse
/// through passage_recursion_step. defect_mass = 1 - trapezoid mass (never renormalized).
DensityCurve nth_passage_density(const LinearBoundaryProblem& p, std::size_t n,
                                 std::span<const double> grid, const QuadConfig& cfg = {});

/// One step of the recursion: f_next(t) = int_0^t f_{T|prev}(t-s | s) f_prev(s) ds with f_prev
/// interpolated from prev (monotone cubic). Evaluated on prev's grid.
DensityCurve passage_recursion_step(const LinearBoundaryProblem& p, const DensityCurve& prev,
                                    std::size_t order, const QuadConfig& cfg = {});

/// P(T_n <= t). n >= 3 uses the tau_{n-1} curve on default_passage_grid(p).
double tn_cdf(const LinearBoundaryProblem& p, std::size_t n, double t, const QuadConfig& cfg = {});

}  // namespace passage
