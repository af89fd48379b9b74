#pragma once

// Grid simulation of passage times. Every path draws from its own generator seeded by
// (base_seed, path index), so results never depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "passage/analytic.hpp"
#include "passage/transformed.hpp"

namespace passage {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

struct McConfig {
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  double t_max = 100.0;
  std::uint64_t base_seed = kDefaultSeed;
  std::size_t workers = 1;
  /// Count a crossing between grid points with the Brownian-bridge probability
  /// exp(-2 g0 g1 / var). Off by default.
  bool bridge_correction = false;
  /// For conjugated models: Euler-Maruyama on the SDE of X instead of exact Brownian steps of v(X).
  bool euler = false;

  void validate() const;
  std::size_t n_steps() const;
};

struct EstimateCI {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t n_effective = 0;
  double censored_fraction = 0.0;
};

/// Passage times per path, +inf when censored at t_max, plus the mean over hitting paths.
struct SampleSet {
  std::vector<double> samples;
  EstimateCI estimate;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t z);
std::uint64_t path_seed(std::uint64_t base_seed, std::size_t path);

/// First grid straddle of the barrier, linearly interpolated inside the step.
/// OU models step the exact AR(1) solution against a e^{-mu t}.
SampleSet simulate_tau1(const ModelSpec& m, const McConfig& cfg);

struct LastPassageEstimate {
  std::vector<double> z_grid;
  std::vector<double> cdf;
  std::vector<double> samples;  ///< last touch before t, one per conditioning path
  std::size_t n_conditioning = 0;
};

/// Empirical law of the last boundary touch before t among paths with tau_1 <= t.
/// A path started on the boundary has tau_1 = 0 and last touch 0 if it never crosses again.
LastPassageEstimate estimate_last_passage_cdf(const LinearBoundaryProblem& p, double t,
                                              std::span<const double> z_grid, const McConfig& cfg);

struct TailEstimate {
  double probability = 0.0;
  double half_width_95 = 0.0;
  std::size_t n_in_bin = 0;
  std::vector<double> tau1_in_bin;
};

/// Among paths with tau_1 = s in [s_lo, s_hi]: frequency of no boundary straddle in
/// (2s, 2s + t), i.e. the process restarted at tau_1 keeps off the boundary over (s, s + t).
TailEstimate estimate_t2_tail(const LinearBoundaryProblem& p, double s_lo, double s_hi, double t,
                              const McConfig& cfg);

/// sup |F_n - F| over the sample.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);
/// sup over [0, t_max] of |F_n - F| where censored samples (+inf or > t_max) count in n only.
double ks_distance_censored(std::span<const double> samples,
                            const std::function<double(double)>& cdf, double t_max);

/// One sample per line, 17 significant digits, "inf" for censored paths.
void write_samples(std::ostream& out, std::span<const double> samples);

EstimateCI summarize(std::span<const double> samples);

}  // namespace passage
