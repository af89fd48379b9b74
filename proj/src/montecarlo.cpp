#include "passage/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "passage/errors.hpp"

namespace passage {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

// Runs body(i) for i in [0, n) over contiguous chunks; each i writes only its own slot.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, const Body& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct PathRng {
  explicit PathRng(std::uint64_t seed) : engine(seed) {}
  double normal() { return gauss(engine); }
  double uniform() { return unif(engine); }
  Rng engine;
  boost::random::normal_distribution<double> gauss;
  boost::random::uniform_01<double> unif;
};

// Brownian bridge between same-sign gaps g0, g1 touches zero with probability
// exp(-2 g0 g1 / var). Below e^-40 no uniform is drawn.
bool bridge_hit(PathRng& rng, double g0, double g1, double var) {
  if (!(var > 0.0)) return false;
  const double exponent = 2.0 * g0 * g1 / var;
  return exponent < 40.0 && rng.uniform() < std::exp(-exponent);
}

// Walks the grid t_k = k dt (last step clipped at t_max) until the gap S - X changes sign.
// step(t0, t1, rng) advances the state and returns {new gap, step variance}; the variance is
// only used by the bridge correction.
template <class Step>
double first_crossing(PathRng& rng, double gap0, const McConfig& cfg, Step&& step) {
  const std::size_t n = cfg.n_steps();
  double g0 = gap0;
  double t0 = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t1 = k == n ? cfg.t_max : static_cast<double>(k) * cfg.dt;
    const auto [g1, var] = step(t0, t1, rng);
    if (g1 <= 0.0) return t0 + (t1 - t0) * g0 / (g0 - g1);
    if (cfg.bridge_correction && bridge_hit(rng, g0, g1, var)) return 0.5 * (t0 + t1);
    g0 = g1;
    t0 = t1;
  }
  return kInf;
}

struct StepResult {
  double gap;
  double var;
};

double simulate_path(const ModelSpec& m, const McConfig& cfg, PathRng& rng) {
  switch (m.kind) {
    case ModelKind::bm_linear: {
      const double sign = m.a > m.x ? 1.0 : -1.0;
      double x = m.x;
      return first_crossing(rng, sign * (m.a - m.x), cfg, [&](double t0, double t1, PathRng& r) {
        const double h = t1 - t0;
        x += std::sqrt(h) * r.normal();
        return StepResult{sign * (m.a + m.b * t1 - x), h};
      });
    }
    case ModelKind::conjugated: {
      const SpaceTransform& v = *m.space;
      if (!cfg.euler) {
        const double target = v.v(m.a);
        double y = v.v(m.x);
        return first_crossing(rng, target - y, cfg, [&](double t0, double t1, PathRng& r) {
          const double h = t1 - t0;
          y += std::sqrt(h) * r.normal();
          return StepResult{target - y, h};
        });
      }
      if (!v.drift || !v.diffusion) throw ParameterError("simulate_tau1: transform has no SDE");
      double x = m.x;
      return first_crossing(rng, m.a - m.x, cfg, [&](double t0, double t1, PathRng& r) {
        const double h = t1 - t0;
        const double sd = v.diffusion(x);
        x += v.drift(x) * h + sd * std::sqrt(h) * r.normal();
        return StepResult{m.a - x, sd * sd * h};
      });
    }
    case ModelKind::time_changed: {
      if (m.ou) {
        const double mu = m.ou->mu;
        const double s2 = m.ou->sigma * m.ou->sigma;
        double x = m.x;
        double cached_h = -1.0, decay = 0.0, sd = 0.0;
        return first_crossing(rng, m.a - m.x, cfg, [&](double t0, double t1, PathRng& r) {
          const double h = t1 - t0;
          if (h != cached_h) {
            cached_h = h;
            decay = std::exp(-mu * h);
            sd = std::sqrt(-s2 * std::expm1(-2.0 * mu * h) / (2.0 * mu));
          }
          x = x * decay + sd * r.normal();
          return StepResult{m.a * std::exp(-mu * t1) - x, s2 * h};
        });
      }
      const TimeChange& c = *m.clock;
      double y = m.x;
      return first_crossing(rng, m.a - m.x, cfg, [&](double t0, double t1, PathRng& r) {
        const double var = std::max(c.rho_increment(t0, t1 - t0), 0.0);
        y += std::sqrt(var) * r.normal();
        return StepResult{m.a - y, var};
      });
    }
  }
  throw ParameterError("simulate_tau1: unsupported model");
}

}  // namespace

void McConfig::validate() const {
  if (n_paths < 1) throw ParameterError("McConfig: n_paths must be >= 1");
  if (!(dt > 0.0) || !(t_max > dt) || !std::isfinite(t_max)) {
    throw ParameterError("McConfig: need 0 < dt < t_max < inf");
  }
  if (workers < 1) throw ParameterError("McConfig: workers must be >= 1");
}

std::size_t McConfig::n_steps() const {
  return static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t path_seed(std::uint64_t base_seed, std::size_t path) {
  return base_seed ^ splitmix64(static_cast<std::uint64_t>(path));
}

EstimateCI summarize(std::span<const double> samples) {
  EstimateCI ci;
  double sum = 0.0;
  std::size_t n = 0;
  for (double s : samples) {
    if (std::isfinite(s)) {
      sum += s;
      ++n;
    }
  }
  ci.n_effective = n;
  ci.censored_fraction =
      samples.empty() ? 0.0 : static_cast<double>(samples.size() - n) / samples.size();
  if (n == 0) {
    ci.mean = kInf;
    ci.half_width_95 = kInf;
    return ci;
  }
  ci.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) {
    if (std::isfinite(s)) ss += (s - ci.mean) * (s - ci.mean);
  }
  ci.half_width_95 = n > 1 ? 1.96 * std::sqrt(ss / static_cast<double>(n - 1) / n) : kInf;
  return ci;
}

SampleSet simulate_tau1(const ModelSpec& m, const McConfig& cfg) {
  cfg.validate();
  m.validate();
  SampleSet out;
  out.samples.assign(cfg.n_paths, kInf);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    PathRng rng(path_seed(cfg.base_seed, i));
    out.samples[i] = simulate_path(m, cfg, rng);
  });
  out.estimate = summarize(out.samples);
  return out;
}

LastPassageEstimate estimate_last_passage_cdf(const LinearBoundaryProblem& p, double t,
                                              std::span<const double> z_grid, const McConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0) || t > cfg.t_max) throw ParameterError("estimate_last_passage_cdf: need 0 < t <= t_max");
  McConfig local = cfg;
  local.t_max = t;
  const std::size_t n = local.n_steps();

  // Per path: last touch before t, or NaN when tau_1 > t.
  std::vector<double> last(cfg.n_paths, std::numeric_limits<double>::quiet_NaN());
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    PathRng rng(path_seed(cfg.base_seed, i));
    double x = p.x;
    double g0 = p.a - p.x;
    bool hit = g0 == 0.0;
    double lambda = 0.0;
    double t0 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double t1 = k == n ? t : static_cast<double>(k) * cfg.dt;
      const double h = t1 - t0;
      x += std::sqrt(h) * rng.normal();
      const double g1 = p.a + p.b * t1 - x;
      if (g0 != 0.0 && (g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0))) {
        hit = true;
        lambda = t0 + h * g0 / (g0 - g1);
      } else if (cfg.bridge_correction && g0 != 0.0 && bridge_hit(rng, g0, g1, h)) {
        hit = true;
        lambda = 0.5 * (t0 + t1);
      }
      g0 = g1;
      t0 = t1;
    }
    if (hit) last[i] = lambda;
  });

  LastPassageEstimate out;
  for (double l : last) {
    if (!std::isnan(l)) out.samples.push_back(l);
  }
  out.n_conditioning = out.samples.size();
  if (out.n_conditioning < 100) {
    throw InsufficientSamplesError("estimate_last_passage_cdf: only " +
                                   std::to_string(out.n_conditioning) +
                                   " paths reach the boundary before t (need 100)");
  }
  std::vector<double> sorted = out.samples;
  std::sort(sorted.begin(), sorted.end());
  out.z_grid.assign(z_grid.begin(), z_grid.end());
  for (double z : out.z_grid) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin();
    out.cdf.push_back(z >= t ? 1.0 : static_cast<double>(below) / sorted.size());
  }
  return out;
}

TailEstimate estimate_t2_tail(const LinearBoundaryProblem& p, double s_lo, double s_hi, double t,
                              const McConfig& cfg) {
  cfg.validate();
  if (!(s_lo >= 0.0 && s_hi > s_lo) || !(t > 0.0)) {
    throw ParameterError("estimate_t2_tail: need 0 <= s_lo < s_hi and t > 0");
  }
  if (2.0 * s_hi + t > cfg.t_max) throw ParameterError("estimate_t2_tail: need 2 s_hi + t <= t_max");
  if (p.a == p.x) throw DegenerateProblemError("estimate_t2_tail: a == x");

  // Per path: -1 outside the bin, 0 touched in the window, 1 kept off.
  std::vector<int> outcome(cfg.n_paths, -1);
  std::vector<double> tau1(cfg.n_paths, kInf);
  const double sign = p.a > p.x ? 1.0 : -1.0;
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    PathRng rng(path_seed(cfg.base_seed, i));
    double x = p.x;
    double g0 = sign * (p.a - p.x);
    double t0 = 0.0;
    double s = kInf;
    for (std::size_t k = 1;; ++k) {
      const double t1 = static_cast<double>(k) * cfg.dt;
      const double h = t1 - t0;
      x += std::sqrt(h) * rng.normal();
      const double g1 = sign * (p.a + p.b * t1 - x);
      const bool crossed = (g0 < 0.0) != (g1 < 0.0) || g1 == 0.0;
      const double tc = crossed ? t0 + h * g0 / (g0 - g1) : 0.0;
      if (!std::isfinite(s)) {
        if (crossed) {
          s = tc;
          if (s < s_lo || s > s_hi) return;
          tau1[i] = s;
        } else if (t1 > s_hi) {
          return;
        }
      } else {
        if (crossed && tc > 2.0 * s && tc <= 2.0 * s + t) {
          outcome[i] = 0;
          return;
        }
        if (t1 >= 2.0 * s + t) {
          outcome[i] = 1;
          return;
        }
      }
      g0 = g1;
      t0 = t1;
    }
  });

  TailEstimate out;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    if (outcome[i] < 0) continue;
    ++out.n_in_bin;
    kept += static_cast<std::size_t>(outcome[i]);
    out.tau1_in_bin.push_back(tau1[i]);
  }
  if (out.n_in_bin < 100) {
    throw InsufficientSamplesError("estimate_t2_tail: only " + std::to_string(out.n_in_bin) +
                                   " paths with tau_1 in the bin (need 100)");
  }
  const double n = static_cast<double>(out.n_in_bin);
  out.probability = static_cast<double>(kept) / n;
  out.half_width_95 = 1.96 * std::sqrt(out.probability * (1.0 - out.probability) / n);
  return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 2) throw ParameterError("ks_distance: need at least 2 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_distance_censored(std::span<const double> samples,
                            const std::function<double(double)>& cdf, double t_max) {
  if (samples.size() < 2) throw ParameterError("ks_distance_censored: need at least 2 samples");
  std::vector<double> observed;
  for (double s : samples) {
    if (s <= t_max) observed.push_back(s);
  }
  std::sort(observed.begin(), observed.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double f = cdf(observed[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return std::max(d, cdf(t_max) - static_cast<double>(observed.size()) / n);
}

void write_samples(std::ostream& out, std::span<const double> samples) {
  char buf[64];
  for (double s : samples) {
    if (std::isfinite(s)) {
      std::snprintf(buf, sizeof buf, "%.17g\n", s);
      out << buf;
    } else {
      out << "inf\n";
    }
  }
}

}  // namespace passage
