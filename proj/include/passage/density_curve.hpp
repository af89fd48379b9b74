#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace passage {

/// A density sampled on a strictly increasing positive time grid, with the probability that
/// the event never happens (or falls outside the grid) carried in defect_mass.
class DensityCurve {
 public:
  /// Validates the invariants; throws ParameterError on violation.
  DensityCurve(std::vector<double> grid, std::vector<double> values, double defect_mass,
               std::string label, bool resolution_warning = false);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double defect_mass() const { return defect_mass_; }
  const std::string& label() const { return label_; }
  /// Set when the grid misses more than 5% of a mass that should be complete.
  bool resolution_warning() const { return resolution_warning_; }
  std::size_t size() const { return grid_.size(); }

  /// Trapezoid rule over the grid.
  double trapezoid_mass() const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  double defect_mass_;
  std::string label_;
  bool resolution_warning_;
};

/// n points from lo to hi, geometric spacing.
std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// Monotone piecewise-cubic interpolant of a DensityCurve in log-time; zero outside the grid,
/// clamped at zero inside.
class CurveInterpolant {
 public:
  explicit CurveInterpolant(const DensityCurve& curve);
  double operator()(double t) const;

 private:
  double log_lo_;
  double log_hi_;
  std::function<double(double)> eval_;  // in log-time
};

}  // namespace passage
