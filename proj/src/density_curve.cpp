#include "passage/density_curve.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

// pchip.hpp in Boost 1.74 calls isnan unqualified; it resolves to boost::math::isnan.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "passage/errors.hpp"

namespace passage {

DensityCurve::DensityCurve(std::vector<double> grid, std::vector<double> values,
                           double defect_mass, std::string label, bool resolution_warning)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      defect_mass_(defect_mass),
      label_(std::move(label)),
      resolution_warning_(resolution_warning) {
  if (grid_.size() != values_.size()) throw ParameterError("DensityCurve: grid/values size mismatch");
  if (grid_.empty()) throw ParameterError("DensityCurve: empty grid");
  if (!(grid_.front() > 0.0)) throw ParameterError("DensityCurve: grid must be positive");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw ParameterError("DensityCurve: grid not strictly increasing");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("DensityCurve: negative or non-finite value");
  }
  if (!(defect_mass_ >= 0.0 && defect_mass_ <= 1.0)) {
    throw ParameterError("DensityCurve: defect_mass outside [0, 1]");
  }
  if (trapezoid_mass() + defect_mass_ > 1.0 + 1e-6) {
    throw ParameterError("DensityCurve: mass plus defect exceeds 1");
  }
}

double DensityCurve::trapezoid_mass() const { return trapezoid(grid_, values_); }

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ParameterError("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo) || n < 2) throw ParameterError("linear_grid: need lo < hi and n >= 2");
  std::vector<double> g(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

CurveInterpolant::CurveInterpolant(const DensityCurve& curve) {
  if (curve.size() < 4) throw ParameterError("CurveInterpolant: need at least 4 grid points");
  std::vector<double> lx(curve.size());
  std::transform(curve.grid().begin(), curve.grid().end(), lx.begin(),
                 [](double t) { return std::log(t); });
  std::vector<double> y = curve.values();
  log_lo_ = lx.front();
  log_hi_ = lx.back();
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto spline = std::make_shared<Pchip>(std::move(lx), std::move(y));
  eval_ = [spline](double s) { return (*spline)(s); };
}

double CurveInterpolant::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  const double s = std::log(t);
  if (s < log_lo_ || s > log_hi_) return 0.0;
  return std::max(0.0, eval_(s));
}

}  // namespace passage
