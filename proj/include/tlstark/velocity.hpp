#pragma once

// Longitudinal velocity distributions of the molecular beam.
//
// The Gaussian form uses the relative 1/e^2 half-width convention: with
// mean v0 and relative width w the density falls to 1/e^2 of its peak at
// v0 (1 +- w), i.e. the standard deviation is s = w v0 / 2. The density is
// truncated to v > 0 and renormalized.

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"

namespace tlstark {

class VelocityDistribution {
 public:
  enum class Form { gaussian, tabulated };

  /// Number of standard deviations kept on each side for integration.
  static constexpr double support_sigmas = 8.0;

  static VelocityDistribution gaussian(double mean_v, double rel_width) {
    if (!(mean_v > 0.0)) throw DomainError("mean velocity must be positive");
    if (!(rel_width > 0.0 && rel_width < 0.5))
      throw DomainError("gaussian relative width must lie in (0, 0.5)");
    VelocityDistribution d;
    d.form_ = Form::gaussian;
    d.mean_ = mean_v;
    d.rel_width_ = rel_width;
    const double s = d.sigma();
    // Mass of the untruncated Gaussian above v = 0.
    const double above_zero = 0.5 * std::erfc(-mean_v / (s * std::sqrt(2.0)));
    d.norm_ = 1.0 / (s * std::sqrt(2.0 * constants::pi) * above_zero);
    return d;
  }

  /// Piecewise-linear density through (v, density) pairs, renormalized to
  /// unit area. Velocities must be positive and strictly increasing.
  static VelocityDistribution tabulated(std::vector<double> v, std::vector<double> density) {
    if (v.size() < 2 || v.size() != density.size())
      throw DomainError("velocity table needs at least two (v, density) pairs");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) throw DomainError("tabulated velocities must be positive");
      if (i > 0 && !(v[i] > v[i - 1])) throw DomainError("tabulated velocities must increase");
      if (!(density[i] >= 0.0)) throw DomainError("tabulated density must be non-negative");
    }
    double area = 0.0, first = 0.0, second = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      // Exact moments of the linear segment.
      const double a = v[i], b = v[i + 1], fa = density[i], fb = density[i + 1];
      const double h = b - a;
      area += 0.5 * h * (fa + fb);
      first += h * (fa * (2 * a + b) + fb * (a + 2 * b)) / 6.0;
      second += h * (fa * (3 * a * a + 2 * a * b + b * b) + fb * (a * a + 2 * a * b + 3 * b * b)) / 12.0;
    }
    if (!(area > 0.0)) throw DomainError("tabulated density has zero area");
    VelocityDistribution d;
    d.form_ = Form::tabulated;
    d.norm_ = 1.0 / area;
    d.mean_ = first / area;
    const double var = std::max(second / area - d.mean_ * d.mean_, 0.0);
    d.rel_width_ = 2.0 * std::sqrt(var) / d.mean_;
    d.table_v_ = std::move(v);
    d.table_f_ = std::move(density);
    return d;
  }

  Form form() const { return form_; }
  double mean_v() const { return mean_; }
  double rel_width() const { return rel_width_; }
  /// Standard deviation of the untruncated Gaussian, m/s.
  double sigma() const { return 0.5 * rel_width_ * mean_; }
  const std::vector<double>& table_v() const { return table_v_; }
  const std::vector<double>& table_density() const { return table_f_; }

  double density(double v) const {
    if (!(v > 0.0)) return 0.0;
    if (form_ == Form::gaussian) {
      const double z = (v - mean_) / sigma();
      return norm_ * std::exp(-0.5 * z * z);
    }
    if (v < table_v_.front() || v > table_v_.back()) return 0.0;
    const auto it = std::upper_bound(table_v_.begin(), table_v_.end(), v);
    if (it == table_v_.end()) return norm_ * table_f_.back();
    const std::size_t k = static_cast<std::size_t>(it - table_v_.begin()) - 1;
    const double t = (v - table_v_[k]) / (table_v_[k + 1] - table_v_[k]);
    return norm_ * ((1.0 - t) * table_f_[k] + t * table_f_[k + 1]);
  }

  /// Interval outside which the density is negligible (or exactly zero).
  std::pair<double, double> support() const { return window(support_sigmas); }

  /// Central window of +-nsigma standard deviations, clipped to v > 0. For
  /// tabulated distributions this is the table range.
  std::pair<double, double> window(double nsigma) const {
    if (form_ == Form::tabulated) return {table_v_.front(), table_v_.back()};
    const double s = sigma();
    return {std::max(mean_ - nsigma * s, 1e-6 * mean_), mean_ + nsigma * s};
  }

  /// Integration breakpoints: the support ends plus, for Gaussians, the
  /// +-1 and +-3 sigma points; for tables, every node.
  std::vector<double> breakpoints() const {
    if (form_ == Form::tabulated) return table_v_;
    const auto [lo, hi] = support();
    std::vector<double> b{lo};
    for (double k : {-3.0, -1.0, 1.0, 3.0}) {
      const double p = mean_ + k * sigma();
      if (p > lo && p < hi) b.push_back(p);
    }
    b.push_back(hi);
    return b;
  }

 private:
  VelocityDistribution() = default;

  Form form_ = Form::gaussian;
  double mean_ = 0.0;
  double rel_width_ = 0.0;
  double norm_ = 0.0;
  std::vector<double> table_v_, table_f_;
};

}  // namespace tlstark
