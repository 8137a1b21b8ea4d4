#pragma once

// Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Carlson
// slopes with the Fritsch-Butland harmonic mean), clamped to the end values
// outside the node range.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tlstark/errors.hpp"

namespace tlstark {

class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty() || x_.size() != y_.size())
      throw DomainError("interpolation nodes and values must be non-empty and of equal length");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw DomainError("interpolation nodes must be strictly increasing");
    slopes_ = compute_slopes(x_, y_);
  }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * slopes_[k] + h01 * y_[k + 1] + h11 * h * slopes_[k + 1];
  }

  std::span<const double> nodes() const { return x_; }
  std::span<const double> values() const { return y_; }

 private:
  static double end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3 * d0)) return 3 * d0;
    return m;
  }

  static std::vector<double> compute_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      d[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
      m[0] = m[1] = d[0];
      return m;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] <= 0.0) {
        m[k] = 0.0;
      } else {
        const double w1 = 2 * h[k] + h[k - 1];
        const double w2 = h[k] + 2 * h[k - 1];
        m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
      }
    }
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
  }

  std::vector<double> x_, y_, slopes_;
};

}  // namespace tlstark
