#pragma once

#include <vector>

#include "tlstark/errors.hpp"
#include "tlstark/interpolation.hpp"

namespace tlstark {

/// Single-velocity fringe visibility V(v) on a velocity grid. Between nodes
/// the curve is monotone piecewise cubic; outside the grid it is clamped to
/// the end values. Values stay within [0, 1].
class VisibilityCurve {
 public:
  VisibilityCurve(std::vector<double> grid, std::vector<double> values) {
    for (double y : values)
      if (!(y >= 0.0 && y <= 1.0)) throw DomainError("visibility values must lie in [0, 1]");
    interp_ = MonotoneCubic(std::move(grid), std::move(values));
  }

  /// Velocity-independent visibility.
  static VisibilityCurve constant(double value) { return VisibilityCurve({1.0}, {value}); }

  double operator()(double v) const { return interp_(v); }

  std::span<const double> grid() const { return interp_.nodes(); }
  std::span<const double> values() const { return interp_.values(); }

  /// Same grid, every value multiplied by factor and clipped to [0, 1].
  VisibilityCurve scaled(double factor) const {
    std::vector<double> g(grid().begin(), grid().end());
    std::vector<double> y(values().begin(), values().end());
    for (double& v : y) v = std::clamp(v * factor, 0.0, 1.0);
    return VisibilityCurve(std::move(g), std::move(y));
  }

 private:
  MonotoneCubic interp_;
};

}  // namespace tlstark
