#pragma once

// Recovery of the single-velocity visibility V(v) from visibilities measured
// with several broad velocity distributions.
//
// V is represented by its values on a velocity grid with piecewise-linear
// (hat) basis functions, clamped outside the grid. Each measurement then is a
// linear functional K_i . V. The solution minimizes
//
//   sum_i ((K_i . V - y_i) / sigma_i)^2 + lambda |D2 V|^2,   0 <= V <= 1,
//
// with D2 the second-difference operator. Constants and linear functions lie
// in the null space of the penalty, so they are reproduced for every lambda.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "tlstark/errors.hpp"
#include "tlstark/quadrature.hpp"
#include "tlstark/signal_model.hpp"
#include "tlstark/velocity.hpp"
#include "tlstark/visibility.hpp"

namespace tlstark {

struct VisibilityMeasurement {
  VelocityDistribution dist;
  double visibility = 0.0;
  double uncertainty = 0.0;
};

struct DeconvolutionOptions {
  /// Fixed regularization strength; chosen by the discrepancy principle
  /// (chi^2 equal to the number of measurements) when empty.
  std::optional<double> lambda;
  double lambda_min = 1e-12;
  double lambda_max = 1e8;
  /// Each distribution's +-coverage_sigmas window must lie inside the grid.
  double coverage_sigmas = 4.0;
  QuadratureOptions quadrature{1e-12, 1e-15, 1, 200};
};

struct DeconvolutionResult {
  VisibilityCurve curve;
  double lambda = 0.0;
  double chi2 = 0.0;
  std::vector<double> residuals;  ///< model minus measured, discretized operator
};

namespace detail {

/// Row i holds the integrals of f_i against each hat function.
inline Eigen::MatrixXd kernel_matrix(const std::vector<VisibilityMeasurement>& data,
                                     const std::vector<double>& grid, const QuadratureOptions& q) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& dist = data[i].dist;
    const auto [lo, hi] = dist.support();
    const auto row = static_cast<Eigen::Index>(i);
    auto dens = [&](double v) { return dist.density(v); };
    if (lo < grid.front()) k(row, 0) += integrate(dens, lo, std::min(hi, grid.front()), q).value;
    if (hi > grid.back()) k(row, n - 1) += integrate(dens, std::max(lo, grid.back()), hi, q).value;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const double a = grid[j], b = grid[j + 1];
      if (b <= lo || a >= hi) continue;
      const double h = b - a;
      const double ca = std::max(a, lo), cb = std::min(b, hi);
      auto right = [&](double v) { return dist.density(v) * (v - a) / h; };
      const double whole = integrate(dens, ca, cb, q).value;
      const double upper = integrate(right, ca, cb, q).value;
      k(row, j) += whole - upper;
      k(row, j + 1) += upper;
    }
  }
  return k;
}

inline Eigen::MatrixXd second_difference(Eigen::Index n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(n - 2, 0), n);
  for (Eigen::Index r = 0; r + 2 < n; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  return d;
}

/// Minimizes 1/2 x'Ax - b'x subject to lo <= x <= hi by a primal active-set
/// method. A must be symmetric positive definite.
inline Eigen::VectorXd box_qp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lo, double hi) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = a.ldlt().solve(b).cwiseMax(lo).cwiseMin(hi);
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // -1 at lo, +1 at hi, 0 free
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] <= lo) state[i] = -1;
    else if (x[i] >= hi) state[i] = 1;
  }
  const double tiny = 1e-14;
  for (int iter = 0; iter < 10 * static_cast<int>(n) + 10; ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (state[i] == 0) free.push_back(i);

    Eigen::VectorXd target = x;
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd af(nf, nf);
      Eigen::VectorXd bf(nf);
      for (Eigen::Index r = 0; r < nf; ++r) {
        double rhs = b[free[r]];
        for (Eigen::Index j = 0; j < n; ++j)
          if (state[j] != 0) rhs -= a(free[r], j) * x[j];
        bf[r] = rhs;
        for (Eigen::Index c = 0; c < nf; ++c) af(r, c) = a(free[r], free[c]);
      }
      const Eigen::VectorXd xf = af.ldlt().solve(bf);
      for (Eigen::Index r = 0; r < nf; ++r) target[free[r]] = xf[r];
    }

    const Eigen::VectorXd step = target - x;
    if (step.lpNorm<Eigen::Infinity>() <= tiny) {
      // Stationary on the working set: release the worst wrong-signed bound.
      const Eigen::VectorXd grad = a * x - b;
      Eigen::Index release = -1;
      double worst = -1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = state[i] == -1 ? grad[i] : (state[i] == 1 ? -grad[i] : 0.0);
        if (mu < worst) {
          worst = mu;
          release = i;
        }
      }
      if (release < 0) return x;
      state[release] = 0;
      continue;
    }

    double t = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i : free) {
      if (step[i] < 0.0 && target[i] < lo) {
        const double ti = (lo - x[i]) / step[i];
        if (ti < t) t = ti, blocking = i;
      } else if (step[i] > 0.0 && target[i] > hi) {
        const double ti = (hi - x[i]) / step[i];
        if (ti < t) t = ti, blocking = i;
      }
    }
    x += t * step;
    if (blocking >= 0) {
      state[blocking] = step[blocking] < 0.0 ? -1 : 1;
      x[blocking] = state[blocking] < 0 ? lo : hi;
    }
  }
  throw NumericError("bound-constrained least squares did not terminate");
}

}  // namespace detail

class VisibilityDeconvolver {
 public:
  VisibilityDeconvolver(std::vector<VisibilityMeasurement> data, std::vector<double> grid,
                        DeconvolutionOptions opts = {})
      : data_(std::move(data)), grid_(std::move(grid)), opts_(opts) {
    if (data_.size() < 3) throw DataError("deconvolution needs at least three measurements");
    std::set<double> means;
    for (const auto& m : data_) means.insert(m.dist.mean_v());
    if (means.size() < 3) throw DataError("deconvolution needs at least three distinct mean velocities");
    if (grid_.size() < 3) throw DomainError("deconvolution grid needs at least three nodes");
    for (std::size_t j = 1; j < grid_.size(); ++j)
      if (!(grid_[j] > grid_[j - 1])) throw DomainError("deconvolution grid must be strictly increasing");
    for (const auto& m : data_) {
      if (!(m.uncertainty > 0.0)) throw DataError("measurement uncertainty must be positive");
      const auto [lo, hi] = m.dist.window(opts_.coverage_sigmas);
      if (lo < grid_.front() || hi > grid_.back())
        throw DomainError("deconvolution grid does not cover a velocity distribution");
    }

    kernel_ = detail::kernel_matrix(data_, grid_, opts_.quadrature);
    const auto m = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd w(m), y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      w[i] = 1.0 / (data_[i].uncertainty * data_[i].uncertainty);
      y[i] = data_[i].visibility;
    }
    y_ = y;
    weights_ = w;
    normal_ = kernel_.transpose() * w.asDiagonal() * kernel_;
    rhs_ = kernel_.transpose() * w.asDiagonal() * y;
    const Eigen::MatrixXd d = detail::second_difference(static_cast<Eigen::Index>(grid_.size()));
    penalty_ = d.transpose() * d;
  }

  /// Constrained solution for a fixed lambda.
  Eigen::VectorXd solve(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("regularization strength must be positive");
    const Eigen::MatrixXd a = normal_ + lambda * penalty_;
    return detail::box_qp(a, rhs_, 0.0, 1.0);
  }

  double chi2(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd r = kernel_ * v - y_;
    return r.cwiseProduct(r).dot(weights_);
  }

  /// Discrepancy principle: chi^2(lambda) = number of measurements, found by
  /// bisection in log lambda. chi^2 grows monotonically with lambda.
  double discrepancy_lambda() const {
    const double target = static_cast<double>(data_.size());
    double lo = std::log(opts_.lambda_min), hi = std::log(opts_.lambda_max);
    if (chi2(solve(std::exp(lo))) >= target) return std::exp(lo);
    if (chi2(solve(std::exp(hi))) <= target) return std::exp(hi);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (chi2(solve(std::exp(mid))) > target) hi = mid;
      else lo = mid;
      if (hi - lo < 1e-3) break;
    }
    return std::exp(0.5 * (lo + hi));
  }

  DeconvolutionResult run() const {
    const double lambda = opts_.lambda ? *opts_.lambda : discrepancy_lambda();
    const Eigen::VectorXd v = solve(lambda);
    std::vector<double> values(v.data(), v.data() + v.size());
    for (double& x : values) x = std::clamp(x, 0.0, 1.0);
    DeconvolutionResult out{VisibilityCurve(grid_, values), lambda, chi2(v), {}};
    const Eigen::VectorXd r = kernel_ * v - y_;
    out.residuals.assign(r.data(), r.data() + r.size());
    return out;
  }

  const Eigen::MatrixXd& kernel() const { return kernel_; }

 private:
  std::vector<VisibilityMeasurement> data_;
  std::vector<double> grid_;
  DeconvolutionOptions opts_;
  Eigen::MatrixXd kernel_, normal_, penalty_;
  Eigen::VectorXd rhs_, y_, weights_;
};

inline DeconvolutionResult deconvolve_visibility(std::vector<VisibilityMeasurement> data,
                                                 std::vector<double> grid, DeconvolutionOptions opts = {}) {
  return VisibilityDeconvolver(std::move(data), std::move(grid), opts).run();
}

}  // namespace tlstark
