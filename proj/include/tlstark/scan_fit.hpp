#pragma once

// Fringe parameters of a single grating scan.
//
// The counts are modeled as  a + b cos(kx) + c sin(kx)  with k = 2 pi / g,
// fitted by weighted linear least squares with Poisson variances
// max(count, 1). Writing the model as  O (1 + V cos(k (x - s)))  gives
// O = a, V = hypot(b, c) / a and k s = atan2(c, b).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"

namespace tlstark {

enum class ScanRole { measurement, reference };

inline const char* to_string(ScanRole r) { return r == ScanRole::reference ? "reference" : "measurement"; }

inline ScanRole scan_role_from_string(const std::string& s) {
  if (s == "reference") return ScanRole::reference;
  if (s == "measurement") return ScanRole::measurement;
  throw DataError("unknown scan role '" + s + "'");
}

struct FringeScan {
  std::vector<double> positions;  ///< mask grating position, m
  std::vector<double> counts;     ///< detector counts per position
  double dwell = 1.0;             ///< s per point
  double voltage = 0.0;           ///< V
  long sequence = 0;              ///< acquisition order
  ScanRole role = ScanRole::measurement;

  void validate() const {
    if (positions.size() != counts.size()) throw DataError("scan positions and counts differ in length");
    for (std::size_t i = 1; i < positions.size(); ++i)
      if (!(positions[i] > positions[i - 1])) throw DataError("scan positions must be strictly increasing");
    for (double c : counts)
      if (!(c >= 0.0)) throw DataError("scan counts must be non-negative");
    if (!(voltage >= 0.0)) throw DataError("scan voltage must be non-negative");
    if (role == ScanRole::reference && voltage != 0.0) throw DataError("reference scans must have zero voltage");
  }
};

struct ScanFit {
  double offset = 0.0;
  double visibility = 0.0;
  double phase = 0.0;  ///< rad, in (-pi, pi]
  /// Covariance of (offset, visibility, phase).
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  bool visibility_clipped = false;
  double chi2 = 0.0;
  int dof = 0;

  double phase_variance() const { return covariance(2, 2); }
};

inline ScanFit fit_sinusoid(const FringeScan& scan, double grating_period) {
  scan.validate();
  const auto n = static_cast<Eigen::Index>(scan.positions.size());
  if (n < 5) throw DataError("sinusoid fit needs at least five points");
  const double step = (scan.positions.back() - scan.positions.front()) / static_cast<double>(n - 1);
  if (step * static_cast<double>(n) < grating_period * (1.0 - 1e-9))
    throw DataError("scan does not cover a full grating period");

  const double k = constants::two_pi / grating_period;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = scan.positions[i];
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(k * p);
    x(i, 2) = std::sin(k * p);
    y[i] = scan.counts[i];
    w[i] = 1.0 / std::max(scan.counts[i], 1.0);
  }
  const Eigen::Matrix3d normal = x.transpose() * w.asDiagonal() * x;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(normal);
  const auto sv = svd.singularValues();
  if (!(sv[2] > 1e-12 * sv[0])) throw DataError("sinusoid fit design matrix is rank deficient");
  const Eigen::Matrix3d cov_abc = normal.inverse();
  const Eigen::Vector3d coef = cov_abc * (x.transpose() * w.asDiagonal() * y);

  const double a = coef[0], b = coef[1], c = coef[2];
  if (!(a > 0.0)) throw DataError("sinusoid fit gave a non-positive offset");
  const double amp = std::hypot(b, c);

  ScanFit fit;
  fit.offset = a;
  fit.visibility = amp / a;
  fit.phase = std::atan2(c, b);

  Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
  jac(0, 0) = 1.0;
  if (amp > 1e-12 * a) {
    jac(1, 0) = -amp / (a * a);
    jac(1, 1) = b / (a * amp);
    jac(1, 2) = c / (a * amp);
    jac(2, 1) = -c / (amp * amp);
    jac(2, 2) = b / (amp * amp);
    fit.covariance = jac * cov_abc * jac.transpose();
  } else {
    // Amplitude at rounding level: the phase is undetermined.
    fit.visibility = 0.0;
    jac(1, 1) = jac(1, 2) = std::sqrt(0.5) / a;
    fit.covariance = jac * cov_abc * jac.transpose();
    fit.covariance(2, 2) = std::numeric_limits<double>::infinity();
  }
  if (fit.visibility > 1.0) {
    fit.visibility = 1.0;
    fit.visibility_clipped = true;
  }

  const Eigen::VectorXd r = x * coef - y;
  fit.chi2 = r.cwiseProduct(r).dot(w);
  fit.dof = static_cast<int>(n) - 3;
  return fit;
}

}  // namespace tlstark
