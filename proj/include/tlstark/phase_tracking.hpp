#pragma once

// Drift compensation against bracketing zero-voltage references and
// unwrapping of fringe phases along a voltage series.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"

namespace tlstark {

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
  double r = std::remainder(phi, constants::two_pi);
  if (r <= -constants::pi) r += constants::two_pi;
  return r;
}

struct PhaseSample {
  double phase = 0.0;     ///< rad
  double variance = 0.0;  ///< rad^2
  double sequence = 0.0;  ///< acquisition time ordinal
};

/// Measurement phase minus the reference phase interpolated linearly in
/// sequence time between the bracketing references. The result is wrapped
/// into (-pi, pi]; its variance includes the interpolated reference error.
inline PhaseSample drift_correct(const PhaseSample& scan, const std::optional<PhaseSample>& before,
                                 const std::optional<PhaseSample>& after) {
  if (!before || !after) throw ProtocolError("measurement is not bracketed by reference scans");
  if (!(before->sequence < scan.sequence && scan.sequence < after->sequence))
    throw ProtocolError("reference scans must be taken before and after the measurement");
  const double t = (scan.sequence - before->sequence) / (after->sequence - before->sequence);
  const double ref = before->phase + t * wrap_phase(after->phase - before->phase);
  PhaseSample out;
  out.phase = wrap_phase(scan.phase - ref);
  out.variance = scan.variance + (1 - t) * (1 - t) * before->variance + t * t * after->variance;
  out.sequence = scan.sequence;
  return out;
}

struct UnwrapResult {
  std::vector<double> phases;  ///< unwrapped, rad; NaN where flagged
  std::vector<double> shifts;  ///< m; NaN where flagged
  std::vector<std::size_t> flagged;
  double curvature = 0.0;      ///< fitted c in phase = c U^2, rad/V^2
};

/// Unwraps fringe phases of a voltage series by continuity with the running
/// quadratic prediction c U^2, c fitted to the points accepted so far. A
/// point whose residual against the prediction exceeds pi/2 after choosing
/// the nearest branch is flagged and excluded, never guessed.
inline UnwrapResult unwrap_shift_series(const std::vector<double>& phases, const std::vector<double>& voltages,
                                        double grating_period) {
  if (phases.size() != voltages.size()) throw DomainError("phase and voltage series differ in length");
  for (std::size_t i = 1; i < voltages.size(); ++i)
    if (voltages[i] < voltages[i - 1]) throw DomainError("voltages must be sorted ascending");

  UnwrapResult out;
  out.phases.resize(phases.size());
  out.shifts.resize(phases.size());
  double su4 = 0.0, sphi_u2 = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double u2 = voltages[i] * voltages[i];
    const double c = su4 > 0.0 ? sphi_u2 / su4 : 0.0;
    const double predicted = c * u2;
    const double branch = std::round((predicted - phases[i]) / constants::two_pi);
    const double unwrapped = phases[i] + constants::two_pi * branch;
    // Without an established trend the principal branch is taken as is.
    if (su4 > 0.0 && std::abs(unwrapped - predicted) > 0.5 * constants::pi) {
      out.flagged.push_back(i);
      out.phases[i] = out.shifts[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.phases[i] = unwrapped;
    out.shifts[i] = unwrapped * grating_period / constants::two_pi;
    su4 += u2 * u2;
    sphi_u2 += unwrapped * u2;
  }
  out.curvature = su4 > 0.0 ? sphi_u2 / su4 : 0.0;
  return out;
}

}  // namespace tlstark
