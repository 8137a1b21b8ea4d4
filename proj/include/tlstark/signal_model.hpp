#pragma once

// Velocity-averaged fringe pattern.
//
// With k = 2 pi / g, f normalized and A = int f V e^{i k s(v)} dv,
//   int f(v) [1 + V(v) cos(k (x - s(v)))] dv = 1 + Re[e^{ikx} conj(A)]
//                                            = 1 + |A| cos(k x - arg A),
// so the mean visibility is |A| and the mean shift is arg(A) / k.

#include <cmath>
#include <complex>
#include <vector>

#include "tlstark/constants.hpp"
#include "tlstark/core_model.hpp"
#include "tlstark/quadrature.hpp"
#include "tlstark/velocity.hpp"
#include "tlstark/visibility.hpp"

namespace tlstark {

/// Everything the forward model needs besides alpha, U and the beam.
struct ModelContext {
  MoleculeSpecies species;
  DeflectometerGeometry geometry;
  DeflectorField field;
  QuadratureOptions quadrature;

  void validate() const {
    species.validate();
    geometry.validate();
    field.validate();
    quadrature.validate();
  }
};

struct PatternMoments {
  double mean_visibility = 0.0;  ///< |A|
  double mean_shift = 0.0;       ///< m, continued along increasing U^2
  double mean_offset = 1.0;      ///< int f dv
};

/// Phase 2 pi s(v) / g acquired at velocity v, for alpha U^2 fixed.
class PhaseLaw {
 public:
  PhaseLaw(const ModelContext& ctx, double alpha_volume, double voltage)
      : scale_(constants::two_pi * shift_coefficient(ctx.species, ctx.field, ctx.geometry) *
               alpha_volume * voltage * voltage / ctx.geometry.grating_period) {
    if (!(alpha_volume >= 0.0)) throw DomainError("polarizability volume must be non-negative");
    if (!(voltage >= 0.0)) throw DomainError("voltage must be non-negative");
  }
  double operator()(double v) const { return scale_ / (v * v); }

 private:
  double scale_;
};

/// Integral of the normalized velocity density weighted by V(v).
inline double forward_visibility(const VelocityDistribution& dist, const VisibilityCurve& vis,
                                 const QuadratureOptions& opts = {}) {
  auto f = [&](double v) { return dist.density(v) * vis(v); };
  return integrate_pieces(f, dist.breakpoints(), opts).value;
}

/// Mean visibility and shift of the velocity-averaged pattern.
///
/// The shift is reported as  phi_c + arg(A e^{-i phi_c}) , where phi_c is
/// the f V weighted mean phase. phi_c grows continuously with U^2, so the
/// shift is unwrapped even when it exceeds several grating periods.
inline PatternMoments phasor_moments(const ModelContext& ctx, double alpha_volume, double voltage,
                                     const VelocityDistribution& dist, const VisibilityCurve& vis) {
  const PhaseLaw phase(ctx, alpha_volume, voltage);
  const auto breaks = dist.breakpoints();
  const auto& q = ctx.quadrature;

  const double offset = integrate_pieces([&](double v) { return dist.density(v); }, breaks, q).value;
  const double weight = integrate_pieces([&](double v) { return dist.density(v) * vis(v); }, breaks, q).value;

  PatternMoments m;
  m.mean_offset = offset;
  if (voltage == 0.0 || alpha_volume == 0.0) {
    m.mean_visibility = weight;
    m.mean_shift = 0.0;
    return m;
  }

  // Center phase: f V weighted mean, falling back to f weighting for V = 0.
  double center;
  if (weight > 0.0) {
    center = integrate_pieces([&](double v) { return dist.density(v) * vis(v) * phase(v); }, breaks, q).value /
             weight;
  } else {
    center = integrate_pieces([&](double v) { return dist.density(v) * phase(v); }, breaks, q).value / offset;
  }

  auto integrand = [&](double v) {
    return std::polar(dist.density(v) * vis(v), phase(v) - center);
  };
  const std::complex<double> a = integrate_pieces(integrand, breaks, q).value;
  m.mean_visibility = std::abs(a);
  const double arg = (m.mean_visibility > 0.0) ? std::arg(a) : 0.0;
  m.mean_shift = (center + arg) * ctx.geometry.grating_period / constants::two_pi;
  return m;
}

/// Normalized detector signal 1 + V cos(2 pi (x - s) / g).
inline double expected_pattern(double x, const PatternMoments& m, double grating_period) {
  return 1.0 + m.mean_visibility * std::cos(constants::two_pi * (x - m.mean_shift) / grating_period);
}

struct SweepPoint {
  double voltage = 0.0;
  double signal = 0.0;
  double envelope_low = 0.0;   ///< 1 - mean visibility
  double envelope_high = 0.0;  ///< 1 + mean visibility
  PatternMoments moments;
};

/// Signal at a fixed mask-grating position as the deflection voltage is
/// scanned, with the visibility envelope.
inline std::vector<SweepPoint> voltage_sweep(const ModelContext& ctx, double alpha_volume,
                                             const VelocityDistribution& dist, const VisibilityCurve& vis,
                                             double x_fixed, const std::vector<double>& voltages) {
  std::vector<SweepPoint> out;
  out.reserve(voltages.size());
  for (double u : voltages) {
    SweepPoint p;
    p.voltage = u;
    p.moments = phasor_moments(ctx, alpha_volume, u, dist, vis);
    p.signal = expected_pattern(x_fixed, p.moments, ctx.geometry.grating_period);
    p.envelope_low = 1.0 - p.moments.mean_visibility;
    p.envelope_high = 1.0 + p.moments.mean_visibility;
    out.push_back(p);
  }
  return out;
}

}  // namespace tlstark
