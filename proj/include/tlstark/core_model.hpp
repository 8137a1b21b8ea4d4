#pragma once

// Single-molecule Stark deflection in a three-grating deflectometer.
//
// Polarizability is carried as a polarizability volume in cubic angstrom
// everywhere in the library; conversion to SI happens only when a force is
// evaluated.

#include <cmath>
#include <optional>
#include <string>

#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"

namespace tlstark {

struct MoleculeSpecies {
  std::string name;
  double mass_amu = 0.0;
  std::optional<double> alpha_ref;  ///< polarizability volume, A^3

  double mass_kg() const { return mass_amu * constants::amu; }

  void validate() const {
    if (!(mass_amu > 0.0)) throw DomainError("species '" + name + "': mass must be positive");
    if (alpha_ref && !(*alpha_ref > 0.0))
      throw DomainError("species '" + name + "': reference polarizability must be positive");
  }
};

struct DeflectometerGeometry {
  double grating_period = 991e-9;   ///< g, m
  double distance_L = 0.266;        ///< first grating to deflector front edge, m
  double deflector_length = 0.0473; ///< effective electrode length d_eff, m

  static constexpr double min_period = 100e-9;
  static constexpr double max_period = 10e-6;

  void validate() const {
    if (!(grating_period > min_period && grating_period < max_period))
      throw DomainError("grating period outside (100 nm, 10 um)");
    if (!(distance_L > 0.0)) throw DomainError("distance L must be positive");
    if (!(deflector_length > 0.0)) throw DomainError("deflector length must be positive");
  }

  /// d (d/2 + L), the lever arm of the deflection, m^2.
  double lever() const { return deflector_length * (0.5 * deflector_length + distance_L); }
};

/// (E.grad)E_x at the beam center, scaling exactly with the square of the
/// applied voltage.
struct DeflectorField {
  double reference_voltage = 10e3;   ///< V
  double grad_product_ref = 1.45e14; ///< V^2/m^3 at reference_voltage
  double homogeneity_bound = 0.005;  ///< relative deviation across the beam

  void validate() const {
    if (!(reference_voltage > 0.0)) throw DomainError("field reference voltage must be positive");
    if (!(grad_product_ref > 0.0)) throw DomainError("field gradient product must be positive");
    if (!(homogeneity_bound >= 0.0)) throw DomainError("homogeneity bound must be non-negative");
  }

  double grad_product(double voltage) const {
    const double r = voltage / reference_voltage;
    return grad_product_ref * r * r;
  }
};

struct FringeShift {
  double shift = 0.0;  ///< m
  double phase = 0.0;  ///< rad, 2 pi shift / g, not wrapped
};

/// Polarizability volume (A^3) to SI polarizability (C m^2 / V).
inline double alpha_to_si(double alpha_volume) {
  if (!(alpha_volume >= 0.0)) throw DomainError("polarizability volume must be non-negative");
  return 4.0 * constants::pi * constants::epsilon0 * (alpha_volume * constants::angstrom3);
}

inline double alpha_from_si(double alpha_si) {
  if (!(alpha_si >= 0.0)) throw DomainError("SI polarizability must be non-negative");
  return alpha_si / (4.0 * constants::pi * constants::epsilon0) / constants::angstrom3;
}

/// Lateral force alpha (E.grad)E_x in newton.
inline double gradient_force(double alpha_volume, const DeflectorField& field, double voltage) {
  if (!(voltage >= 0.0)) throw DomainError("voltage must be non-negative");
  return alpha_to_si(alpha_volume) * field.grad_product(voltage);
}

/// Shift per unit polarizability volume at velocity v, i.e. the factor
/// kappa in  shift = kappa * alpha * U^2 / v^2, in m / (A^3 V^2) m^2/s^2.
/// Fringe shifts depend on alpha, U and v only through alpha U^2 / v^2.
inline double shift_coefficient(const MoleculeSpecies& species, const DeflectorField& field,
                                const DeflectometerGeometry& geom) {
  return alpha_to_si(1.0) * field.grad_product_ref /
         (field.reference_voltage * field.reference_voltage) / species.mass_kg() * geom.lever();
}

inline FringeShift fringe_shift(const MoleculeSpecies& species, double alpha_volume,
                                const DeflectorField& field, const DeflectometerGeometry& geom,
                                double voltage, double velocity) {
  if (!(velocity > 0.0)) throw DomainError("velocity must be positive");
  const double accel = gradient_force(alpha_volume, field, voltage) / species.mass_kg();
  FringeShift out;
  out.shift = accel * geom.lever() / (velocity * velocity);
  out.phase = constants::two_pi * out.shift / geom.grating_period;
  return out;
}

/// Smallest force that produces a given resolvable fringe shift for a
/// molecule at velocity v (inverse of the deflection law).
inline double force_for_shift(const MoleculeSpecies& species, const DeflectometerGeometry& geom,
                              double shift, double velocity) {
  if (!(velocity > 0.0)) throw DomainError("velocity must be positive");
  return species.mass_kg() * shift * velocity * velocity / geom.lever();
}

}  // namespace tlstark
