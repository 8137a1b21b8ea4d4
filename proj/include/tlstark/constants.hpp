#pragma once

#include <numbers>

namespace tlstark::constants {

/// Vacuum permittivity, CODATA 2018 (F/m).
inline constexpr double epsilon0 = 8.8541878128e-12;

/// Unified atomic mass unit, CODATA 2018 (kg).
inline constexpr double amu = 1.66053906660e-27;

/// One cubic angstrom in m^3.
inline constexpr double angstrom3 = 1e-30;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace tlstark::constants
