#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tlstark/tlstark.hpp"

namespace tlstark::testing {

inline MoleculeSpecies c60() { return {"C60", 720.66, 88.9}; }
inline MoleculeSpecies c70() { return {"C70", 840.77, 108.5}; }

inline ModelContext context(const MoleculeSpecies& sp = c60()) {
  ModelContext ctx;
  ctx.species = sp;
  ctx.quadrature = QuadratureOptions{1e-10, 1e-12, 4, 4000};
  return ctx;
}

/// Smooth single-bump visibility, same shape as the shipped default config.
inline VisibilityCurve bump_visibility() {
  std::vector<double> v, y;
  for (double x = 40.0; x <= 320.0; x += 10.0) {
    v.push_back(x);
    y.push_back(0.1 + 0.3 * std::exp(-std::pow((x - 150.0) / 40.0, 2)));
  }
  return VisibilityCurve(v, y);
}

inline std::vector<std::pair<std::string, VelocityDistribution>> reference_settings() {
  return {{"v109", VelocityDistribution::gaussian(109.0, 0.07)},
          {"v117", VelocityDistribution::gaussian(117.0, 0.08)},
          {"v199", VelocityDistribution::gaussian(199.0, 0.16)}};
}

inline NoiseModel noise(double counts, std::uint64_t seed, bool shot = true, double drift = 0.0) {
  NoiseModel n;
  n.counts_scale = counts;
  n.seed = seed;
  n.shot_noise = shot;
  n.drift_rate = drift;
  return n;
}

inline std::vector<double> kilovolts(double from, double to, double step) {
  std::vector<double> out;
  for (double u = from; u <= to + 1e-9; u += step) out.push_back(u * 1e3);
  return out;
}

}  // namespace tlstark::testing
