#pragma once

// Synthetic fringe scans and measurement campaigns with shot noise and a
// linear phase drift in acquisition time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tlstark/campaign.hpp"
#include "tlstark/constants.hpp"
#include "tlstark/errors.hpp"
#include "tlstark/rng.hpp"
#include "tlstark/signal_model.hpp"

namespace tlstark {

struct NoiseModel {
  double counts_scale = 1e4;  ///< mean counts per point at normalized signal 1
  double drift_rate = 0.0;    ///< rad per sequence step
  std::uint64_t seed = 1;
  bool shot_noise = true;     ///< false: counts are the exact expectation

  void validate() const {
    if (!(counts_scale >= 0.0)) throw DomainError("counts scale must be non-negative");
    if (!std::isfinite(drift_rate)) throw DomainError("drift rate must be finite");
  }
};

/// Mask positions start, start + step, ... (count points).
inline std::vector<double> scan_positions(double start, double step, int count) {
  if (!(step > 0.0) || count < 1) throw DomainError("scan positions need a positive step and count");
  std::vector<double> p(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) p[i] = start + step * i;
  return p;
}

inline FringeScan synthesize_scan(const ModelContext& ctx, double alpha_volume, double voltage,
                                  const VelocityDistribution& dist, const VisibilityCurve& vis,
                                  const NoiseModel& noise, const std::vector<double>& positions, long sequence,
                                  RandomStream& rng) {
  noise.validate();
  const auto m = phasor_moments(ctx, alpha_volume, voltage, dist, vis);
  const double g = ctx.geometry.grating_period;
  const double drift = noise.drift_rate * static_cast<double>(sequence);
  FringeScan scan;
  scan.positions = positions;
  scan.voltage = voltage;
  scan.sequence = sequence;
  scan.role = voltage == 0.0 ? ScanRole::reference : ScanRole::measurement;
  scan.counts.reserve(positions.size());
  for (double x : positions) {
    const double signal =
        1.0 + m.mean_visibility * std::cos(constants::two_pi * (x - m.mean_shift) / g - drift);
    const double expected = noise.counts_scale * signal;
    scan.counts.push_back(noise.shot_noise ? static_cast<double>(rng.poisson(expected)) : expected);
  }
  return scan;
}

inline FringeScan synthesize_scan(const ModelContext& ctx, double alpha_volume, double voltage,
                                  const VelocityDistribution& dist, const VisibilityCurve& vis,
                                  const NoiseModel& noise, const std::vector<double>& positions,
                                  long sequence = 0) {
  RandomStream rng(noise.seed);
  return synthesize_scan(ctx, alpha_volume, voltage, dist, vis, noise, positions, sequence, rng);
}

struct Protocol {
  std::vector<double> voltages;  ///< V, high-voltage series in acquisition order
  double start = 0.0;            ///< m, first mask position
  double step = 20e-9;           ///< m
  int points = 149;              ///< about three periods of a 991 nm grating
  double dwell = 1.0;            ///< s per point

  static Protocol standard() {
    Protocol p;
    for (int kv = 3; kv <= 15; ++kv) p.voltages.push_back(kv * 1e3);
    return p;
  }
};

/// Reference, HV_1, reference, HV_2, ..., HV_n, reference for each setting in
/// turn; one random stream and one sequence counter span the campaign.
inline Campaign synthesize_campaign(const ModelContext& ctx, double alpha_volume, const VisibilityCurve& vis,
                                    const std::vector<std::pair<std::string, VelocityDistribution>>& settings,
                                    const Protocol& protocol, const NoiseModel& noise) {
  if (settings.empty()) throw DomainError("campaign needs at least one velocity setting");
  if (protocol.voltages.empty()) throw DomainError("campaign needs at least one voltage");
  ctx.validate();
  noise.validate();

  Campaign c;
  c.species = ctx.species;
  c.geometry = ctx.geometry;
  c.field = ctx.field;
  c.voltage_min = *std::min_element(protocol.voltages.begin(), protocol.voltages.end());
  c.voltage_max = *std::max_element(protocol.voltages.begin(), protocol.voltages.end());
  const auto positions = scan_positions(protocol.start, protocol.step, protocol.points);

  RandomStream rng(noise.seed);
  long sequence = 0;
  auto add = [&](VelocitySetting& s, double voltage) {
    auto scan = synthesize_scan(ctx, alpha_volume, voltage, s.dist, vis, noise, positions, sequence++, rng);
    scan.dwell = protocol.dwell;
    s.scans.push_back(std::move(scan));
  };
  for (const auto& [label, dist] : settings) {
    VelocitySetting s{label, dist, {}};
    add(s, 0.0);
    for (double u : protocol.voltages) {
      if (!(u > 0.0)) throw DomainError("high-voltage scans need a positive voltage");
      add(s, u);
      add(s, 0.0);
    }
    c.settings.push_back(std::move(s));
  }
  return c;
}

/// Signal at a fixed mask position versus voltage, as counts.
inline SweepRecord synthesize_sweep(const ModelContext& ctx, double alpha_volume, const VelocityDistribution& dist,
                                    const VisibilityCurve& vis, double x_fixed, const std::vector<double>& voltages,
                                    const NoiseModel& noise, const std::string& label = "sweep") {
  noise.validate();
  RandomStream rng(noise.seed);
  SweepRecord r{label, dist, x_fixed, voltages, {}};
  for (const auto& p : voltage_sweep(ctx, alpha_volume, dist, vis, x_fixed, voltages)) {
    const double expected = noise.counts_scale * p.signal;
    r.counts.push_back(noise.shot_noise ? static_cast<double>(rng.poisson(expected)) : expected);
  }
  return r;
}

}  // namespace tlstark
