#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tlstark/core_model.hpp"
#include "tlstark/errors.hpp"
#include "tlstark/scan_fit.hpp"
#include "tlstark/velocity.hpp"

namespace tlstark {

/// One source setting: a velocity distribution and its interleaved sequence
/// of reference and high-voltage scans.
struct VelocitySetting {
  std::string label;
  VelocityDistribution dist;
  std::vector<FringeScan> scans;
};

/// Signal recorded at a fixed mask-grating position while sweeping U.
struct SweepRecord {
  std::string label;
  VelocityDistribution dist;
  double x_fixed = 0.0;  ///< m
  std::vector<double> voltages;
  std::vector<double> counts;
};

struct Campaign {
  MoleculeSpecies species;
  DeflectometerGeometry geometry;
  DeflectorField field;
  double voltage_min = 3e3;   ///< V, declared high-voltage range
  double voltage_max = 15e3;
  std::vector<VelocitySetting> settings;
  std::vector<SweepRecord> sweeps;

  /// Checks the acquisition protocol: every high-voltage scan has a
  /// reference scan immediately before and after it in sequence order, and
  /// lies inside the declared voltage range.
  void validate() const {
    species.validate();
    geometry.validate();
    field.validate();
    if (settings.empty()) throw DataError("campaign has no velocity settings");
    for (const auto& s : settings) {
      std::vector<const FringeScan*> order;
      for (const auto& scan : s.scans) {
        scan.validate();
        order.push_back(&scan);
      }
      std::sort(order.begin(), order.end(),
                [](const FringeScan* a, const FringeScan* b) { return a->sequence < b->sequence; });
      for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& scan = *order[i];
        if (i > 0 && order[i - 1]->sequence == scan.sequence)
          throw DataError("setting '" + s.label + "' has duplicate sequence indices");
        if (scan.role == ScanRole::reference) continue;
        if (scan.voltage < voltage_min * (1 - 1e-12) || scan.voltage > voltage_max * (1 + 1e-12))
          throw DataError("setting '" + s.label + "': scan voltage outside the declared range");
        const bool before = i > 0 && order[i - 1]->role == ScanRole::reference;
        const bool after = i + 1 < order.size() && order[i + 1]->role == ScanRole::reference;
        if (!before || !after)
          throw ProtocolError("setting '" + s.label + "': high-voltage scan " + std::to_string(scan.sequence) +
                              " is not bracketed by reference scans");
      }
    }
  }
};

}  // namespace tlstark
