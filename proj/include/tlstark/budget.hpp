#pragma once

// Systematic uncertainty budget of the polarizability.
//
// alpha = shift m v^2 / ((E.grad)E_x(U) d (d/2 + L)), so a relative error in
// each input maps to alpha through the logarithmic sensitivity (exponent) of
// that input. Independent terms add in quadrature.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tlstark/core_model.hpp"
#include "tlstark/errors.hpp"

namespace tlstark {

struct BudgetTerm {
  std::string name;
  double relative_input = 0.0;  ///< relative uncertainty of the input
  double exponent = 0.0;        ///< d ln alpha / d ln input
  double contribution = 0.0;    ///< |exponent| * relative_input
};

struct BudgetTable {
  std::vector<BudgetTerm> terms;
  double total = 0.0;  ///< relative, quadrature sum

  std::string format() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-20s %12s %10s %14s\n", "term", "rel. input", "exponent", "contribution");
    out << line;
    for (const auto& t : terms) {
      std::snprintf(line, sizeof line, "%-20s %11.3f%% %10.4f %13.3f%%\n", t.name.c_str(), 100 * t.relative_input,
                    t.exponent, 100 * t.contribution);
      out << line;
    }
    std::snprintf(line, sizeof line, "%-20s %12s %10s %13.3f%%\n", "total", "", "", 100 * total);
    out << line;
    return out.str();
  }
};

/// Sensitivity exponent of a named budget term for the given geometry.
///
///   field_gradient, field_homogeneity  -1
///   effective_length                   -(1 + (d/2) / (d/2 + L))
///   distance_L                         -L / (d/2 + L)
///   velocity                           +2
///   voltage                            -2
///   resolution                         +1  (shift floor over max shift)
inline double budget_exponent(const std::string& name, const DeflectometerGeometry& geom) {
  const double half_d = 0.5 * geom.deflector_length;
  const double arm = half_d + geom.distance_L;
  if (name == "field_gradient" || name == "field_homogeneity") return -1.0;
  if (name == "effective_length") return -(1.0 + half_d / arm);
  if (name == "distance_L") return -geom.distance_L / arm;
  if (name == "velocity") return 2.0;
  if (name == "voltage") return -2.0;
  if (name == "resolution") return 1.0;
  throw ConfigError("unknown systematic budget term '" + name + "'");
}

inline BudgetTable systematic_budget(const std::vector<std::pair<std::string, double>>& inputs,
                                     const DeflectometerGeometry& geom) {
  BudgetTable table;
  double sum2 = 0.0;
  for (const auto& [name, rel] : inputs) {
    if (!(rel >= 0.0)) throw ConfigError("budget term '" + name + "' has a negative uncertainty");
    BudgetTerm t{name, rel, budget_exponent(name, geom), 0.0};
    t.contribution = std::abs(t.exponent) * rel;
    sum2 += t.contribution * t.contribution;
    table.terms.push_back(t);
  }
  table.total = std::sqrt(sum2);
  return table;
}

}  // namespace tlstark
