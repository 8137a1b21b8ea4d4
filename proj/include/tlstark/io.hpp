#pragma once

// File formats.
//
//   scan CSV          header "position_nm,counts,dwell_s", one row per point
//   campaign manifest manifest.json next to the scan files (schema below)
//   two-column text   '#' comment lines, then "x y" pairs (visibility curves,
//                     velocity tables)
//   config, geometry  JSON, keys carry their unit as a suffix
//
// Manifest schema (format "tlstark-campaign/1"):
//   species    {name, mass_amu, alpha_ref_A3?}
//   geometry   {grating_period_m, distance_L_m, deflector_length_m}
//   field      {reference_voltage_V, grad_product_ref_V2_per_m3, homogeneity_bound}
//   voltage_range_V  [min, max]
//   visibility_file  optional two-column curve relative to the manifest
//   settings   [{label, distribution, scans: [{file, voltage_V, sequence, role}]}]
//   sweeps     optional [{label, distribution, x_fixed_nm, voltages_V, counts}]
//   truth      optional generator metadata, ignored on read
// distribution: {form: "gaussian", mean_v_m_s, rel_width} or
//               {form: "tabulated", table_file}

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tlstark/alpha_fit.hpp"
#include "tlstark/budget.hpp"
#include "tlstark/campaign.hpp"
#include "tlstark/core_model.hpp"
#include "tlstark/errors.hpp"
#include "tlstark/field_solver.hpp"
#include "tlstark/quadrature.hpp"
#include "tlstark/velocity.hpp"
#include "tlstark/visibility.hpp"

namespace tlstark::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* kManifestFormat = "tlstark-campaign/1";

/// Shortest round-trip decimal representation.
inline std::string num(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline json read_json(const fs::path& path) { return parse_json(read_text(path), path.string()); }

/// Typed member access that reports missing keys and wrong types as
/// configuration errors.
template <class T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

// -- physics blocks ---------------------------------------------------------

inline MoleculeSpecies species_from_json(const json& j) {
  MoleculeSpecies s;
  s.name = get<std::string>(j, "name");
  s.mass_amu = get<double>(j, "mass_amu");
  if (j.contains("alpha_ref_A3") && !j.at("alpha_ref_A3").is_null()) s.alpha_ref = get<double>(j, "alpha_ref_A3");
  s.validate();
  return s;
}

inline json to_json(const MoleculeSpecies& s) {
  json j{{"name", s.name}, {"mass_amu", s.mass_amu}};
  if (s.alpha_ref) j["alpha_ref_A3"] = *s.alpha_ref;
  return j;
}

inline DeflectometerGeometry geometry_from_json(const json& j) {
  DeflectometerGeometry g;
  g.grating_period = get<double>(j, "grating_period_m");
  g.distance_L = get<double>(j, "distance_L_m");
  g.deflector_length = get<double>(j, "deflector_length_m");
  g.validate();
  return g;
}

inline json to_json(const DeflectometerGeometry& g) {
  return {{"grating_period_m", g.grating_period},
          {"distance_L_m", g.distance_L},
          {"deflector_length_m", g.deflector_length}};
}

inline DeflectorField field_from_json(const json& j) {
  DeflectorField f;
  f.reference_voltage = get<double>(j, "reference_voltage_V");
  f.grad_product_ref = get<double>(j, "grad_product_ref_V2_per_m3");
  f.homogeneity_bound = get_or<double>(j, "homogeneity_bound", f.homogeneity_bound);
  f.validate();
  return f;
}

inline json to_json(const DeflectorField& f) {
  return {{"reference_voltage_V", f.reference_voltage},
          {"grad_product_ref_V2_per_m3", f.grad_product_ref},
          {"homogeneity_bound", f.homogeneity_bound}};
}

inline QuadratureOptions quadrature_from_json(const json& j, QuadratureOptions q = {}) {
  q.rel_tol = get_or<double>(j, "rel_tol", q.rel_tol);
  q.abs_tol = get_or<double>(j, "abs_tol", q.abs_tol);
  q.initial_intervals = get_or<int>(j, "initial_intervals", q.initial_intervals);
  q.max_intervals = get_or<int>(j, "max_intervals", q.max_intervals);
  q.validate();
  return q;
}

// -- two-column text --------------------------------------------------------

inline std::vector<std::vector<double>> read_table(const fs::path& path, std::size_t columns) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.size() != columns || !ls.eof())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                      " numeric columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string two_column_text(const std::string& header, std::span<const double> x, std::span<const double> y) {
  std::string out = "# " + header + "\n";
  for (std::size_t i = 0; i < x.size(); ++i) out += num(x[i]) + " " + num(y[i]) + "\n";
  return out;
}

inline VisibilityCurve read_visibility_curve(const fs::path& path) {
  std::vector<double> v, y;
  for (const auto& row : read_table(path, 2)) {
    v.push_back(row[0]);
    y.push_back(row[1]);
  }
  if (v.empty()) throw DataError(path.string() + ": empty visibility curve");
  try {
    return VisibilityCurve(std::move(v), std::move(y));
  } catch (const DomainError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_visibility_curve(const fs::path& path, const VisibilityCurve& c) {
  write_text(path, two_column_text("velocity_m_s visibility", c.grid(), c.values()));
}

inline VelocityDistribution read_velocity_table(const fs::path& path) {
  std::vector<double> v, f;
  for (const auto& row : read_table(path, 2)) {
    v.push_back(row[0]);
    f.push_back(row[1]);
  }
  try {
    return VelocityDistribution::tabulated(std::move(v), std::move(f));
  } catch (const DomainError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_velocity_table(const fs::path& path, const VelocityDistribution& d) {
  write_text(path, two_column_text("velocity_m_s density", d.table_v(), d.table_density()));
}

// -- distributions ----------------------------------------------------------

inline VelocityDistribution distribution_from_json(const json& j, const fs::path& base) {
  const auto form = get_or<std::string>(j, "form", "gaussian");
  if (form == "gaussian") {
    try {
      return VelocityDistribution::gaussian(get<double>(j, "mean_v_m_s"), get<double>(j, "rel_width"));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (form == "tabulated") return read_velocity_table(base / get<std::string>(j, "table_file"));
  throw ConfigError("unknown distribution form '" + form + "'");
}

/// Serializes a distribution; tabulated ones are written to base/table_file.
inline json distribution_to_json(const VelocityDistribution& d, const fs::path& base, const std::string& table_file) {
  if (d.form() == VelocityDistribution::Form::gaussian)
    return {{"form", "gaussian"}, {"mean_v_m_s", d.mean_v()}, {"rel_width", d.rel_width()}};
  write_velocity_table(base / table_file, d);
  return {{"form", "tabulated"}, {"table_file", table_file}};
}

// -- scans and campaigns ----------------------------------------------------

inline std::string scan_csv(const FringeScan& s) {
  std::string out = "position_nm,counts,dwell_s\n";
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    out += num(s.positions[i] * 1e9) + "," + num(s.counts[i]) + "," + num(s.dwell) + "\n";
  return out;
}

inline FringeScan read_scan_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("position_nm,counts,dwell_s", 0) != 0)
    throw DataError(path.string() + ": missing header 'position_nm,counts,dwell_s'");
  FringeScan s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double x, c, d;
    char c1, c2;
    std::istringstream ls(line);
    if (!(ls >> x >> c1 >> c >> c2 >> d) || c1 != ',' || c2 != ',')
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    s.positions.push_back(x * 1e-9);
    s.counts.push_back(c);
    s.dwell = d;
  }
  return s;
}

struct CampaignFiles {
  Campaign campaign;
  std::optional<VisibilityCurve> visibility;
  json truth;
};

inline void write_campaign(const fs::path& dir, const Campaign& c, const std::optional<VisibilityCurve>& vis,
                           const json& truth = json()) {
  fs::create_directories(dir / "scans");
  json m;
  m["format"] = kManifestFormat;
  m["species"] = to_json(c.species);
  m["geometry"] = to_json(c.geometry);
  m["field"] = to_json(c.field);
  m["voltage_range_V"] = {c.voltage_min, c.voltage_max};
  if (vis) {
    write_visibility_curve(dir / "visibility.txt", *vis);
    m["visibility_file"] = "visibility.txt";
  }
  json settings = json::array();
  for (std::size_t k = 0; k < c.settings.size(); ++k) {
    const auto& s = c.settings[k];
    json js;
    js["label"] = s.label;
    js["distribution"] = distribution_to_json(s.dist, dir, "velocity_" + std::to_string(k) + ".txt");
    json scans = json::array();
    for (const auto& scan : s.scans) {
      char name[64];
      std::snprintf(name, sizeof name, "scans/s%02zu_%05ld.csv", k, scan.sequence);
      write_text(dir / name, scan_csv(scan));
      scans.push_back({{"file", name}, {"voltage_V", scan.voltage}, {"sequence", scan.sequence},
                       {"role", to_string(scan.role)}});
    }
    js["scans"] = scans;
    settings.push_back(js);
  }
  m["settings"] = settings;
  if (!c.sweeps.empty()) {
    json sweeps = json::array();
    for (std::size_t k = 0; k < c.sweeps.size(); ++k) {
      const auto& r = c.sweeps[k];
      sweeps.push_back({{"label", r.label},
                        {"distribution", distribution_to_json(r.dist, dir, "sweep_velocity_" + std::to_string(k) + ".txt")},
                        {"x_fixed_nm", r.x_fixed * 1e9},
                        {"voltages_V", r.voltages},
                        {"counts", r.counts}});
    }
    m["sweeps"] = sweeps;
  }
  if (!truth.is_null()) m["truth"] = truth;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

inline CampaignFiles read_campaign(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  if (get_or<std::string>(m, "format", "") != kManifestFormat)
    throw ConfigError("manifest format must be '" + std::string(kManifestFormat) + "'");
  CampaignFiles out;
  auto& c = out.campaign;
  try {
    c.species = species_from_json(get<json>(m, "species"));
    c.geometry = geometry_from_json(get<json>(m, "geometry"));
    c.field = field_from_json(get<json>(m, "field"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  const auto range = get<std::vector<double>>(m, "voltage_range_V");
  if (range.size() != 2) throw ConfigError("voltage_range_V must hold two values");
  c.voltage_min = range[0];
  c.voltage_max = range[1];
  for (const auto& js : get<json>(m, "settings")) {
    VelocitySetting s{get<std::string>(js, "label"), distribution_from_json(get<json>(js, "distribution"), dir), {}};
    for (const auto& entry : get<json>(js, "scans")) {
      FringeScan scan = read_scan_csv(dir / get<std::string>(entry, "file"));
      scan.voltage = get<double>(entry, "voltage_V");
      scan.sequence = get<long>(entry, "sequence");
      scan.role = scan_role_from_string(get<std::string>(entry, "role"));
      s.scans.push_back(std::move(scan));
    }
    c.settings.push_back(std::move(s));
  }
  if (m.contains("sweeps"))
    for (const auto& js : m.at("sweeps")) {
      SweepRecord r{get<std::string>(js, "label"), distribution_from_json(get<json>(js, "distribution"), dir),
                    get<double>(js, "x_fixed_nm") * 1e-9, get<std::vector<double>>(js, "voltages_V"),
                    get<std::vector<double>>(js, "counts")};
      c.sweeps.push_back(std::move(r));
    }
  if (m.contains("visibility_file")) out.visibility = read_visibility_curve(dir / get<std::string>(m, "visibility_file"));
  if (m.contains("truth")) out.truth = m.at("truth");
  return out;
}

// -- reports ----------------------------------------------------------------

inline json to_json(const BudgetTable& t) {
  json terms = json::array();
  for (const auto& term : t.terms)
    terms.push_back({{"name", term.name},
                     {"relative_input", term.relative_input},
                     {"exponent", term.exponent},
                     {"contribution", term.contribution}});
  return {{"terms", terms}, {"total", t.total}};
}

inline json to_json(const AlphaEstimate& e) {
  json per = json::array();
  for (const auto& f : e.per_velocity) {
    json shifts = json::array();
    for (std::size_t j = 0; j < f.series.voltages.size(); ++j) {
      const double s = f.series.shifts[j];
      shifts.push_back({{"voltage_V", f.series.voltages[j]},
                        {"shift_nm", std::isfinite(s) ? json(s * 1e9) : json(nullptr)},
                        {"error_nm", f.series.errors[j] * 1e9}});
    }
    per.push_back({{"label", f.label},
                   {"mean_v_m_s", f.mean_v},
                   {"alpha_A3", f.alpha},
                   {"alpha_err_A3", f.alpha_err},
                   {"chi2", f.chi2},
                   {"dof", f.dof},
                   {"bracketed", f.bracketed},
                   {"flagged_points", f.series.flagged.size()},
                   {"shifts", shifts}});
  }
  json j{{"alpha_A3", e.alpha},
         {"stat_err_A3", e.stat_err},
         {"pooled_err_A3", e.pooled_err},
         {"sys_err_A3", e.sys_err},
         {"stat_err_from_covariance", e.stat_err_from_covariance},
         {"max_shift_nm", e.max_shift * 1e9},
         {"per_velocity", per}};
  if (!e.budget.terms.empty()) j["budget"] = to_json(e.budget);
  return j;
}

// -- budget inputs ----------------------------------------------------------

enum class ResolutionMode {
  relative,  ///< divide by max_shift_nm, which is then required
  absolute,  ///< keep the shift floor in m, scaled later by the measured shift
};

/// Each term is {"relative": r} or {"value": v, "uncertainty": u} (r = u/v).
/// The resolution term is {"uncertainty_nm": s, "max_shift_nm": m}.
inline std::vector<std::pair<std::string, double>> budget_inputs_from_json(const json& terms, ResolutionMode mode) {
  std::vector<std::pair<std::string, double>> out;
  if (!terms.is_object()) throw ConfigError("budget terms must be an object");
  for (const auto& [name, t] : terms.items()) {
    double rel;
    if (name == "resolution") {
      const double shift_floor = get<double>(t, "uncertainty_nm");
      if (mode == ResolutionMode::absolute) rel = shift_floor * 1e-9;
      else rel = shift_floor / get<double>(t, "max_shift_nm");
    } else if (t.contains("relative")) {
      rel = get<double>(t, "relative");
    } else {
      rel = get<double>(t, "uncertainty") / get<double>(t, "value");
    }
    out.emplace_back(name, rel);
  }
  return out;
}

// -- electrode geometry -----------------------------------------------------

inline field::Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("points are [x, y] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline field::ElectrodeGeometry2D electrodes_from_json(const json& j) {
  field::ElectrodeGeometry2D g;
  const auto plane = get_or<std::string>(j, "plane", "xy");
  if (plane == "xy") g.plane = field::Plane::transverse_xy;
  else if (plane == "xz") g.plane = field::Plane::longitudinal_xz;
  else throw ConfigError("plane must be 'xy' or 'xz'");
  const auto d = get<std::vector<double>>(j, "domain_m");
  if (d.size() != 4) throw ConfigError("domain_m is [xmin, xmax, ymin, ymax]");
  g.domain = {d[0], d[1], d[2], d[3]};
  g.grounded_boundary = get_or<bool>(j, "grounded_boundary", true);
  for (const auto& e : get<json>(j, "electrodes")) {
    field::Electrode el;
    el.name = get_or<std::string>(e, "name", "electrode");
    el.potential = get<double>(e, "potential_V");
    el.exterior = get_or<bool>(e, "exterior", false);
    if (e.contains("circle")) {
      const auto& c = e.at("circle");
      el.shape = field::Circle{point_from_json(get<json>(c, "center_m")), get<double>(c, "radius_m")};
    } else {
      field::Polygon p;
      for (const auto& v : get<json>(e, "polygon_m")) p.vertices.push_back(point_from_json(v));
      el.shape = std::move(p);
    }
    g.electrodes.push_back(std::move(el));
  }
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return g;
}

inline std::string field_map_text(const field::PotentialGrid& g) {
  std::string out = "# x_m y_m potential_V fixed\n";
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      out += num(g.x(i)) + " " + num(g.y(j)) + " " + num(g(i, j)) + " " + (g.fixed(i, j) ? "1" : "0") + "\n";
  return out;
}

}  // namespace tlstark::io
