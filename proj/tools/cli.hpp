#pragma once

// tlstark command-line workflows.
//
// Exit status: 0 success, 64 usage, 65 data (unreadable or unusable data,
// protocol violations, out-of-domain arguments), 70 numeric failure,
// 78 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tlstark/tlstark.hpp"

#ifndef TLSTARK_DEFAULT_CONFIG
#define TLSTARK_DEFAULT_CONFIG "configs/default.json"
#endif

namespace tlstark::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 64,
  kData = 65,
  kNumeric = 70,
  kConfig = 78,
};

using io::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;
  std::string config_path = TLSTARK_DEFAULT_CONFIG;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> voltages_kv;
  std::optional<std::string> velocities;
  std::optional<double> lambda;
  std::optional<double> tol;
  std::optional<std::string> species;
  std::optional<double> alpha;
  bool no_drift_correction = false;
};

/// "3,4,5" or "from:to:step" (inclusive).
inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  auto bad = [&] { return ConfigError("cannot parse number list '" + text + "'"); };
  if (text.find(':') != std::string::npos) {
    double from, to, step;
    char c1, c2;
    std::istringstream in(text);
    if (!(in >> from >> c1 >> to >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || to < from) throw bad();
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(from + step * static_cast<double>(i));
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" ", used) != std::string::npos) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  if (out.empty()) throw bad();
  return out;
}

class Session {
 public:
  Session(RunConfig rc, std::ostream& out) : rc_(std::move(rc)), out_(out) {
    try {
      root_ = io::read_json(rc_.config_path);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    config_dir_ = fs::path(rc_.config_path).parent_path();
  }

  int dispatch() {
    const auto& s = rc_.subcommand;
    if (s == "shift") return shift();
    if (s == "sweep") return sweep();
    if (s == "synth") return synth();
    if (s == "fit") return fit();
    if (s == "deconv") return deconv();
    if (s == "field") return field();
    if (s == "budget") return budget();
    throw ConfigError("unknown subcommand '" + s + "'");
  }

 private:
  const json& section(const char* key) const { return member(root_, key); }

  static const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_object())
      throw ConfigError(std::string("missing section '") + key + "'");
    return j.at(key);
  }

  MoleculeSpecies species(const std::optional<std::string>& preferred) const {
    const std::string name =
        rc_.species.value_or(preferred.value_or(io::get_or<std::string>(root_, "default_species", "C60")));
    const json& table = section("species");
    if (!table.contains(name)) throw ConfigError("species '" + name + "' not in config");
    return io::species_from_json(table.at(name));
  }

  ModelContext context(const MoleculeSpecies& sp) const {
    ModelContext ctx;
    ctx.species = sp;
    ctx.geometry = io::geometry_from_json(section("geometry"));
    ctx.field = io::field_from_json(section("field"));
    ctx.quadrature = root_.contains("quadrature") ? io::quadrature_from_json(root_.at("quadrature")) : QuadratureOptions{};
    if (rc_.tol) {
      ctx.quadrature.rel_tol = *rc_.tol;
      ctx.quadrature.validate();
    }
    return ctx;
  }

  double alpha_for(const MoleculeSpecies& sp, const json& block) const {
    if (rc_.alpha) return *rc_.alpha;
    if (block.contains("alpha_A3") && !block.at("alpha_A3").is_null()) return io::get<double>(block, "alpha_A3");
    if (sp.alpha_ref) return *sp.alpha_ref;
    throw ConfigError("no polarizability given for species '" + sp.name + "'");
  }

  VisibilityCurve visibility() const {
    const json& v = section("visibility");
    if (v.contains("file")) return io::read_visibility_curve(config_dir_ / io::get<std::string>(v, "file"));
    try {
      return VisibilityCurve(io::get<std::vector<double>>(v, "velocities_m_s"), io::get<std::vector<double>>(v, "values"));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("visibility: ") + e.what());
    }
  }

  std::vector<double> list_or(const std::optional<std::string>& flag, const json& block, const char* key) const {
    if (flag) return parse_list(*flag);
    return io::get<std::vector<double>>(block, key);
  }

  void emit(const std::string& text) {
    if (rc_.out.empty()) out_ << text;
    else io::write_text(rc_.out, text);
  }

  int shift() {
    const json& block = root_.contains("shift") ? root_.at("shift") : json::object();
    const auto sp = species(std::nullopt);
    const auto ctx = context(sp);
    const double alpha = alpha_for(sp, block);
    const auto voltages = list_or(rc_.voltages_kv, block, "voltages_kV");
    const auto velocities = list_or(rc_.velocities, block, "velocities_m_s");
    std::string text = "# species " + sp.name + ", alpha " + io::num(alpha) +
                       " A^3\n# voltage_kV velocity_m_s shift_nm phase_rad phase_over_pi\n";
    char line[160];
    for (double v : velocities)
      for (double kv : voltages) {
        const auto s = fringe_shift(sp, alpha, ctx.field, ctx.geometry, kv * 1e3, v);
        std::snprintf(line, sizeof line, "%g %g %.6f %.9f %.9f\n", kv, v, s.shift * 1e9, s.phase,
                      s.phase / constants::pi);
        text += line;
      }
    emit(text);
    return kOk;
  }

  int sweep() {
    const json& block = section("sweep");
    const auto sp = species(io::get_or<std::string>(block, "species", "C70"));
    const auto ctx = context(sp);
    const double alpha = alpha_for(sp, block);
    const double mean_v = rc_.velocities ? parse_list(*rc_.velocities).front() : io::get<double>(block, "mean_v_m_s");
    const auto dist = VelocityDistribution::gaussian(mean_v, io::get<double>(block, "rel_width"));
    std::vector<double> kv;
    if (rc_.voltages_kv) kv = parse_list(*rc_.voltages_kv);
    else {
      const double from = io::get<double>(block, "voltage_kV_from"), to = io::get<double>(block, "voltage_kV_to"),
                   step = io::get<double>(block, "voltage_kV_step");
      kv = parse_list(io::num(from) + ":" + io::num(to) + ":" + io::num(step));
    }
    std::vector<double> volts;
    for (double k : kv) volts.push_back(k * 1e3);
    const auto points = voltage_sweep(ctx, alpha, dist, visibility(), io::get<double>(block, "x_fixed_nm") * 1e-9, volts);
    std::string text = "# species " + sp.name + ", alpha " + io::num(alpha) + " A^3, mean_v " + io::num(mean_v) +
                       " m/s, rel_width " + io::num(dist.rel_width()) +
                       "\n# voltage_kV signal envelope_low envelope_high visibility shift_nm\n";
    char line[200];
    for (const auto& p : points) {
      std::snprintf(line, sizeof line, "%g %.9f %.9f %.9f %.9f %.6f\n", p.voltage / 1e3, p.signal, p.envelope_low,
                    p.envelope_high, p.moments.mean_visibility, p.moments.mean_shift * 1e9);
      text += line;
    }
    emit(text);
    return kOk;
  }

  int synth() {
    if (rc_.out.empty()) throw ConfigError("synth needs --out DIR");
    const json& block = section("synth");
    const auto sp = species(io::get_or<std::string>(block, "species", "C60"));
    const auto ctx = context(sp);
    const double alpha = alpha_for(sp, block);
    const auto vis = visibility();

    auto velocities = list_or(rc_.velocities, block, "velocities_m_s");
    auto widths = io::get<std::vector<double>>(block, "rel_widths");
    if (widths.size() == 1) widths.assign(velocities.size(), widths.front());
    if (widths.size() != velocities.size()) throw ConfigError("synth: rel_widths must match the velocity list");
    std::vector<std::pair<std::string, VelocityDistribution>> settings;
    for (std::size_t i = 0; i < velocities.size(); ++i)
      settings.emplace_back("v" + io::num(velocities[i]), VelocityDistribution::gaussian(velocities[i], widths[i]));

    Protocol protocol;
    for (double k : list_or(rc_.voltages_kv, block, "voltages_kV")) protocol.voltages.push_back(k * 1e3);
    protocol.start = io::get_or<double>(block, "start_nm", 0.0) * 1e-9;
    protocol.step = io::get<double>(block, "step_nm") * 1e-9;
    protocol.points = io::get<int>(block, "points");
    protocol.dwell = io::get_or<double>(block, "dwell_s", 1.0);

    NoiseModel noise;
    noise.counts_scale = io::get<double>(block, "counts_per_point");
    noise.drift_rate = io::get_or<double>(block, "drift_rad_per_scan", 0.0);
    noise.shot_noise = io::get_or<bool>(block, "shot_noise", true);
    noise.seed = rc_.seed.value_or(io::get<std::uint64_t>(block, "seed"));

    const auto campaign = synthesize_campaign(ctx, alpha, vis, settings, protocol, noise);
    const json truth{{"alpha_A3", alpha},
                     {"counts_per_point", noise.counts_scale},
                     {"drift_rad_per_scan", noise.drift_rate},
                     {"shot_noise", noise.shot_noise},
                     {"seed", noise.seed}};
    io::write_campaign(rc_.out, campaign, vis, truth);
    std::size_t scans = 0;
    for (const auto& s : campaign.settings) scans += s.scans.size();
    out_ << "wrote " << scans << " scans in " << campaign.settings.size() << " velocity settings to " << rc_.out
         << "\n";
    return kOk;
  }

  int fit() {
    if (rc_.input.empty()) throw ConfigError("fit needs a campaign directory");
    auto files = io::read_campaign(rc_.input);
    const auto vis = files.visibility ? *files.visibility : visibility();
    AlphaFitOptions opts;
    if (root_.contains("quadrature")) opts.quadrature = io::quadrature_from_json(root_.at("quadrature"), opts.quadrature);
    if (rc_.tol) opts.quadrature.rel_tol = *rc_.tol;
    opts.drift = rc_.no_drift_correction ? DriftMode::constant : DriftMode::interpolate;
    if (root_.contains("budget"))
      opts.budget_inputs = io::budget_inputs_from_json(io::get<json>(root_.at("budget"), "terms"),
                                                       io::ResolutionMode::absolute);
    const auto est = fit_alpha(files.campaign, vis, opts);

    std::ostringstream text;
    char line[200];
    std::snprintf(line, sizeof line, "species %s\nalpha = %.4f +- %.4f (stat) +- %.4f (sys) A^3\n",
                  files.campaign.species.name.c_str(), est.alpha, est.stat_err, est.sys_err);
    text << line;
    std::snprintf(line, sizeof line, "pooled shot-noise error %.4f A^3 (%.3f%%)%s\n", est.pooled_err,
                  100 * est.pooled_err / est.alpha,
                  est.stat_err_from_covariance ? "; stat error from covariance only" : "");
    text << line;
    for (const auto& f : est.per_velocity) {
      std::snprintf(line, sizeof line, "  %-10s v=%7.2f m/s  alpha=%9.4f +- %.4f  chi2=%.2f/%d%s\n", f.label.c_str(),
                    f.mean_v, f.alpha, f.alpha_err, f.chi2, f.dof, f.bracketed ? "" : "  [not bracketed]");
      text << line;
    }
    if (!est.budget.terms.empty()) text << est.budget.format();
    out_ << text.str();
    if (!rc_.out.empty()) {
      json report = io::to_json(est);
      report["species"] = files.campaign.species.name;
      io::write_text(rc_.out, report.dump(2) + "\n");
    }
    return kOk;
  }

  int deconv() {
    if (rc_.input.empty()) throw ConfigError("deconv needs a measurement file");
    const json& block = section("deconvolution");
    std::vector<VisibilityMeasurement> data;
    for (const auto& row : io::read_table(rc_.input, 4)) {
      try {
        data.push_back({VelocityDistribution::gaussian(row[0], row[1]), row[2], row[3]});
      } catch (const DomainError& e) {
        throw DataError(rc_.input + ": " + e.what());
      }
    }
    const auto grid = parse_list(io::num(io::get<double>(block, "grid_from_m_s")) + ":" +
                                 io::num(io::get<double>(block, "grid_to_m_s")) + ":" +
                                 io::num(io::get<double>(block, "grid_step_m_s")));
    DeconvolutionOptions opts;
    opts.coverage_sigmas = io::get_or<double>(block, "coverage_sigmas", opts.coverage_sigmas);
    if (rc_.lambda) opts.lambda = *rc_.lambda;
    else if (block.contains("lambda") && !block.at("lambda").is_null()) opts.lambda = io::get<double>(block, "lambda");
    const auto result = deconvolve_visibility(data, grid, opts);
    std::string header = "velocity_m_s visibility (lambda " + io::num(result.lambda) + ", chi2 " +
                         io::num(result.chi2) + ")";
    emit(io::two_column_text(header, result.curve.grid(), result.curve.values()));
    if (!rc_.out.empty())
      out_ << "lambda " << io::num(result.lambda) << ", chi2 " << io::num(result.chi2) << " over " << data.size()
           << " measurements; curve written to " << rc_.out << "\n";
    return kOk;
  }

  int field() {
    if (rc_.input.empty()) throw ConfigError("field needs a geometry file");
    const json geo = io::read_json(rc_.input);
    const json& fsb = root_.contains("field_solver") ? root_.at("field_solver") : json::object();
    field::SolverOptions so;
    so.tol = rc_.tol.value_or(io::get_or<double>(fsb, "tol", so.tol));
    so.max_iterations = io::get_or<int>(fsb, "max_iterations", so.max_iterations);
    so.min_gap_cells = io::get_or<int>(fsb, "min_gap_cells", so.min_gap_cells);
    const double ref_voltage = io::get<double>(geo, "reference_voltage_V");
    const double h = io::get<double>(geo, "spacing_m");

    std::ostringstream text;
    char line[200];
    const json& tr = member(geo, "transverse");
    const auto tgeom = io::electrodes_from_json(tr);
    const auto grid = field::solve_potential(tgeom, io::get_or<double>(tr, "spacing_m", h), so);
    std::snprintf(line, sizeof line, "transverse solve: %dx%d nodes, %d iterations, residual %.3g V\n", grid.nx(),
                  grid.ny(), grid.iterations(), grid.residual());
    text << line;
    const auto probe = io::point_from_json(io::get<json>(tr, "probe_m"));
    const double k_ref = field::gradient_product(grid, probe);
    std::vector<double> kv = rc_.voltages_kv ? parse_list(*rc_.voltages_kv) : std::vector<double>{ref_voltage / 1e3};
    for (double k : kv) {
      const double r = k * 1e3 / ref_voltage;
      std::snprintf(line, sizeof line, "(E.grad)E_x at (%g, %g) m, U = %g kV: %.6e V^2/m^3\n", probe.x, probe.y, k,
                    k_ref * r * r);
      text << line;
    }
    if (tr.contains("segment_m")) {
      const auto& seg = tr.at("segment_m");
      const auto hom = field::homogeneity(grid, io::point_from_json(seg.at(0)), io::point_from_json(seg.at(1)));
      if (hom.max_rel_deviation) std::snprintf(line, sizeof line, "homogeneity over segment: %.4f%%\n", 100 * *hom.max_rel_deviation);
      else std::snprintf(line, sizeof line, "homogeneity over segment: %.3e V^2/m^3 absolute (reference at floor)\n",
                         hom.max_abs_deviation);
      text << line;
    }
    if (geo.contains("longitudinal")) {
      const json& lo = geo.at("longitudinal");
      const auto lgeom = io::electrodes_from_json(lo);
      const auto lgrid = field::solve_potential(lgeom, io::get_or<double>(lo, "spacing_m", h), so);
      const auto [z, k] = field::axial_field_squared(lgrid, io::get<double>(lo, "axis_x_m"), io::get<double>(lo, "z_from_m"),
                                                     io::get<double>(lo, "z_to_m"), io::get<int>(lo, "samples"));
      std::snprintf(line, sizeof line, "effective length: %.5f m (%d iterations)\n", field::effective_length(z, k),
                    lgrid.iterations());
      text << line;
    }
    out_ << text.str();
    if (!rc_.out.empty()) {
      fs::create_directories(rc_.out);
      io::write_text(fs::path(rc_.out) / "field_map.txt", io::field_map_text(grid));
      io::write_text(fs::path(rc_.out) / "summary.txt", text.str());
    }
    return kOk;
  }

  int budget() {
    const auto geom = io::geometry_from_json(section("geometry"));
    const auto inputs =
        io::budget_inputs_from_json(io::get<json>(section("budget"), "terms"), io::ResolutionMode::relative);
    const auto table = systematic_budget(inputs, geom);
    out_ << table.format();
    if (!rc_.out.empty()) io::write_text(rc_.out, io::to_json(table).dump(2) + "\n");
    return kOk;
  }

  RunConfig rc_;
  std::ostream& out_;
  json root_;
  fs::path config_dir_;
};

/// Parses argv-style arguments (without the program name) and runs the
/// selected workflow.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Talbot-Lau Stark deflectometry toolkit", "tlstark"};
  app.require_subcommand(1);
  RunConfig rc;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config_path, "JSON configuration file");
    sub->add_option("--out", rc.out, "output file or directory");
    sub->add_option("--seed", rc.seed, "random seed");
    sub->add_option("--voltage-kv", rc.voltages_kv, "voltages in kV: a,b,c or from:to:step");
    sub->add_option("--velocity", rc.velocities, "velocities in m/s: a,b,c or from:to:step");
    sub->add_option("--lambda", rc.lambda, "regularization strength")->check(CLI::PositiveNumber);
    sub->add_option("--tol", rc.tol, "numerical tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--species", rc.species, "species key in the config");
    sub->add_option("--alpha", rc.alpha, "polarizability volume, A^3")->check(CLI::NonNegativeNumber);
  };
  struct Sub {
    const char* name;
    const char* help;
    const char* input;
  };
  for (const Sub& s : {Sub{"shift", "fringe shift table over voltages and velocities", nullptr},
                       Sub{"sweep", "signal at a fixed mask position versus voltage", nullptr},
                       Sub{"synth", "generate a synthetic measurement campaign", nullptr},
                       Sub{"fit", "fit the polarizability of a campaign", "campaign directory"},
                       Sub{"deconv", "recover V(v) from distribution-averaged visibilities", "measurement table"},
                       Sub{"field", "solve the deflector field", "geometry JSON"},
                       Sub{"budget", "systematic uncertainty budget", nullptr}}) {
    auto* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    if (s.input) sub->add_option("input", rc.input, s.input)->required();
    if (std::string(s.name) == "fit")
      sub->add_flag("--no-drift-correction", rc.no_drift_correction, "subtract the mean reference phase only");
    sub->callback([&rc, name = std::string(s.name)] { rc.subcommand = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  if (const auto subs = app.get_subcommands(); !subs.empty() && subs.front()->count("--help")) return kOk;

  try {
    return Session(rc, out).dispatch();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace tlstark::cli
