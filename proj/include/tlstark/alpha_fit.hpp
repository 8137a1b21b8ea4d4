#pragma once

// Polarizability from a deflection campaign.
//
// Each scan is fitted for its fringe phase, high-voltage phases are
// referenced to the bracketing zero-voltage scans, the voltage series is
// unwrapped into shifts, and alpha is found per velocity setting by a
// bracketed one-dimensional minimization of the weighted misfit between
// measured and velocity-averaged model shifts.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlstark/budget.hpp"
#include "tlstark/campaign.hpp"
#include "tlstark/constants.hpp"
#include "tlstark/phase_tracking.hpp"
#include "tlstark/scan_fit.hpp"
#include "tlstark/signal_model.hpp"

namespace tlstark {

enum class DriftMode {
  interpolate,  ///< subtract the reference phase interpolated in time
  constant,     ///< subtract the mean of all reference phases (no drift tracking)
};

struct ShiftSeries {
  std::vector<double> voltages;  ///< V, ascending
  std::vector<double> shifts;    ///< m, NaN where the unwrap was ambiguous
  std::vector<double> errors;    ///< m, one standard deviation
  std::vector<std::size_t> flagged;
};

inline ShiftSeries extract_shift_series(const VelocitySetting& setting, double grating_period,
                                        DriftMode mode = DriftMode::interpolate) {
  struct Fitted {
    const FringeScan* scan;
    PhaseSample phase;
  };
  std::vector<Fitted> all;
  for (const auto& scan : setting.scans) {
    const auto fit = fit_sinusoid(scan, grating_period);
    all.push_back({&scan, {fit.phase, fit.phase_variance(), static_cast<double>(scan.sequence)}});
  }
  std::sort(all.begin(), all.end(), [](const Fitted& a, const Fitted& b) { return a.scan->sequence < b.scan->sequence; });

  std::optional<PhaseSample> mean_ref;
  if (mode == DriftMode::constant) {
    double s = 0.0, c = 0.0, var = 0.0;
    int n = 0;
    for (const auto& f : all)
      if (f.scan->role == ScanRole::reference) {
        s += std::sin(f.phase.phase);
        c += std::cos(f.phase.phase);
        var += f.phase.variance;
        ++n;
      }
    if (n == 0) throw ProtocolError("setting '" + setting.label + "' has no reference scans");
    mean_ref = PhaseSample{std::atan2(s, c), var / (n * n), 0.0};
  }

  std::vector<std::pair<double, PhaseSample>> corrected;  // (voltage, phase)
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].scan->role == ScanRole::reference) continue;
    if (mode == DriftMode::constant) {
      PhaseSample p = all[i].phase;
      p.phase = wrap_phase(p.phase - mean_ref->phase);
      p.variance += mean_ref->variance;
      corrected.emplace_back(all[i].scan->voltage, p);
      continue;
    }
    std::optional<PhaseSample> before, after;
    for (std::size_t k = i; k-- > 0;)
      if (all[k].scan->role == ScanRole::reference) {
        before = all[k].phase;
        break;
      }
    for (std::size_t k = i + 1; k < all.size(); ++k)
      if (all[k].scan->role == ScanRole::reference) {
        after = all[k].phase;
        break;
      }
    corrected.emplace_back(all[i].scan->voltage, drift_correct(all[i].phase, before, after));
  }
  std::stable_sort(corrected.begin(), corrected.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  ShiftSeries out;
  std::vector<double> phases;
  for (const auto& [u, p] : corrected) {
    out.voltages.push_back(u);
    phases.push_back(p.phase);
    out.errors.push_back(std::sqrt(p.variance) * grating_period / constants::two_pi);
  }
  auto unwrapped = unwrap_shift_series(phases, out.voltages, grating_period);
  out.shifts = std::move(unwrapped.shifts);
  out.flagged = std::move(unwrapped.flagged);
  return out;
}

struct VelocityFit {
  std::string label;
  double mean_v = 0.0;
  double alpha = 0.0;      ///< A^3
  double alpha_err = 0.0;  ///< A^3, from the misfit curvature
  double chi2 = 0.0;
  int dof = 0;
  bool bracketed = true;
  ShiftSeries series;
};

struct AlphaEstimate {
  double alpha = 0.0;       ///< inverse-variance weighted mean, A^3
  double stat_err = 0.0;    ///< standard deviation across velocity settings, A^3
  double pooled_err = 0.0;  ///< inverse-variance pooled error, A^3
  double sys_err = 0.0;     ///< alpha times the budget total, A^3
  std::vector<VelocityFit> per_velocity;
  BudgetTable budget;
  /// stat_err fell back to the pooled error (single setting or unbracketed fit).
  bool stat_err_from_covariance = false;
  double max_shift = 0.0;   ///< largest measured shift, m
};

struct AlphaFitOptions {
  double alpha_rel_tol = 1e-4;
  DriftMode drift = DriftMode::interpolate;
  QuadratureOptions quadrature{1e-10, 1e-14, 4, 4000};
  /// Relative systematic inputs; the resolution term, if present, is taken
  /// as an absolute shift (m) and divided by the largest measured shift.
  std::vector<std::pair<std::string, double>> budget_inputs;
};

namespace detail {

struct ShiftModel {
  const ModelContext& ctx;
  const VelocityDistribution& dist;
  const VisibilityCurve& vis;
  double operator()(double alpha, double voltage) const {
    return phasor_moments(ctx, alpha, voltage, dist, vis).mean_shift;
  }
};

}  // namespace detail

inline VelocityFit fit_velocity_setting(const ModelContext& ctx, const VelocitySetting& setting,
                                        const VisibilityCurve& vis, const AlphaFitOptions& opts) {
  VelocityFit out;
  out.label = setting.label;
  out.mean_v = setting.dist.mean_v();
  out.series = extract_shift_series(setting, ctx.geometry.grating_period, opts.drift);
  const auto& s = out.series;

  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < s.voltages.size(); ++j)
    if (std::isfinite(s.shifts[j]) && s.voltages[j] > 0.0 && s.errors[j] > 0.0) used.push_back(j);
  if (used.empty()) throw DataError("setting '" + setting.label + "' has no usable shifts");

  const detail::ShiftModel model{ctx, setting.dist, vis};
  auto misfit = [&](double alpha) {
    double sum = 0.0;
    for (std::size_t j : used) {
      const double r = (s.shifts[j] - model(alpha, s.voltages[j])) / s.errors[j];
      sum += r * r;
    }
    return sum;
  };

  // Linearized starting point from the model at a probe polarizability.
  const double probe = ctx.species.alpha_ref.value_or(100.0);
  double num = 0.0, den = 0.0;
  for (std::size_t j : used) {
    const double w = 1.0 / (s.errors[j] * s.errors[j]);
    const double m = model(probe, s.voltages[j]);
    num += w * s.shifts[j] * m;
    den += w * m * m;
  }
  double guess = den > 0.0 ? probe * num / den : probe;
  if (!(guess > 0.0)) guess = probe;

  const int bits = static_cast<int>(std::ceil(1.0 - std::log2(opts.alpha_rel_tol)));
  double lo = 0.5 * guess, hi = 2.0 * guess;
  std::pair<double, double> best{guess, misfit(guess)};
  out.bracketed = false;
  for (int attempt = 0; attempt < 6; ++attempt) {
    best = boost::math::tools::brent_find_minima(misfit, lo, hi, bits);
    const double edge = 1e-3 * (hi - lo);
    if (best.first - lo > edge && hi - best.first > edge) {
      out.bracketed = true;
      break;
    }
    if (best.first - lo <= edge) lo *= 0.25;
    else hi *= 4.0;
  }
  out.alpha = best.first;
  out.chi2 = best.second;
  out.dof = static_cast<int>(used.size()) - 1;

  const double h = 1e-3 * out.alpha;
  double info = 0.0;
  for (std::size_t j : used) {
    const double jac = (model(out.alpha + h, s.voltages[j]) - model(out.alpha - h, s.voltages[j])) / (2 * h);
    info += jac * jac / (s.errors[j] * s.errors[j]);
  }
  out.alpha_err = info > 0.0 ? 1.0 / std::sqrt(info) : std::numeric_limits<double>::infinity();
  return out;
}

inline AlphaEstimate fit_alpha(const Campaign& campaign, const VisibilityCurve& vis,
                               const AlphaFitOptions& opts = {}) {
  campaign.validate();
  ModelContext ctx{campaign.species, campaign.geometry, campaign.field, opts.quadrature};

  AlphaEstimate est;
  for (const auto& setting : campaign.settings)
    est.per_velocity.push_back(fit_velocity_setting(ctx, setting, vis, opts));

  double wsum = 0.0, wa = 0.0;
  bool all_bracketed = true;
  for (const auto& f : est.per_velocity) {
    const double w = 1.0 / (f.alpha_err * f.alpha_err);
    wsum += w;
    wa += w * f.alpha;
    all_bracketed = all_bracketed && f.bracketed;
    for (double sh : f.series.shifts)
      if (std::isfinite(sh)) est.max_shift = std::max(est.max_shift, std::abs(sh));
  }
  est.alpha = wa / wsum;
  est.pooled_err = 1.0 / std::sqrt(wsum);

  const std::size_t n = est.per_velocity.size();
  if (n >= 2 && all_bracketed) {
    double mean = 0.0;
    for (const auto& f : est.per_velocity) mean += f.alpha;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& f : est.per_velocity) ss += (f.alpha - mean) * (f.alpha - mean);
    est.stat_err = std::sqrt(ss / static_cast<double>(n - 1));
  } else {
    est.stat_err = est.pooled_err;
    est.stat_err_from_covariance = true;
  }

  if (!opts.budget_inputs.empty()) {
    auto inputs = opts.budget_inputs;
    for (auto& [name, value] : inputs)
      if (name == "resolution") {
        if (!(est.max_shift > 0.0)) throw DataError("no measured shift to scale the resolution term");
        value /= est.max_shift;
      }
    est.budget = systematic_budget(inputs, campaign.geometry);
    est.sys_err = est.alpha * est.budget.total;
  }
  return est;
}

struct AlphaRatio {
  double ratio = 0.0;
  double error = 0.0;  ///< absolute, statistical errors only
};

/// numerator / denominator. Systematic errors common to both cancel, so only
/// the statistical errors enter, added in quadrature as relative errors.
inline AlphaRatio alpha_ratio(const AlphaEstimate& numerator, const AlphaEstimate& denominator) {
  if (denominator.alpha == 0.0) throw DomainError("polarizability ratio with zero denominator");
  AlphaRatio r;
  r.ratio = numerator.alpha / denominator.alpha;
  const double a = numerator.stat_err / numerator.alpha;
  const double b = denominator.stat_err / denominator.alpha;
  r.error = std::abs(r.ratio) * std::sqrt(a * a + b * b);
  return r;
}

}  // namespace tlstark
