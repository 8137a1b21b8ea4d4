#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace tlstark;
namespace tt = tlstark::testing;

namespace {

constexpr double kG = 991e-9;

FringeScan sinusoid_scan(double offset, double vis, double shift, int n = 149, double step = 20e-9) {
  FringeScan s;
  s.positions = scan_positions(0.0, step, n);
  for (double x : s.positions) s.counts.push_back(offset * (1 + vis * std::cos(2 * M_PI * (x - shift) / kG)));
  return s;
}

// -- fit_sinusoid -----------------------------------------------------------

TEST(FitSinusoid, ExactOnNoiselessData) {
  const auto f = fit_sinusoid(sinusoid_scan(100.0, 0.4, 200e-9), kG);
  EXPECT_NEAR(f.offset, 100.0, 1e-10 * 100.0);
  EXPECT_NEAR(f.visibility, 0.4, 1e-10 * 0.4);
  const double phase = 2 * M_PI * 200e-9 / kG;
  EXPECT_NEAR(f.phase, phase, 1e-10 * phase);
  EXPECT_FALSE(f.visibility_clipped);
}

TEST(FitSinusoid, PhaseConventionMatchesExpectedPattern) {
  // The fitted phase, read back as a shift, reproduces the scan through expected_pattern.
  const auto scan = sinusoid_scan(50.0, 0.3, 700e-9);
  const auto f = fit_sinusoid(scan, kG);
  const PatternMoments m{f.visibility, f.phase * kG / (2 * M_PI), 1.0};
  for (std::size_t i = 0; i < scan.positions.size(); ++i)
    EXPECT_NEAR(f.offset * expected_pattern(scan.positions[i], m, kG), scan.counts[i], 1e-9);
}

TEST(FitSinusoid, CovarianceMatchesMonteCarlo) {
  const double counts = 1e4, vis = 0.4;
  const auto clean = sinusoid_scan(counts, vis, 200e-9);
  const double truth = 2 * M_PI * 200e-9 / kG;
  double sum = 0.0, sum2 = 0.0, reported = 0.0;
  const int seeds = 500;
  for (int seed = 0; seed < seeds; ++seed) {
    RandomStream rng(1000 + seed);
    FringeScan s = clean;
    for (double& c : s.counts) c = static_cast<double>(rng.poisson(c));
    const auto f = fit_sinusoid(s, kG);
    const double d = wrap_phase(f.phase - truth);
    sum += d;
    sum2 += d * d;
    reported += std::sqrt(f.phase_variance());
  }
  const double mc = std::sqrt(sum2 / seeds - (sum / seeds) * (sum / seeds));
  reported /= seeds;
  double total = 0.0;
  for (double c : clean.counts) total += c;
  const double formula = std::sqrt(2.0 / (vis * vis * total));
  EXPECT_NEAR(reported, mc, 0.2 * mc);
  EXPECT_NEAR(formula, mc, 0.2 * mc);
  // Same statement in shift units.
  EXPECT_NEAR(kG / (2 * M_PI) * reported, kG / (2 * M_PI) * mc, 0.2 * kG / (2 * M_PI) * mc);
}

TEST(FitSinusoid, NullVisibility) {
  const auto flat = sinusoid_scan(1e4, 0.0, 0.0);
  const auto f0 = fit_sinusoid(flat, kG);
  EXPECT_NEAR(f0.visibility, 0.0, 1e-12);
  EXPECT_TRUE(std::isinf(f0.phase_variance()));

  int within = 0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    RandomStream rng(seed + 1);
    FringeScan s = flat;
    for (double& c : s.counts) c = static_cast<double>(rng.poisson(c));
    const auto f = fit_sinusoid(s, kG);
    if (f.visibility <= 2 * std::sqrt(f.covariance(1, 1))) ++within;
  }
  // Rayleigh-distributed amplitude: 86% below two sigma.
  EXPECT_GE(within, static_cast<int>(0.8 * seeds));
}

TEST(FitSinusoid, CovarianceIsSymmetricPsd) {
  RandomStream rng(4);
  FringeScan s = sinusoid_scan(1e3, 0.2, 100e-9);
  for (double& c : s.counts) c = static_cast<double>(rng.poisson(c));
  const auto f = fit_sinusoid(s, kG);
  EXPECT_NEAR((f.covariance - f.covariance.transpose()).norm(), 0.0, 1e-15 * f.covariance.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(f.covariance);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15 * f.covariance.norm());
}

TEST(FitSinusoid, ClipsVisibilityAboveOne) {
  FringeScan s;
  s.positions = scan_positions(0.0, 20e-9, 60);
  for (double x : s.positions) s.counts.push_back(std::max(0.0, 10.0 * (1 + 1.3 * std::cos(2 * M_PI * x / kG))));
  const auto f = fit_sinusoid(s, kG);
  EXPECT_EQ(f.visibility, 1.0);
  EXPECT_TRUE(f.visibility_clipped);
}

TEST(FitSinusoid, Errors) {
  EXPECT_THROW(fit_sinusoid(sinusoid_scan(100, 0.3, 0, 4, 300e-9), kG), DataError);
  EXPECT_THROW(fit_sinusoid(sinusoid_scan(100, 0.3, 0, 20, 20e-9), kG), DataError);
  // Sampling every full period sees no modulation.
  EXPECT_THROW(fit_sinusoid(sinusoid_scan(100, 0.3, 0, 6, kG), kG), DataError);
  FringeScan bad = sinusoid_scan(100, 0.3, 0);
  bad.counts[3] = -1.0;
  EXPECT_THROW(fit_sinusoid(bad, kG), DataError);
  FringeScan zero = sinusoid_scan(0.0, 0.3, 0);
  EXPECT_THROW(fit_sinusoid(zero, kG), DataError);
}

// -- drift_correct ----------------------------------------------------------

TEST(DriftCorrect, ZeroReferencesUnchanged) {
  const PhaseSample s{1.234, 0.01, 5};
  const auto r = drift_correct(s, PhaseSample{0.0, 0.0, 4}, PhaseSample{0.0, 0.0, 6});
  EXPECT_DOUBLE_EQ(r.phase, 1.234);
  EXPECT_DOUBLE_EQ(r.variance, 0.01);
}

TEST(DriftCorrect, LinearInterpolation) {
  const auto r = drift_correct({1.0, 0.0, 5}, PhaseSample{0.1, 0.0, 4}, PhaseSample{0.3, 0.0, 6});
  EXPECT_NEAR(r.phase, 0.8, 1e-15);
  const auto q = drift_correct({1.0, 0.0, 5}, PhaseSample{0.1, 0.0, 2}, PhaseSample{0.5, 0.0, 6});
  EXPECT_NEAR(q.phase, 1.0 - 0.4, 1e-15);
}

TEST(DriftCorrect, ReferenceAcrossBranchCut) {
  const auto r = drift_correct({0.0, 0.0, 1}, PhaseSample{M_PI - 0.1, 0.0, 0}, PhaseSample{-M_PI + 0.1, 0.0, 2});
  EXPECT_NEAR(std::abs(r.phase), M_PI, 1e-12);
}

TEST(DriftCorrect, VariancePropagation) {
  const auto r = drift_correct({0.0, 1.0, 1}, PhaseSample{0.0, 4.0, 0}, PhaseSample{0.0, 4.0, 2});
  EXPECT_DOUBLE_EQ(r.variance, 1.0 + 0.25 * 4 + 0.25 * 4);
}

TEST(DriftCorrect, MissingOrMisorderedReference) {
  EXPECT_THROW(drift_correct({0.0, 0.0, 1}, std::nullopt, PhaseSample{0.0, 0.0, 2}), ProtocolError);
  EXPECT_THROW(drift_correct({0.0, 0.0, 1}, PhaseSample{0.0, 0.0, 0}, std::nullopt), ProtocolError);
  EXPECT_THROW(drift_correct({0.0, 0.0, 3}, PhaseSample{0.0, 0.0, 0}, PhaseSample{0.0, 0.0, 2}), ProtocolError);
}

// -- unwrap_shift_series ----------------------------------------------------

TEST(Unwrap, IdentityForSmallShifts) {
  const auto u = tt::kilovolts(3, 15, 1);
  std::vector<double> phases;
  for (double x : u) phases.push_back(2.5 * (x / 15e3) * (x / 15e3));
  const auto r = unwrap_shift_series(phases, u, kG);
  EXPECT_TRUE(r.flagged.empty());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_DOUBLE_EQ(r.phases[i], phases[i]);
}

TEST(Unwrap, RecoversThreePeriodsForC70) {
  const auto ctx = tt::context(tt::c70());
  const auto d = VelocityDistribution::gaussian(109.0, 0.07);
  const auto u = tt::kilovolts(3, 15, 1);
  std::vector<double> truth, wrapped;
  for (double x : u) {
    truth.push_back(phasor_moments(ctx, 108.5, x, d, tt::bump_visibility()).mean_shift);
    wrapped.push_back(wrap_phase(2 * M_PI * truth.back() / kG));
  }
  ASSERT_GT(truth.back(), 2.5 * kG);
  const auto r = unwrap_shift_series(wrapped, u, kG);
  EXPECT_TRUE(r.flagged.empty());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(r.shifts[i], truth[i], 1e-9 * kG);
}

TEST(Unwrap, AllZero) {
  const auto u = tt::kilovolts(3, 15, 1);
  const auto r = unwrap_shift_series(std::vector<double>(u.size(), 0.0), u, kG);
  for (double s : r.shifts) EXPECT_EQ(s, 0.0);
}

TEST(Unwrap, InvariantUnderTwoPiOffsets) {
  const auto u = tt::kilovolts(3, 15, 1);
  std::vector<double> phases;
  for (double x : u) phases.push_back(wrap_phase(18.0 * (x / 15e3) * (x / 15e3)));
  const auto base = unwrap_shift_series(phases, u, kG);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> k(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    auto shifted = phases;
    const int global = k(rng);
    for (double& p : shifted) p += 2 * M_PI * (global + (trial % 2 ? k(rng) : 0));
    const auto r = unwrap_shift_series(shifted, u, kG);
    ASSERT_EQ(r.flagged.size(), base.flagged.size());
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(r.shifts[i], base.shifts[i], 1e-12 * kG);
  }
}

TEST(Unwrap, FlagsAmbiguousPoint) {
  const auto u = tt::kilovolts(3, 15, 1);
  std::vector<double> phases;
  for (double x : u) phases.push_back(wrap_phase(12.0 * (x / 15e3) * (x / 15e3)));
  phases[6] = wrap_phase(phases[6] + 0.8 * M_PI);
  const auto r = unwrap_shift_series(phases, u, kG);
  ASSERT_EQ(r.flagged.size(), 1u);
  EXPECT_EQ(r.flagged[0], 6u);
  EXPECT_TRUE(std::isnan(r.shifts[6]));
  EXPECT_NEAR(r.curvature, 12.0 / (15e3 * 15e3), 1e-12 / (15e3 * 15e3));
}

TEST(Unwrap, InputValidation) {
  EXPECT_THROW(unwrap_shift_series({0.0, 0.1}, {1.0}, kG), DomainError);
  EXPECT_THROW(unwrap_shift_series({0.0, 0.1}, {2.0, 1.0}, kG), DomainError);
}

// -- fit_alpha --------------------------------------------------------------

Campaign campaign(const MoleculeSpecies& sp, double alpha, const NoiseModel& n,
                  std::vector<std::pair<std::string, VelocityDistribution>> settings = tt::reference_settings()) {
  return synthesize_campaign(tt::context(sp), alpha, tt::bump_visibility(), settings, Protocol::standard(), n);
}

TEST(FitAlpha, NoiselessRecovery) {
  const auto est = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 1, false)), tt::bump_visibility());
  EXPECT_NEAR(est.alpha, 88.9, 1e-3 * 88.9);
  EXPECT_NEAR(est.alpha, 88.9, 1e-5 * 88.9);
  for (const auto& f : est.per_velocity) {
    EXPECT_TRUE(f.bracketed);
    EXPECT_TRUE(f.series.flagged.empty());
  }
}

TEST(FitAlpha, ShotNoisePooledErrorNearPermille) {
  const auto est = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 2024)), tt::bump_visibility());
  EXPECT_LE(est.pooled_err / est.alpha, 1e-3);
  EXPECT_GT(est.pooled_err, 0.0);
  EXPECT_LE(std::abs(est.alpha - 88.9), 3 * est.pooled_err);
  EXPECT_FALSE(est.stat_err_from_covariance);
  EXPECT_EQ(est.per_velocity.size(), 3u);
}

TEST(FitAlpha, C70Recovery) {
  const auto est = fit_alpha(campaign(tt::c70(), 108.5, tt::noise(1e4, 77)), tt::bump_visibility());
  EXPECT_LE(std::abs(est.alpha - 108.5), 2 * est.stat_err);
}

TEST(FitAlpha, ReportsAcrossVelocitySpread) {
  const auto est = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 5)), tt::bump_visibility());
  double mean = 0.0;
  for (const auto& f : est.per_velocity) mean += f.alpha / 3;
  double ss = 0.0;
  for (const auto& f : est.per_velocity) ss += (f.alpha - mean) * (f.alpha - mean);
  EXPECT_NEAR(est.stat_err, std::sqrt(ss / 2), 1e-12);
  double w = 0.0, wa = 0.0;
  for (const auto& f : est.per_velocity) {
    w += 1 / (f.alpha_err * f.alpha_err);
    wa += f.alpha / (f.alpha_err * f.alpha_err);
  }
  EXPECT_NEAR(est.alpha, wa / w, 1e-12 * est.alpha);
  EXPECT_NEAR(est.pooled_err, 1 / std::sqrt(w), 1e-12);
}

TEST(FitAlpha, DoublingCountsLeavesAlphaUnchanged) {
  auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 31));
  const auto a = fit_alpha(c, tt::bump_visibility());
  for (auto& s : c.settings)
    for (auto& scan : s.scans)
      for (double& n : scan.counts) n *= 2;
  const auto b = fit_alpha(c, tt::bump_visibility());
  EXPECT_NEAR(a.alpha, b.alpha, 1e-9 * a.alpha);
}

TEST(FitAlpha, VoltageAndGradientRescalingLeavesAlphaUnchanged) {
  auto ctx = tt::context();
  const auto vis = tt::bump_visibility();
  const auto a = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 8)), vis);

  const double k = 2.0;
  ctx.field.grad_product_ref /= k * k;
  auto p = Protocol::standard();
  for (double& u : p.voltages) u *= k;
  auto c = synthesize_campaign(ctx, 88.9, vis, tt::reference_settings(), p, tt::noise(1e4, 8));
  const auto b = fit_alpha(c, vis);
  EXPECT_NEAR(a.alpha, b.alpha, 1e-6 * a.alpha);
}

TEST(FitAlpha, SingleSettingFallsBackToCovariance) {
  const auto est = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 3), {tt::reference_settings()[1]}),
                             tt::bump_visibility());
  EXPECT_TRUE(est.stat_err_from_covariance);
  EXPECT_DOUBLE_EQ(est.stat_err, est.pooled_err);
}

TEST(FitAlpha, UnbracketedReferenceIsProtocolError) {
  auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 3, false));
  c.settings[0].scans.erase(c.settings[0].scans.begin() + 2);
  EXPECT_THROW(fit_alpha(c, tt::bump_visibility()), ProtocolError);
}

TEST(FitAlpha, BudgetAttachedWithResolutionScaledByMaxShift) {
  AlphaFitOptions o;
  o.budget_inputs = {{"field_gradient", 0.08 / 1.45}, {"resolution", 15e-9}};
  const auto est = fit_alpha(campaign(tt::c60(), 88.9, tt::noise(1e4, 1, false)), tt::bump_visibility(), o);
  ASSERT_EQ(est.budget.terms.size(), 2u);
  EXPECT_NEAR(est.budget.terms[1].relative_input, 15e-9 / est.max_shift, 1e-15);
  EXPECT_GT(est.max_shift, 2.5 * kG);
  EXPECT_NEAR(est.sys_err, est.alpha * est.budget.total, 1e-12);
}

// Acquisition of one 149-point scan at 1 s per point takes 149 s.
constexpr double kDriftPerScan = 0.5 / 3600.0 * 149.0;

TEST(Drift, CorrectedSeriesMatchesDriftFreeTruth) {
  const auto ctx = tt::context();
  const auto vis = tt::bump_visibility();
  const auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 99, true, kDriftPerScan));
  for (const auto& s : c.settings) {
    const auto series = extract_shift_series(s, kG);
    ASSERT_TRUE(series.flagged.empty());
    double chi2 = 0.0;
    for (std::size_t j = 0; j < series.voltages.size(); ++j) {
      const double truth = phasor_moments(ctx, 88.9, series.voltages[j], s.dist, vis).mean_shift;
      const double z = (series.shifts[j] - truth) / series.errors[j];
      EXPECT_LT(std::abs(z), 4.0);
      chi2 += z * z;
    }
    EXPECT_LT(chi2 / static_cast<double>(series.voltages.size()), 2.5);
  }
}

TEST(Drift, CorrectionRemovesBias) {
  const auto vis = tt::bump_visibility();
  const auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 99, true, kDriftPerScan));
  const auto corrected = fit_alpha(c, vis);
  AlphaFitOptions raw;
  raw.drift = DriftMode::constant;
  const auto biased = fit_alpha(c, vis, raw);
  EXPECT_LE(std::abs(corrected.alpha - 88.9), 2 * corrected.stat_err);
  EXPECT_GT(std::abs(biased.alpha - 88.9), 5 * corrected.stat_err);
}

TEST(Drift, ZeroDriftReferencesAreIdentity) {
  const auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 1, false));
  const auto series = extract_shift_series(c.settings[0], kG);
  const auto raw = extract_shift_series(c.settings[0], kG, DriftMode::constant);
  for (std::size_t j = 0; j < series.shifts.size(); ++j) EXPECT_NEAR(series.shifts[j], raw.shifts[j], 1e-12 * kG);
}

TEST(QuadraticLaw, UnwrappedShiftsFollowUSquaredWithinNoise) {
  // Single narrow setting: dephasing bends the law by far less than the noise.
  const auto c = campaign(tt::c60(), 88.9, tt::noise(1e4, 123), {{"mono", VelocityDistribution::gaussian(117, 0.01)}});
  const auto s = extract_shift_series(c.settings[0], kG);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < s.voltages.size(); ++j) {
    const double w = 1 / (s.errors[j] * s.errors[j]), u2 = s.voltages[j] * s.voltages[j];
    num += w * s.shifts[j] * u2;
    den += w * u2 * u2;
  }
  double chi2 = 0.0;
  for (std::size_t j = 0; j < s.voltages.size(); ++j) {
    const double r = (s.shifts[j] - num / den * s.voltages[j] * s.voltages[j]) / s.errors[j];
    chi2 += r * r;
  }
  // 95% quantile of chi2 with 12 degrees of freedom.
  EXPECT_LT(chi2, 21.03);
}

// -- budget -----------------------------------------------------------------

std::vector<std::pair<std::string, double>> reference_terms() {
  return {{"field_gradient", 0.08 / 1.45}, {"effective_length", 0.1 / 4.73}, {"velocity", 0.01},
          {"voltage", 0.005},              {"distance_L", 0.1 / 26.6},       {"resolution", 15.0 / 2973.0}};
}

TEST(Budget, AllZero) {
  std::vector<std::pair<std::string, double>> in;
  for (auto [n, v] : reference_terms()) in.emplace_back(n, 0.0);
  EXPECT_EQ(systematic_budget(in, {}).total, 0.0);
}

TEST(Budget, SingleTerm) {
  EXPECT_DOUBLE_EQ(systematic_budget({{"field_gradient", 0.055}}, {}).total, 0.055);
}

TEST(Budget, DefaultInputsAgainstHandQuadrature) {
  const DeflectometerGeometry g;
  const double arm = 0.0473 / 2 + 0.266;
  const double ed = 1 + (0.0473 / 2) / arm, el = 0.266 / arm;
  const double oracle = std::sqrt(std::pow(0.08 / 1.45, 2) + std::pow(ed * 0.1 / 4.73, 2) + std::pow(2 * 0.01, 2) +
                                  std::pow(2 * 0.005, 2) + std::pow(el * 0.1 / 26.6, 2) + std::pow(15.0 / 2973.0, 2));
  const auto t = systematic_budget(reference_terms(), g);
  EXPECT_NEAR(t.total, oracle, 1e-12);
  EXPECT_GE(t.total, 0.05);
  EXPECT_LE(t.total, 0.07);
  EXPECT_EQ(t.terms.size(), 6u);
}

TEST(Budget, OrderInvariance) {
  auto terms = reference_terms();
  const double base = systematic_budget(terms, {}).total;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(terms.begin(), terms.end(), rng);
    EXPECT_NEAR(systematic_budget(terms, {}).total, base, 1e-12);
  }
}

TEST(Budget, Exponents) {
  const DeflectometerGeometry g;
  EXPECT_EQ(budget_exponent("velocity", g), 2.0);
  EXPECT_EQ(budget_exponent("voltage", g), -2.0);
  EXPECT_EQ(budget_exponent("field_gradient", g), -1.0);
  // Finite-difference check of d ln alpha / d ln d and d ln alpha / d ln L with the shift held fixed.
  auto alpha_for = [&](double d, double L) { return 1.0 / (d * (d / 2 + L)); };
  const double h = 1e-6;
  const double dd = (std::log(alpha_for(0.0473 * (1 + h), 0.266)) - std::log(alpha_for(0.0473 * (1 - h), 0.266))) / (2 * h);
  const double dl = (std::log(alpha_for(0.0473, 0.266 * (1 + h))) - std::log(alpha_for(0.0473, 0.266 * (1 - h)))) / (2 * h);
  EXPECT_NEAR(budget_exponent("effective_length", g), dd, 1e-8);
  EXPECT_NEAR(budget_exponent("distance_L", g), dl, 1e-8);
}

TEST(Budget, UnknownTermIsConfigError) {
  EXPECT_THROW(systematic_budget({{"temperature", 0.01}}, {}), ConfigError);
  EXPECT_THROW(systematic_budget({{"voltage", -0.01}}, {}), ConfigError);
}

TEST(Budget, TableListsEachTerm) {
  const auto text = systematic_budget(reference_terms(), {}).format();
  for (const auto& [name, v] : reference_terms()) EXPECT_NE(text.find(name), std::string::npos);
  EXPECT_NE(text.find("total"), std::string::npos);
}

// -- alpha_ratio ------------------------------------------------------------

AlphaEstimate estimate(double alpha, double stat) {
  AlphaEstimate e;
  e.alpha = alpha;
  e.stat_err = stat;
  e.sys_err = 0.06 * alpha;
  return e;
}

TEST(AlphaRatio, Identical) { EXPECT_DOUBLE_EQ(alpha_ratio(estimate(88.9, 0.9), estimate(88.9, 0.9)).ratio, 1.0); }

TEST(AlphaRatio, ReferenceValues) {
  const auto r = alpha_ratio(estimate(108.5, 2.0), estimate(88.9, 0.9));
  EXPECT_NEAR(r.ratio, 1.2205, 1e-4);
  const double rel = std::sqrt(std::pow(2.0 / 108.5, 2) + std::pow(0.9 / 88.9, 2));
  EXPECT_NEAR(r.error / r.ratio, rel, 1e-14);
  EXPECT_NEAR(r.error / r.ratio, 0.021, 0.0005);
}

TEST(AlphaRatio, ZeroDenominator) { EXPECT_THROW(alpha_ratio(estimate(1, 0), estimate(0, 0)), DomainError); }

}  // namespace
