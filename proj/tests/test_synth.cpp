#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace tlstark;
namespace tt = tlstark::testing;

namespace {

constexpr double kG = 991e-9;

const std::vector<double>& positions() {
  static const auto p = scan_positions(0.0, 20e-9, 149);
  return p;
}

TEST(SynthesizeScan, ZeroCountsScale) {
  const auto s = synthesize_scan(tt::context(), 88.9, 6e3, VelocityDistribution::gaussian(117, 0.08),
                                 tt::bump_visibility(), tt::noise(0.0, 1), positions());
  for (double c : s.counts) EXPECT_EQ(c, 0.0);
}

TEST(SynthesizeScan, NoiselessRecoveredByFit) {
  const auto ctx = tt::context();
  const auto d = VelocityDistribution::gaussian(117, 0.08);
  const auto vis = tt::bump_visibility();
  const auto s = synthesize_scan(ctx, 88.9, 6e3, d, vis, tt::noise(1e4, 1, false), positions());
  const auto m = phasor_moments(ctx, 88.9, 6e3, d, vis);
  const auto f = fit_sinusoid(s, kG);
  EXPECT_NEAR(f.offset, 1e4, 1e-10 * 1e4);
  EXPECT_NEAR(f.visibility, m.mean_visibility, 1e-10 * m.mean_visibility);
  const double phase = wrap_phase(2 * M_PI * m.mean_shift / kG);
  EXPECT_NEAR(f.phase, phase, 1e-10 * std::abs(phase));
  EXPECT_EQ(s.role, ScanRole::measurement);
}

TEST(SynthesizeScan, ReferenceRoleAtZeroVoltage) {
  const auto s = synthesize_scan(tt::context(), 88.9, 0.0, VelocityDistribution::gaussian(117, 0.08),
                                 tt::bump_visibility(), tt::noise(1e4, 1), positions());
  EXPECT_EQ(s.role, ScanRole::reference);
  EXPECT_NO_THROW(s.validate());
}

TEST(SynthesizeScan, SeedDeterminism) {
  const auto d = VelocityDistribution::gaussian(117, 0.08);
  const auto a = synthesize_scan(tt::context(), 88.9, 6e3, d, tt::bump_visibility(), tt::noise(1e4, 42), positions());
  const auto b = synthesize_scan(tt::context(), 88.9, 6e3, d, tt::bump_visibility(), tt::noise(1e4, 42), positions());
  const auto c = synthesize_scan(tt::context(), 88.9, 6e3, d, tt::bump_visibility(), tt::noise(1e4, 43), positions());
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
  for (double x : a.counts) EXPECT_EQ(x, std::floor(x));
}

TEST(SynthesizeScan, DriftOffsetsPhaseBySequence) {
  const auto d = VelocityDistribution::gaussian(117, 0.08);
  const auto vis = tt::bump_visibility();
  const auto n = tt::noise(1e4, 1, false, 0.03);
  const auto s0 = synthesize_scan(tt::context(), 88.9, 6e3, d, vis, n, positions(), 0);
  const auto s7 = synthesize_scan(tt::context(), 88.9, 6e3, d, vis, n, positions(), 7);
  EXPECT_NEAR(wrap_phase(fit_sinusoid(s7, kG).phase - fit_sinusoid(s0, kG).phase), 0.21, 1e-10);
}

TEST(SynthesizeScan, InvalidNoise) {
  EXPECT_THROW(synthesize_scan(tt::context(), 88.9, 6e3, VelocityDistribution::gaussian(117, 0.08),
                               tt::bump_visibility(), tt::noise(-1.0, 1), positions()),
               DomainError);
  EXPECT_THROW(scan_positions(0.0, 0.0, 10), DomainError);
}

TEST(SynthesizeCampaign, ProtocolCounts) {
  const auto c = synthesize_campaign(tt::context(), 88.9, tt::bump_visibility(), tt::reference_settings(),
                                     Protocol::standard(), tt::noise(1e4, 3));
  ASSERT_EQ(c.settings.size(), 3u);
  long expected_sequence = 0;
  for (const auto& s : c.settings) {
    int hv = 0, ref = 0;
    for (std::size_t i = 0; i < s.scans.size(); ++i) {
      const auto& scan = s.scans[i];
      EXPECT_EQ(scan.sequence, expected_sequence++);
      (scan.role == ScanRole::reference ? ref : hv)++;
      // References alternate with high-voltage scans, starting and ending with one.
      EXPECT_EQ(scan.role == ScanRole::reference, i % 2 == 0);
      EXPECT_EQ(scan.positions.size(), 149u);
    }
    EXPECT_EQ(hv, 13);
    EXPECT_EQ(ref, 14);
  }
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.voltage_min, 3e3);
  EXPECT_EQ(c.voltage_max, 15e3);
}

TEST(SynthesizeCampaign, NoiselessFitReturnsTruth) {
  const auto c = synthesize_campaign(tt::context(), 88.9, tt::bump_visibility(), tt::reference_settings(),
                                     Protocol::standard(), tt::noise(1e4, 3, false));
  EXPECT_NEAR(fit_alpha(c, tt::bump_visibility()).alpha, 88.9, 1e-3 * 88.9);
}

TEST(SynthesizeCampaign, Errors) {
  EXPECT_THROW(synthesize_campaign(tt::context(), 88.9, tt::bump_visibility(), {}, Protocol::standard(),
                                   tt::noise(1e4, 3)),
               DomainError);
  Protocol p = Protocol::standard();
  p.voltages.clear();
  EXPECT_THROW(synthesize_campaign(tt::context(), 88.9, tt::bump_visibility(), tt::reference_settings(), p,
                                   tt::noise(1e4, 3)),
               DomainError);
}

TEST(SynthesizeSweep, NoiselessMatchesModel) {
  const auto ctx = tt::context(tt::c70());
  const auto d = VelocityDistribution::gaussian(103.2, 0.07);
  const auto u = tt::kilovolts(0, 15, 1);
  const auto r = synthesize_sweep(ctx, 108.5, d, tt::bump_visibility(), 100e-9, u, tt::noise(500.0, 1, false));
  const auto model = voltage_sweep(ctx, 108.5, d, tt::bump_visibility(), 100e-9, u);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(r.counts[i], 500.0 * model[i].signal, 1e-9);
}

class PoissonMean : public ::testing::TestWithParam<double> {};

TEST_P(PoissonMean, SampleMeanWithinThreeSigma) {
  const double mean = GetParam();
  RandomStream rng(2718);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(rng.poisson(mean));
    sum += k;
    sum2 += k * k;
  }
  const double m = sum / n;
  EXPECT_LE(std::abs(m - mean), 3.0 * std::sqrt(mean / n));
  const double var = sum2 / n - m * m;
  EXPECT_NEAR(var, mean, 0.1 * mean);
}

INSTANTIATE_TEST_SUITE_P(Means, PoissonMean, ::testing::Values(0.3, 4.0, 9.99, 10.0, 37.5, 1e4, 1.2e4));

TEST(RandomStreamTest, UniformRangeAndDeterminism) {
  RandomStream a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_EQ(x, b.uniform());
  }
  EXPECT_EQ(RandomStream(1).poisson(0.0), 0u);
}

}  // namespace
