#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "adascale/engine.hpp"
#include "adascale/errors.hpp"
#include "adascale/gain.hpp"

using namespace adascale;

namespace {

GainConfig cfg(GainVariant v, std::optional<double> theta = std::nullopt) {
  GainConfig c;
  c.variant = v;
  c.theta = theta;
  return c;
}

GainSample sample(double m1, double m2, int S) { return GainSample{m1, m2, S}; }

}  // namespace

TEST(GainSample, HandExamples) {
  const std::vector<ParamVector> g{{1.0, 0.0}, {-1.0, 0.0}};
  const auto s = gain_sample(g, ParamVector{0.0, 0.0});
  EXPECT_EQ(s.mean_sq_norm, 1.0);
  EXPECT_EQ(s.agg_sq_norm, 0.0);
  EXPECT_EQ(s.S, 2);

  const std::vector<ParamVector> one{{0.3, -0.7}};
  const auto s1 = gain_sample(one, one[0]);
  EXPECT_EQ(s1.mean_sq_norm, s1.agg_sq_norm);

  const std::vector<ParamVector> same(8, ParamVector{0.1, 0.2, 0.3});
  const auto s8 = gain_sample(same, same[0]);
  EXPECT_EQ(s8.mean_sq_norm, s8.agg_sq_norm);

  EXPECT_THROW(gain_sample(std::span<const ParamVector>{}, ParamVector{}), ConfigError);
}

TEST(Recommended, HandExamples) {
  GainEstimator e(cfg(GainVariant::recommended, 0.0), 8);
  EXPECT_DOUBLE_EQ(e.update(sample(4.0, 1.0, 8)), (4 + 1e-6) / (1 + 1e-6));

  GainEstimator clamp(cfg(GainVariant::recommended, 0.0), 2);
  EXPECT_EQ(clamp.update(sample(1.0, 0.0, 2)), 2.0);

  GainEstimator flat(cfg(GainVariant::recommended), 16);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(flat.update(sample(2.5, 2.5, 16)), 1.0);
}

TEST(Recommended, BurnInUsesRunningMean) {
  // theta = 0.5 gives a burn-in of two samples.
  GainEstimator e(cfg(GainVariant::recommended, 0.5), 100);
  e.update(sample(3.0, 1.0, 100));
  e.update(sample(5.0, 1.0, 100));
  EXPECT_DOUBLE_EQ(e.m1_bar(), 4.0);
  e.update(sample(8.0, 1.0, 100));
  EXPECT_DOUBLE_EQ(e.m1_bar(), 0.5 * 4.0 + 0.5 * 8.0);
  EXPECT_DOUBLE_EQ(e.m2_bar(), 1.0);
}

TEST(Separated, HandExamples) {
  GainEstimator e(cfg(GainVariant::separated, 0.0), 2);
  EXPECT_EQ(e.update(sample(1.0, 0.0, 2)), 1.0);  // r_0
  EXPECT_DOUBLE_EQ(e.update(sample(1.0, 0.0, 2)), 2.0);

  GainEstimator z(cfg(GainVariant::separated, 0.0), 4);
  z.update(sample(9.0, 9.0, 4));
  EXPECT_NEAR(z.update(sample(9.0, 9.0, 4)), (1e-6 + 9.0) / (1e-6 / 4 + 9.0), 1e-15);

  EXPECT_THROW(GainEstimator(cfg(GainVariant::separated), 1), CapabilityError);
}

TEST(Gain, DefaultTheta) {
  EXPECT_DOUBLE_EQ(default_theta(8), 0.992);
  EXPECT_EQ(default_theta(1000), 0.0);
  EXPECT_EQ(default_theta(4096), 0.0);
  GainEstimator e(cfg(GainVariant::recommended), 32);
  EXPECT_DOUBLE_EQ(e.theta(), 0.968);
  e.set_scale(8);
  EXPECT_DOUBLE_EQ(e.theta(), 0.992);
  GainEstimator fixed(cfg(GainVariant::recommended, 0.5), 32);
  fixed.set_scale(8);
  EXPECT_EQ(fixed.theta(), 0.5);
}

TEST(Gain, VariantsAgreeWhenNoClampBinds) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const int S = 2 + static_cast<int>(g() % 63);
    const double sigma = u(g), mu = u(g);
    // Samples consistent with the given unbiased moments.
    const double agg = mu + sigma / S;
    const double mean = agg + sigma * (S - 1) / S;
    GainConfig rc = cfg(GainVariant::recommended, 0.0);
    rc.epsilon = 1e-300;
    GainConfig sc = cfg(GainVariant::separated, 0.0);
    sc.epsilon = 1e-300;
    GainEstimator r(rc, S), s(sc, S);
    const double rr = r.update(sample(mean, agg, S));
    s.update(sample(mean, agg, S));
    const double ss = s.update(sample(mean, agg, S));
    if (rr >= S || rr <= 1) continue;
    EXPECT_NEAR(rr, ss, 1e-9 * rr);
    EXPECT_NEAR(ss, (sigma + mu) / (sigma / S + mu), 1e-9 * ss);
  }
}

TEST(Gain, EstimatesStayInRange) {
  std::mt19937_64 g(9);
  std::lognormal_distribution<double> ln(0.0, 3.0);
  for (auto v : {GainVariant::recommended, GainVariant::separated}) {
    for (int seq = 0; seq < 100; ++seq) {
      const int S = 2 + static_cast<int>(g() % 63);
      GainConfig c = cfg(v, std::uniform_real_distribution<double>(0.0, 0.999)(g));
      c.exclude_current = seq % 2 == 0;
      GainEstimator e(c, S);
      for (int t = 0; t < 200; ++t) {
        const double r = e.update(sample(ln(g), ln(g), S));
        ASSERT_GE(r, 1.0);
        ASSERT_LE(r, S);
      }
    }
  }
}

TEST(Gain, ScaleOneAlwaysGivesOne) {
  GainEstimator e(cfg(GainVariant::recommended), 1);
  std::mt19937_64 g(1);
  std::lognormal_distribution<double> ln(0.0, 2.0);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(e.update(sample(ln(g), ln(g), 1)), 1.0);
  const auto q = NoisyQuadratic::diagonal({1.0}, {1.0}, ParamVector{0.0}, ParamVector{1.0});
  EXPECT_EQ(analytic_gain(q, ParamVector{0.3}, 1), 1.0);
  EXPECT_EQ(oracle_gain(q, ParamVector{0.3}, 1, 100, RngStream(1)), 1.0);
}

TEST(AnalyticGain, ClosedForm) {
  EXPECT_DOUBLE_EQ(gain_from_moments(1.0, 1.0, 4), 1.6);
  EXPECT_EQ(gain_from_moments(0.0, 3.0, 8), 1.0);
  EXPECT_EQ(gain_from_moments(2.0, 0.0, 8), 8.0);
  EXPECT_EQ(gain_from_moments(0.0, 0.0, 8), 1.0);

  // tr Sigma = 1 and mu^2 = 1 at w = 1.
  const auto q = NoisyQuadratic::diagonal({1.0}, {1.0}, ParamVector{0.0}, ParamVector{1.0});
  EXPECT_DOUBLE_EQ(analytic_gain(q, ParamVector{1.0}, 4), 1.6);

  // Ratio of expectations estimated from independent draws.
  const int n = 100000;
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    const auto b = compute_gradient(ParamVector{1.0}, 4, q, RngStream(3, static_cast<std::uint64_t>(i)));
    const auto s = gain_sample(b.per_worker, b.mean);
    num += s.mean_sq_norm;
    den += s.agg_sq_norm;
  }
  EXPECT_NEAR(num / den, 1.6, 0.02);
}

TEST(AnalyticGain, MonotoneAndBounded) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double sig = u(g), mu = u(g) + 1e-3;
    double prev = 1.0;
    for (int S = 1; S <= 128; ++S) {
      const double r = gain_from_moments(sig, mu, S);
      ASSERT_GE(r, prev);
      ASSERT_LE(r, sig / mu + 1 + 1e-12);
      prev = r;
    }
  }
}

TEST(OracleGain, Contracts) {
  const auto det = NoisyQuadratic::diagonal({1.0, 1.0}, {0.0, 0.0}, ParamVector{0.0, 0.0},
                                            ParamVector{1.0, 1.0});
  EXPECT_EQ(oracle_gain(det, ParamVector{1.0, 1.0}, 16, 100, RngStream(1)), 1.0);

  const auto q = NoisyQuadratic::diagonal({1.0, 1.0}, {1.0, 1.0}, ParamVector{0.0, 0.0},
                                          ParamVector{1.0, 1.0});
  for (std::uint64_t s = 0; s < 50; ++s) {
    const double r = oracle_gain(q, ParamVector{0.5, 0.5}, 2, 2, RngStream(s));
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_GE(r, 1.0);
    EXPECT_LE(r, 2.0);
  }
  for (int S : {2, 8, 64}) {
    const ParamVector w{1.0, 0.5};
    const double a = analytic_gain(q, w, S);
    EXPECT_NEAR(oracle_gain(q, w, S, 1000, RngStream(10 + S)), a, 0.05 * a) << "S=" << S;
  }
}

TEST(OnlineGain, ConvergesAtFrozenPoint) {
  const std::size_t d = 32;
  const auto q = NoisyQuadratic::diagonal(std::vector<double>(d, 1.0), std::vector<double>(d, 0.05),
                                          ParamVector(d), ParamVector(d, 1.0));
  const ParamVector w(d, 0.2);
  for (auto v : {GainVariant::recommended, GainVariant::separated}) {
    for (int S : {4, 16, 64}) {
      GainEstimator e(cfg(v), S);
      double r = 0;
      GradientBundle b;
      for (std::int64_t t = 0; t < 10000; ++t) {
        compute_gradient(w, S, q, iteration_stream(99, t), b);
        r = e.update(gain_sample(b.per_worker, b.mean));
      }
      const double a = analytic_gain(q, w, S);
      EXPECT_NEAR(r, a, 0.03 * a) << to_string(v) << " S=" << S;
    }
  }
}

TEST(Gain, VariantNames) {
  EXPECT_EQ(parse_gain_variant("recommended"), GainVariant::recommended);
  EXPECT_EQ(parse_gain_variant(to_string(GainVariant::separated)), GainVariant::separated);
  EXPECT_THROW(parse_gain_variant("median"), ConfigError);
}
