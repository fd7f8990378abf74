#include <cmath>
#include <random>
#include <variant>

#include <gtest/gtest.h>

#include "adascale/errors.hpp"
#include "adascale/objectives.hpp"

using namespace adascale;

namespace {

NoisyQuadratic iso2(double sigma, std::vector<double> w0 = {1.0, 0.0}) {
  return NoisyQuadratic::diagonal({1.0, 1.0}, {sigma, sigma}, ParamVector{0.0, 0.0},
                                  ParamVector(std::move(w0)));
}

ClassifierOptions mlp_opts() {
  ClassifierOptions o;
  o.model = ClassifierOptions::Model::mlp;
  o.n_examples = 64;
  o.features = 3;
  o.hidden = 5;
  o.batch_size = 8;
  return o;
}

ParamVector random_point(std::mt19937_64& g, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  ParamVector w(d);
  for (std::size_t i = 0; i < d; ++i) w[i] = nd(g);
  return w;
}

}  // namespace

TEST(NoisyQuadratic, HandValues) {
  const auto q = NoisyQuadratic::diagonal({1.0, 2.0}, {0.0, 0.0}, ParamVector{0.5, -1.0},
                                          ParamVector{1.5, 0.0});
  const auto g = q.true_gradient(ParamVector{1.5, 0.0});
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 2.0);
  const auto zero = q.true_gradient(ParamVector{0.5, -1.0});
  EXPECT_EQ(zero[0], 0.0);
  EXPECT_EQ(zero[1], 0.0);
  EXPECT_TRUE(q.is_deterministic());

  const auto p = iso2(0.0);
  EXPECT_DOUBLE_EQ(p.value(ParamVector{3.0, 4.0}), 12.5);
  EXPECT_EQ(p.value(ParamVector{0.0, 0.0}), 0.0);
}

TEST(NoisyQuadratic, NoiselessGradientAtMinimizerIsZero) {
  const auto q = iso2(0.0);
  RngStream r(1);
  const auto b = q.sample_batch(r, 1);
  const auto g = q.stochastic_gradient(ParamVector{0.0, 0.0}, b);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(NoisyQuadratic, AnalyticMomentsByHand) {
  const auto q = iso2(1.0);
  const auto m = q.analytic_moments(ParamVector{1.0, 0.0});
  EXPECT_DOUBLE_EQ(m.mu_sq, 1.0);
  EXPECT_DOUBLE_EQ(m.sigma_sq, 2.0);
  EXPECT_EQ(iso2(0.0).analytic_moments(ParamVector{1.0, 0.0}).sigma_sq, 0.0);

  std::mt19937_64 g(3);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(q.analytic_moments(random_point(g, 2)).sigma_sq, 2.0);
}

TEST(NoisyQuadratic, SampleMeanAndVarianceMatchClosedForm) {
  const auto q = iso2(1.0);
  const ParamVector w{1.0, 0.0};
  const int n = 100000;
  double s0 = 0, s1 = 0, ss0 = 0, ss1 = 0;
  for (int i = 0; i < n; ++i) {
    RngStream r(77, static_cast<std::uint64_t>(i));
    const auto g = q.stochastic_gradient(w, q.sample_batch(r, 1));
    s0 += g[0], s1 += g[1];
    ss0 += g[0] * g[0], ss1 += g[1] * g[1];
  }
  const double m0 = s0 / n, m1 = s1 / n;
  EXPECT_NEAR(m0, 1.0, 3e-2);
  EXPECT_NEAR(m1, 0.0, 3e-2);
  const double var = (ss0 - n * m0 * m0 + ss1 - n * m1 * m1) / (n - 1);
  EXPECT_NEAR(var / q.analytic_moments(w).sigma_sq, 1.0, 0.02);
}

TEST(NoisyQuadratic, FullCovarianceAndNu) {
  Eigen::MatrixXd A(2, 2), Sig(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  Sig << 1.0, 0.3, 0.3, 0.5;
  const NoisyQuadratic q(A, Sig, ParamVector{0.0, 0.0}, ParamVector{1.0, 1.0}, 4.0);
  EXPECT_DOUBLE_EQ(q.variance(), 6.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  EXPECT_NEAR(q.alpha(), es.eigenvalues()(0), 1e-12);
  EXPECT_NEAR(q.beta(), es.eigenvalues()(1), 1e-12);

  const ParamVector w{0.2, -0.4};
  const int n = 100000;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  const auto mean = q.true_gradient(w);
  for (int i = 0; i < n; ++i) {
    RngStream r(5, static_cast<std::uint64_t>(i));
    const auto g = q.stochastic_gradient(w, q.sample_batch(r, 1));
    const Eigen::Vector2d e(g[0] - mean[0], g[1] - mean[1]);
    cov += e * e.transpose();
  }
  cov /= n;
  const Eigen::Matrix2d expect = 4.0 * Sig;
  EXPECT_NEAR(cov(0, 0), expect(0, 0), 0.03 * expect(0, 0));
  EXPECT_NEAR(cov(1, 1), expect(1, 1), 0.03 * expect(1, 1));
  EXPECT_NEAR(cov(0, 1), expect(0, 1), 0.05);
}

TEST(NoisyQuadratic, PlInequalityHolds) {
  Eigen::MatrixXd A(3, 3);
  A << 3.0, 0.2, 0.0, 0.2, 1.0, 0.1, 0.0, 0.1, 0.5;
  const NoisyQuadratic q(A, Eigen::MatrixXd::Zero(3, 3), ParamVector{1.0, 0.0, -1.0},
                         ParamVector{0.0, 0.0, 0.0});
  std::mt19937_64 g(8);
  for (int i = 0; i < 50; ++i) {
    const auto w = random_point(g, 3, 2.0);
    const auto grad = q.true_gradient(w);
    double n2 = 0;
    for (std::size_t j = 0; j < 3; ++j) n2 += grad[j] * grad[j];
    EXPECT_LE(q.value(w), n2 / (2 * q.alpha()) * (1 + 1e-12));
  }
  const auto iso = iso2(0.0);
  const ParamVector w{0.3, -1.7};
  const auto grad = iso.true_gradient(w);
  EXPECT_NEAR(iso.value(w), (grad[0] * grad[0] + grad[1] * grad[1]) / 2, 1e-15);
}

TEST(NoisyQuadratic, DimensionMismatchIsConfigError) {
  const auto q = iso2(1.0);
  EXPECT_THROW(q.true_gradient(ParamVector{1.0, 2.0, 3.0}), ConfigError);
}

TEST(SampleBatches, DeterministicAndIndependent) {
  const auto q = iso2(1.0);
  const RngStream r(10, 3);
  const auto a = sample_batches(q, 1, r), b = sample_batches(q, 1, r);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(std::get<GaussianDraw>(a[0].payload).z, std::get<GaussianDraw>(b[0].payload).z);

  // Cross-correlation of the first noise coordinate between worker pairs.
  const int n = 100000;
  double c01 = 0, c23 = 0, s0 = 0, s1 = 0, q0 = 0, q1 = 0;
  for (int i = 0; i < n; ++i) {
    const auto bs = sample_batches(q, 4, RngStream(4, static_cast<std::uint64_t>(i)));
    ASSERT_EQ(bs.size(), 4u);
    const double z0 = std::get<GaussianDraw>(bs[0].payload).z[0];
    const double z1 = std::get<GaussianDraw>(bs[1].payload).z[0];
    const double z2 = std::get<GaussianDraw>(bs[2].payload).z[0];
    const double z3 = std::get<GaussianDraw>(bs[3].payload).z[0];
    c01 += z0 * z1, c23 += z2 * z3;
    s0 += z0, s1 += z1, q0 += z0 * z0, q1 += z1 * z1;
  }
  const double corr = (c01 / n - (s0 / n) * (s1 / n)) /
                      std::sqrt((q0 / n - s0 * s0 / n / n) * (q1 / n - s1 * s1 / n / n));
  EXPECT_LT(std::abs(corr), 4 / std::sqrt(double(n)));
  EXPECT_LT(std::abs(c23 / n), 4 / std::sqrt(double(n)));
}

TEST(GeneratedClassifier, BatchSizesAndFullBatch) {
  ClassifierOptions o;
  o.n_examples = 100;
  o.batch_size = 10;
  const GeneratedClassifier c(o);
  const auto bs = sample_batches(c, 2, RngStream(1));
  ASSERT_EQ(bs.size(), 2u);
  for (const auto& b : bs) {
    const auto& idx = std::get<ExampleIndices>(b.payload).indices;
    EXPECT_EQ(idx.size(), 10u);
    for (auto i : idx) EXPECT_LT(i, 100u);
  }
  std::mt19937_64 g(2);
  const auto w = random_point(g, c.dim());
  const auto full = c.stochastic_gradient(w, c.full_batch());
  const auto exact = c.true_gradient(w);
  EXPECT_EQ(full, exact);
}

TEST(GeneratedClassifier, ValueIsMeanExampleLoss) {
  for (auto opts : {ClassifierOptions{}, mlp_opts()}) {
    const GeneratedClassifier c(opts);
    std::mt19937_64 g(4);
    const auto w = random_point(g, c.dim());
    long double sum = 0;
    for (std::size_t i = 0; i < opts.n_examples; ++i) {
      const double l = c.example_loss(w, i);
      ASSERT_GE(l, 0.0);
      sum += l;
    }
    EXPECT_NEAR(c.value(w), static_cast<double>(sum / opts.n_examples), 1e-12);
    EXPECT_GE(c.value(w), 0.0);
  }
}

TEST(GeneratedClassifier, StochasticGradientIsUnbiased) {
  const GeneratedClassifier c;
  std::mt19937_64 g(6);
  const auto w = random_point(g, c.dim(), 0.5);
  const auto exact = c.true_gradient(w);
  const int n = 20000;
  std::vector<double> sum(c.dim()), sq(c.dim());
  for (int i = 0; i < n; ++i) {
    RngStream r(12, static_cast<std::uint64_t>(i));
    const auto gi = c.stochastic_gradient(w, c.sample_batch(r, 1));
    for (std::size_t j = 0; j < c.dim(); ++j) sum[j] += gi[j], sq[j] += gi[j] * gi[j];
  }
  for (std::size_t j = 0; j < c.dim(); ++j) {
    const double m = sum[j] / n;
    const double sd = std::sqrt(std::max(sq[j] / n - m * m, 0.0) / n);
    EXPECT_NEAR(m, exact[j], 3 * sd + 1e-12);
  }
}

TEST(Objectives, GradientsMatchFiniteDifferences) {
  std::vector<std::unique_ptr<StochasticObjective>> objs;
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  objs.push_back(std::make_unique<NoisyQuadratic>(A, Eigen::MatrixXd::Identity(2, 2),
                                                  ParamVector{1.0, -1.0}, ParamVector{0.0, 0.0}));
  objs.push_back(std::make_unique<GeneratedClassifier>());
  ClassifierOptions reg;
  reg.l2 = 0.1;
  objs.push_back(std::make_unique<GeneratedClassifier>(reg));
  objs.push_back(std::make_unique<GeneratedClassifier>(mlp_opts()));

  std::mt19937_64 g(21);
  for (const auto& o : objs) {
    SCOPED_TRACE(std::string(o->name()));
    for (int k = 0; k < 10; ++k) {
      const auto w = random_point(g, o->dim(), 0.7);
      const auto exact = o->true_gradient(w);
      const auto fd = finite_difference_gradient(*o, w, 1e-5);
      double num = 0, den = 0;
      for (std::size_t j = 0; j < o->dim(); ++j) {
        num += (exact[j] - fd[j]) * (exact[j] - fd[j]);
        den += exact[j] * exact[j];
      }
      EXPECT_LE(std::sqrt(num), 1e-6 * std::sqrt(den) + 1e-9);
    }
  }
}

TEST(Objectives, MakeObjectiveAndCapabilities) {
  ObjectiveSpec spec;
  spec.a_diag = {1.0, 2.0};
  spec.sigma_diag = {0.5, 0.5};
  spec.w0 = {1.0, 1.0};
  const auto q = make_objective(spec);
  EXPECT_EQ(q->dim(), 2u);
  EXPECT_TRUE(q->has_analytic_moments());
  EXPECT_EQ(q->optimum_value(), 0.0);

  spec.kind = "logistic";
  const auto c = make_objective(spec);
  EXPECT_FALSE(c->has_analytic_moments());
  EXPECT_THROW(c->analytic_moments(c->initial_point()), CapabilityError);
  EXPECT_FALSE(c->optimum_value().has_value());

  spec.kind = "no_such_objective";
  EXPECT_THROW(make_objective(spec), ConfigError);
}

TEST(Objectives, EstimateOptimumFindsQuadraticMinimum) {
  const auto q = NoisyQuadratic::diagonal({1.0, 0.5}, {0.1, 0.1}, ParamVector{2.0, -1.0},
                                          ParamVector{0.0, 0.0});
  EXPECT_NEAR(estimate_optimum(q, 0.5, 2000), 0.0, 1e-12);
  const GeneratedClassifier c;
  const double Fstar = estimate_optimum(c, 0.5, 5000);
  EXPECT_LE(Fstar, c.value(c.initial_point()));
  EXPECT_GE(Fstar, 0.0);
}
