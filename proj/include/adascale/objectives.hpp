#pragma once

// Stochastic objectives F(w) = E_x[f(w, x)] with a batch sampler.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "adascale/param_vector.hpp"
#include "adascale/rng.hpp"

namespace adascale {

/// Standard-normal draws; the objective maps them to its noise model.
struct GaussianDraw {
  std::vector<double> z;
};

/// Example indices drawn with replacement from a fixed dataset.
struct ExampleIndices {
  std::vector<std::uint32_t> indices;
};

struct Batch {
  std::variant<GaussianDraw, ExampleIndices> payload;
  int worker_index = 1;  ///< 1-based, in [1, S]
};

struct GradientMoments {
  double mu_sq = 0.0;     ///< ||grad F(w)||^2
  double sigma_sq = 0.0;  ///< tr(cov of one batch gradient)
};

class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string_view name() const = 0;

  /// Draws one worker's batch from `rng`.
  virtual Batch sample_batch(RngStream& rng, int worker_index) const = 0;

  /// out <- grad_w f(w, b). `out` is resized as needed.
  virtual void stochastic_gradient(const ParamVector& w, const Batch& b, ParamVector& out) const = 0;
  ParamVector stochastic_gradient(const ParamVector& w, const Batch& b) const;

  /// Exact grad F(w). Throws CapabilityError if unsupported.
  virtual void true_gradient(const ParamVector& w, ParamVector& out) const = 0;
  ParamVector true_gradient(const ParamVector& w) const;

  virtual double value(const ParamVector& w) const = 0;

  /// Closed-form gradient moments. Throws CapabilityError unless overridden.
  virtual GradientMoments analytic_moments(const ParamVector& w) const;
  virtual bool has_analytic_moments() const { return false; }

  /// True when every batch yields grad F(w) exactly.
  virtual bool is_deterministic() const { return false; }

  /// F* when known in closed form.
  virtual std::optional<double> optimum_value() const { return std::nullopt; }

  virtual const ParamVector& initial_point() const = 0;

 protected:
  void check_dim(const ParamVector& w) const;
};

/// S jointly independent batches; batch i comes from rng.substream(i - 1).
/// Deterministic in the state of `rng`, which is not advanced.
std::vector<Batch> sample_batches(const StochasticObjective& obj, int S, const RngStream& rng);

/// F(w) = 1/2 (w - w*)^T A (w - w*), stochastic gradient A (w - w*) + xi with
/// xi ~ N(0, nu * Sigma).
class NoisyQuadratic final : public StochasticObjective {
 public:
  NoisyQuadratic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma, ParamVector w_star,
                 ParamVector w0, double nu = 1.0);

  static NoisyQuadratic diagonal(const std::vector<double>& a_diag,
                                 const std::vector<double>& sigma_diag, ParamVector w_star,
                                 ParamVector w0, double nu = 1.0);

  std::size_t dim() const override { return dim_; }
  std::string_view name() const override { return "noisy_quadratic"; }
  Batch sample_batch(RngStream& rng, int worker_index) const override;
  void stochastic_gradient(const ParamVector& w, const Batch& b, ParamVector& out) const override;
  using StochasticObjective::stochastic_gradient;
  void true_gradient(const ParamVector& w, ParamVector& out) const override;
  using StochasticObjective::true_gradient;
  double value(const ParamVector& w) const override;
  GradientMoments analytic_moments(const ParamVector& w) const override;
  bool has_analytic_moments() const override { return true; }
  bool is_deterministic() const override { return noise_rank_ == 0; }
  std::optional<double> optimum_value() const override { return 0.0; }
  const ParamVector& initial_point() const override { return w0_; }

  /// PL constant lambda_min(A).
  double alpha() const { return alpha_; }
  /// Smoothness constant lambda_max(A).
  double beta() const { return beta_; }
  /// Variance bound: nu * tr(Sigma), independent of w.
  double variance() const { return trace_noise_; }
  double nu() const { return nu_; }
  const ParamVector& minimizer() const { return w_star_; }

 private:
  void residual(const ParamVector& w, ParamVector& e) const;
  void apply_A(const ParamVector& e, ParamVector& out) const;

  std::size_t dim_;
  std::vector<double> A_;  // row-major d x d
  bool noise_diagonal_ = false;
  std::size_t noise_rank_ = 0;
  std::vector<double> noise_factor_;  // diagonal: d entries; else row-major d x rank
  ParamVector w_star_;
  ParamVector w0_;
  double nu_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double trace_noise_ = 0.0;
};

struct ClassifierOptions {
  enum class Model { logistic, mlp };
  Model model = Model::logistic;
  std::size_t n_examples = 256;
  std::size_t features = 4;
  std::size_t hidden = 8;  ///< mlp only
  std::size_t batch_size = 16;
  double separation = 1.0;  ///< cluster centres at +/- separation along the diagonal
  double l2 = 0.0;          ///< optional 1/2 l2 ||w||^2 term
  std::uint64_t data_seed = 20200712;

  friend bool operator==(const ClassifierOptions&, const ClassifierOptions&) = default;
};

/// Two-cluster binary classification over a dataset generated at construction.
/// F is the mean logistic loss over the dataset; batches draw example indices
/// uniformly with replacement, so batch gradients are unbiased.
class GeneratedClassifier final : public StochasticObjective {
 public:
  explicit GeneratedClassifier(ClassifierOptions opts = {});

  std::size_t dim() const override { return dim_; }
  std::string_view name() const override;
  Batch sample_batch(RngStream& rng, int worker_index) const override;
  void stochastic_gradient(const ParamVector& w, const Batch& b, ParamVector& out) const override;
  using StochasticObjective::stochastic_gradient;
  void true_gradient(const ParamVector& w, ParamVector& out) const override;
  using StochasticObjective::true_gradient;
  double value(const ParamVector& w) const override;
  const ParamVector& initial_point() const override { return w0_; }

  /// Loss of a single example, without the l2 term.
  double example_loss(const ParamVector& w, std::size_t i) const;
  /// Batch covering every example exactly once, in index order.
  Batch full_batch() const;

  const ClassifierOptions& options() const { return opts_; }

 private:
  double logit(const ParamVector& w, std::size_t i, std::vector<double>* hidden) const;
  void accumulate_example_gradient(const ParamVector& w, std::size_t i, double weight,
                                   std::vector<double>& hidden, ParamVector& out) const;
  void gradient_over(const ParamVector& w, std::span<const std::uint32_t> idx,
                     ParamVector& out) const;

  ClassifierOptions opts_;
  std::size_t dim_;
  std::vector<double> x_;  // row-major n x features
  std::vector<double> y_;  // 0/1
  ParamVector w0_;
};

/// Serializable description of an objective; see make_objective.
struct ObjectiveSpec {
  std::string kind = "noisy_quadratic";  ///< noisy_quadratic | logistic | mlp
  // noisy_quadratic
  std::vector<double> a_diag{1.0, 1.0};
  std::vector<double> a_full;  ///< row-major, overrides a_diag when non-empty
  std::vector<double> sigma_diag{0.01, 0.01};
  std::vector<double> sigma_full;  ///< row-major, overrides sigma_diag when non-empty
  std::vector<double> w_star;      ///< default: zeros
  std::vector<double> w0;          ///< default: ones
  double nu = 1.0;
  // classifier
  ClassifierOptions classifier;

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

std::unique_ptr<StochasticObjective> make_objective(const ObjectiveSpec& spec);

/// Central-difference gradient of obj.value, step h on each coordinate.
ParamVector finite_difference_gradient(const StochasticObjective& obj, const ParamVector& w,
                                       double h = 1e-5);

/// F* by deterministic full-gradient descent when no closed form exists.
double estimate_optimum(const StochasticObjective& obj, double lr, std::size_t iterations);

}  // namespace adascale
