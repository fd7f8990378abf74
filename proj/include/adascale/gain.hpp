#pragma once

// Gain-ratio estimation. The gain r_t in [1, S] is the ratio of the second
// moment of a single-batch gradient to that of the S-batch mean:
//
//   r = E[sigma^2 + mu^2] / E[sigma^2 / S + mu^2]
//     = E[(1/S) sum_i ||g_i||^2] / E[||g_bar||^2]
//
// where sigma^2 = tr(cov(g)) and mu^2 = ||grad F||^2.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "adascale/objectives.hpp"
#include "adascale/param_vector.hpp"
#include "adascale/rng.hpp"

namespace adascale {

struct GainSample {
  double mean_sq_norm = 0.0;  ///< (1/S) sum_i ||g_i||^2
  double agg_sq_norm = 0.0;   ///< ||g_bar||^2
  int S = 1;
};

/// `agg` must be the mean of `grads`.
GainSample gain_sample(std::span<const ParamVector> grads, const ParamVector& agg);

enum class GainVariant {
  recommended,  ///< ratio of epsilon-stabilized moving averages of the two norms
  separated,    ///< unbiased variance / mean-square estimates with clamps
};

struct GainConfig {
  GainVariant variant = GainVariant::recommended;
  /// Moving-average parameter; default max(1 - S/1000, 0), tracked across scale changes.
  std::optional<double> theta;
  double epsilon = 1e-6;
  /// Estimate r_t from previous iterations only (the current sample is
  /// absorbed afterwards).
  bool exclude_current = false;

  friend bool operator==(const GainConfig&, const GainConfig&) = default;
};

double default_theta(int S);

class GainEstimator {
 public:
  GainEstimator(GainConfig cfg, int S);

  /// Absorbs one iteration's sample and returns r_hat in [1, S].
  double update(const GainSample& sample);
  double update_recommended(const GainSample& sample);
  double update_separated(const GainSample& sample);

  /// Switch scale (elastic training). Accumulators are kept; theta is
  /// recomputed unless it was fixed in the config.
  void set_scale(int S);

  int scale() const { return S_; }
  double theta() const { return theta_; }
  std::int64_t count() const { return count_; }
  double last() const { return last_; }
  const GainConfig& config() const { return cfg_; }

  // Moving averages (recommended: m1, m2; separated: sigma^2, mu^2).
  double m1_bar() const { return a_bar_; }
  double m2_bar() const { return b_bar_; }
  double sigma_bar_sq() const { return a_bar_; }
  double mu_bar_sq() const { return b_bar_; }

 private:
  void absorb(double a, double b);
  double clamp_gain(double r) const;
  double recommended_estimate() const;
  double separated_estimate() const;

  GainConfig cfg_;
  int S_;
  double theta_;
  double a_bar_ = 0.0;
  double b_bar_ = 0.0;
  std::int64_t count_ = 0;
  double last_ = 1.0;
};

/// Exact gain from closed-form moments (noisy quadratic).
double analytic_gain(const StochasticObjective& obj, const ParamVector& w, int S);
/// Same formula from given moments; 1 when both vanish.
double gain_from_moments(double sigma_sq, double mu_sq, int S);

/// Offline Monte-Carlo estimate at fixed w from n_batches single-batch
/// gradients (batch j drawn from rng.substream(j)), clamped to [1, S].
double oracle_gain(const StochasticObjective& obj, const ParamVector& w, int S,
                   std::size_t n_batches, const RngStream& rng);

std::string_view to_string(GainVariant v);
GainVariant parse_gain_variant(std::string_view s);

}  // namespace adascale
