#include "adascale/gain.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adascale/errors.hpp"
#include "adascale/kernels/kernels.hpp"

namespace adascale {

GainSample gain_sample(std::span<const ParamVector> grads, const ParamVector& agg) {
  if (grads.empty()) throw ConfigError("gain_sample needs S >= 1");
  std::vector<double> sq(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) sq[i] = kernels::sq_norm(grads[i].span());
  for (std::size_t stride = 1; stride < sq.size(); stride *= 2)
    for (std::size_t i = 0; i + stride < sq.size(); i += 2 * stride) sq[i] += sq[i + stride];
  const double sum = sq[0];
  const int S = static_cast<int>(grads.size());
  return {sum / static_cast<double>(S), kernels::sq_norm(agg.span()), S};
}

double default_theta(int S) { return std::max(1.0 - static_cast<double>(S) / 1000.0, 0.0); }

GainEstimator::GainEstimator(GainConfig cfg, int S)
    : cfg_(cfg), S_(S), theta_(cfg.theta.value_or(default_theta(S))) {
  if (S < 1) throw ConfigError("S must be >= 1");
  if (!(theta_ >= 0.0 && theta_ < 1.0)) throw ConfigError("gain.theta must lie in [0, 1)");
  if (!(cfg_.epsilon > 0.0)) throw ConfigError("gain.epsilon must be positive");
  if (cfg_.variant == GainVariant::separated && S == 1)
    throw CapabilityError("separated gain estimator is undefined at S = 1");
}

void GainEstimator::set_scale(int S) {
  if (S < 1) throw ConfigError("S must be >= 1");
  if (cfg_.variant == GainVariant::separated && S == 1)
    throw CapabilityError("separated gain estimator is undefined at S = 1");
  S_ = S;
  if (!cfg_.theta) theta_ = default_theta(S);
}

void GainEstimator::absorb(double a, double b) {
  // Plain running mean while fewer than 1/(1 - theta) samples have been seen.
  const double horizon = 1.0 / (1.0 - theta_);
  if (static_cast<double>(count_) < horizon) {
    const double n = static_cast<double>(count_ + 1);
    a_bar_ += (a - a_bar_) / n;
    b_bar_ += (b - b_bar_) / n;
  } else {
    a_bar_ = theta_ * a_bar_ + (1.0 - theta_) * a;
    b_bar_ = theta_ * b_bar_ + (1.0 - theta_) * b;
  }
  ++count_;
}

double GainEstimator::clamp_gain(double r) const {
  if (std::isnan(r)) return 1.0;
  return std::clamp(r, 1.0, static_cast<double>(S_));
}

double GainEstimator::recommended_estimate() const {
  if (count_ == 0) return 1.0;
  return clamp_gain((a_bar_ + cfg_.epsilon) / (b_bar_ + cfg_.epsilon));
}

double GainEstimator::separated_estimate() const {
  if (count_ == 0) return 1.0;
  const double S = static_cast<double>(S_);
  return clamp_gain((a_bar_ + b_bar_) / (a_bar_ / S + b_bar_));
}

double GainEstimator::update_recommended(const GainSample& s) {
  if (cfg_.variant != GainVariant::recommended)
    throw ConfigError("estimator is not configured for the recommended variant");
  if (cfg_.exclude_current) {
    last_ = recommended_estimate();
    absorb(s.mean_sq_norm, s.agg_sq_norm);
  } else {
    absorb(s.mean_sq_norm, s.agg_sq_norm);
    last_ = recommended_estimate();
  }
  return last_;
}

double GainEstimator::update_separated(const GainSample& s) {
  if (cfg_.variant != GainVariant::separated)
    throw ConfigError("estimator is not configured for the separated variant");
  if (s.S < 2) throw CapabilityError("separated gain estimator is undefined at S = 1");
  const double S = static_cast<double>(s.S);
  double sigma_sq = S / (S - 1.0) * (s.mean_sq_norm - s.agg_sq_norm);
  double mu_sq = s.agg_sq_norm - sigma_sq / S;
  sigma_sq = std::max(sigma_sq, cfg_.epsilon);
  mu_sq = std::max(mu_sq, 0.0);

  if (count_ == 0) {
    absorb(sigma_sq, mu_sq);
    last_ = 1.0;  // r_0 = 1
  } else if (cfg_.exclude_current) {
    last_ = separated_estimate();
    absorb(sigma_sq, mu_sq);
  } else {
    absorb(sigma_sq, mu_sq);
    last_ = separated_estimate();
  }
  return last_;
}

double GainEstimator::update(const GainSample& s) {
  return cfg_.variant == GainVariant::recommended ? update_recommended(s) : update_separated(s);
}

double gain_from_moments(double sigma_sq, double mu_sq, int S) {
  if (S < 1) throw ConfigError("S must be >= 1");
  const double den = sigma_sq / static_cast<double>(S) + mu_sq;
  if (!(den > 0.0)) return 1.0;
  return std::clamp((sigma_sq + mu_sq) / den, 1.0, static_cast<double>(S));
}

double analytic_gain(const StochasticObjective& obj, const ParamVector& w, int S) {
  const GradientMoments m = obj.analytic_moments(w);
  return gain_from_moments(m.sigma_sq, m.mu_sq, S);
}

double oracle_gain(const StochasticObjective& obj, const ParamVector& w, int S,
                   std::size_t n_batches, const RngStream& rng) {
  if (n_batches < 2) throw ConfigError("oracle_gain needs n_batches >= 2");
  if (S < 1) throw ConfigError("S must be >= 1");
  const std::size_t d = obj.dim();
  std::vector<ParamVector> grads;
  grads.reserve(n_batches);
  ParamVector mean(d);
  for (std::size_t j = 0; j < n_batches; ++j) {
    RngStream sub = rng.substream(j);
    const Batch b = obj.sample_batch(sub, 1);
    grads.push_back(obj.stochastic_gradient(w, b));
    kernels::add(grads.back().span(), mean.span());
  }
  const double n = static_cast<double>(n_batches);
  kernels::scale(1.0 / n, mean.span());

  double ss = 0.0;
  ParamVector diff(d);
  for (const auto& g : grads) {
    kernels::sub(g.span(), mean.span(), diff.span());
    ss += kernels::sq_norm(diff.span());
  }
  const double sigma_sq = ss / (n - 1.0);
  const double mu_sq = std::max(kernels::sq_norm(mean.span()) - sigma_sq / n, 0.0);
  return gain_from_moments(sigma_sq, mu_sq, S);
}

std::string_view to_string(GainVariant v) {
  return v == GainVariant::recommended ? "recommended" : "separated";
}

GainVariant parse_gain_variant(std::string_view s) {
  if (s == "recommended") return GainVariant::recommended;
  if (s == "separated") return GainVariant::separated;
  throw ConfigError("unknown gain variant '" + std::string(s) + "'");
}

}  // namespace adascale
