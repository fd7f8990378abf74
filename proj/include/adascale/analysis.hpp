#pragma once

// Convergence bounds for constant learning rates under the PL condition
// (alpha), beta-smoothness and bounded gradient variance (V), plus the
// Monte-Carlo harnesses that check them against simulated training.
//
//   gamma = eta * alpha * (2 - eta * beta)
//   Delta = eta^2 * beta * V / (2 * gamma)
//   xi(S) = (2 - eta * beta) / (2 - S * eta * beta)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adascale/engine.hpp"
#include "adascale/parallel.hpp"
#include "adascale/stats.hpp"

namespace adascale {

struct TheoryParams {
  double alpha = 1.0;
  double beta = 1.0;
  double V = 0.0;
  double eta = 0.1;

  /// Throws DomainError unless 0 < alpha <= beta, V >= 0 and 0 < eta < 2 / beta.
  void validate() const;
  double gamma() const;
  double delta() const;
  /// Throws DomainError at or beyond the asymptote S = 2 / (eta * beta).
  double xi(double S) const;
};

/// Single-batch SGD: (1 - gamma)^T * F0_gap + Delta.
double bound_single_batch(const TheoryParams& p, double F0_gap, std::int64_t T);

struct AdaScaleBound {
  double product_bound = 0.0;  ///< F0_gap * prod_t (1 - r_t gamma) + Delta
  double rbar_bound = 0.0;     ///< (1 - gamma)^(sum_t r_t) * F0_gap + Delta
};

/// Throws DomainError if any gain is below 1 or gain * gamma >= 1.
AdaScaleBound bound_adascale(const TheoryParams& p, double F0_gap, std::span<const double> gains);
/// As above, additionally requiring S * gamma <= 1 and every gain <= S.
AdaScaleBound bound_adascale(const TheoryParams& p, double F0_gap, std::span<const double> gains,
                             int S);

/// Product bound after each prefix: element t uses gains[0..t).
std::vector<double> product_bound_curve(const TheoryParams& p, double F0_gap,
                                        std::span<const double> gains);

/// Linear scaling with lr = S * eta: (1 - gamma/xi(S))^(S T) * F0_gap + xi(S) * Delta.
double bound_linear(const TheoryParams& p, double F0_gap, int S, std::int64_t T);

/// Runs seeds first_seed, first_seed + 1, ... concurrently; slot i holds seed first_seed + i.
std::vector<Trace> run_seeds(const StochasticObjective& obj, const TrainConfig& cfg,
                             std::size_t n_seeds, std::uint64_t first_seed, ThreadPool* pool,
                             bool record_trace = true);

struct BoundPoint {
  std::int64_t t = 0;
  SampleStats gap;  ///< F(w_t) - F* across seeds
  double bound = 0.0;
};

struct BoundReport {
  std::string bound_name;  ///< "single_batch", "adascale_product" or "linear"
  std::vector<BoundPoint> points;
  std::size_t n_seeds = 0;
  std::size_t diverged_seeds = 0;
  /// max over points of (mean + ci95 - bound); <= 0 means every point passes
  double worst_excess = 0.0;
  /// For AdaScale: the r-bar bound at the common final iteration.
  double rbar_bound = 0.0;
  std::vector<std::int64_t> seed_iterations;
  /// T_SI and largest scale of the runs when they are AdaScale runs.
  std::optional<std::int64_t> T_SI;
  int max_S = 1;
  bool pass = false;
};

/// Trains n_seeds runs with a constant learning rate equal to p.eta and
/// compares mean suboptimality (+ upper 95% CI) with the matching bound every
/// `log_every` iterations. AdaScale runs use the per-step product bound over the
/// per-iteration mean gains across seeds.
BoundReport verify_bound_empirically(const StochasticObjective& obj, const TrainConfig& cfg,
                                     const TheoryParams& p, std::size_t n_seeds,
                                     ThreadPool* pool = nullptr, std::int64_t log_every = 10,
                                     std::uint64_t first_seed = 1);

struct Prop2Point {
  double nu = 1.0;
  SampleStats F_single;  ///< F(w^(1)) over seeds
  SampleStats F_scaled;  ///< F(w^(S)) over seeds
  double gap = 0.0;      ///< mean difference
  double gap_ci95 = 0.0;
};

struct Prop2Report {
  std::vector<Prop2Point> points;
  bool non_increasing = false;
  bool final_contains_zero = false;
  bool pass = false;
};

/// Compares single-batch training (lr = eta/nu, T_1 = nu T) with linear
/// scaling at S under gradient noise nu * Sigma, for each nu in nu_list.
/// `base` must describe a noisy quadratic; its nu is overridden.
Prop2Report verify_prop2(const ObjectiveSpec& base, double eta, std::int64_t T, int S,
                         std::span<const int> nu_list, std::size_t n_seeds,
                         ThreadPool* pool = nullptr, std::uint64_t first_seed = 1);

enum class CurveAxis { tau, t };

/// Linearly interpolated F along `axis` at the grid points. The trace's final
/// point (final_tau or iterations, final_F) extends its range.
/// Throws DomainError if a grid point lies outside the trace.
std::vector<double> interpolate_curve(const Trace& trace, std::span<const double> grid,
                                      CurveAxis axis);
std::vector<double> mean_curve(std::span<const Trace> traces, std::span<const double> grid,
                               CurveAxis axis);
/// max over grid points of (max - min) across curves.
double max_spread(std::span<const std::vector<double>> curves);
double curve_alignment(std::span<const Trace> traces, std::span<const double> grid,
                       CurveAxis axis = CurveAxis::tau);
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

}  // namespace adascale
