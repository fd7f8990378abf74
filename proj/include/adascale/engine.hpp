#pragma once

// Training loops over a simulated S-worker data-parallel harness:
// scaled SGD under a fixed scaling rule, and AdaScale SGD with
// scale-invariant iteration accounting and optional elastic scale changes.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "adascale/gain.hpp"
#include "adascale/objectives.hpp"
#include "adascale/parallel.hpp"
#include "adascale/schedules.hpp"

namespace adascale {

enum class Algorithm { scaled_sgd, adascale };

/// From scale-invariant iteration `start_tau` onward, train at scale S.
struct ElasticStage {
  double start_tau = 0.0;
  int S = 1;
  friend bool operator==(const ElasticStage&, const ElasticStage&) = default;
};

struct TrainConfig {
  ObjectiveSpec objective;
  LrSchedule schedule;
  Algorithm algorithm = Algorithm::adascale;
  ScalingRule rule = ScalingRule::identity;  ///< scaled_sgd only
  int S = 1;
  std::vector<ElasticStage> elastic;  ///< adascale only; empty means fixed S
  std::optional<std::int64_t> T;      ///< scaled_sgd: single-batch horizon T_1
  std::optional<std::int64_t> T_SI;   ///< adascale: scale-invariant budget
  double rho = 0.0;                   ///< heavy-ball momentum
  GainConfig gain;
  double warmup_fraction = 0.055;
  std::int64_t T_target = 0;  ///< lsw_plus only
  std::uint64_t seed = 1;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
  /// Largest scale used by the run.
  int max_scale() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct GradientBundle {
  std::vector<ParamVector> per_worker;
  ParamVector mean;  ///< (1/S) sum of per_worker, pairwise tree in worker order
  std::vector<ParamVector> scratch;
};

struct TraceRecord {
  std::int64_t t = 0;
  double tau = 0.0;  ///< scale-invariant iteration at the start of t
  int S = 1;
  double r = 1.0;
  double eta = 0.0;
  double F = 0.0;  ///< objective at w_t
  double grad_mean_sq = 0.0;
  double grad_agg_sq = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::vector<TraceRecord> rows;
  ParamVector final_w;
  double final_F = 0.0;
  std::int64_t iterations = 0;
  double final_tau = 0.0;
  bool diverged = false;
  std::uint64_t seed = 0;
  int max_S = 1;
  std::optional<std::int64_t> T_SI;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Read-only view handed to observers before the parameter step of iteration t.
struct IterationView {
  std::int64_t t;
  double tau;
  int S;
  double r;
  double eta;
  const ParamVector& w;
  const GradientBundle& grads;
};

struct RunOptions {
  bool record_trace = true;
  /// Computes worker gradients in parallel when set. Results do not depend on it.
  ThreadPool* workers = nullptr;
  std::function<void(const IterationView&)> observer;
};

/// Objective above which a run is declared diverged.
inline constexpr double kDivergenceThreshold = 1e12;

/// Random stream of iteration t; worker i uses .substream(i).
RngStream iteration_stream(std::uint64_t seed, std::int64_t t);

/// Samples S batches from `rng` and fills per-worker gradients and their mean.
void compute_gradient(const ParamVector& w, int S, const StochasticObjective& obj,
                      const RngStream& rng, GradientBundle& out, ThreadPool* workers = nullptr);
GradientBundle compute_gradient(const ParamVector& w, int S, const StochasticObjective& obj,
                                const RngStream& rng, ThreadPool* workers = nullptr);

/// w <- w - eta * g when rho == 0; otherwise v <- rho v + g, w <- w - eta v.
void apply_update(ParamVector& w, ParamVector& velocity, double rho, double eta,
                  const ParamVector& grad);

Trace run_scaled_sgd(const StochasticObjective& obj, const TrainConfig& cfg,
                     const RunOptions& opts = {});
Trace run_adascale(const StochasticObjective& obj, const TrainConfig& cfg,
                   const RunOptions& opts = {});
/// AdaScale with a non-empty elastic schedule.
Trace run_elastic(const StochasticObjective& obj, const TrainConfig& cfg,
                  const RunOptions& opts = {});
/// Dispatches on cfg.algorithm.
Trace run(const StochasticObjective& obj, const TrainConfig& cfg, const RunOptions& opts = {});
/// Builds the objective from cfg.objective first.
Trace run(const TrainConfig& cfg, const RunOptions& opts = {});

inline constexpr std::string_view kTraceCsvHeader = "t,tau,S,r,eta,F,grad_mean_sq,grad_agg_sq";

/// One row per iteration, 17 significant digits. With `with_seed_comment`,
/// a "# seed=<n>" line precedes the column header.
void write_trace_csv(std::ostream& os, const Trace& trace, bool with_seed_comment = true);
std::vector<TraceRecord> read_trace_csv(std::istream& is);

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

}  // namespace adascale
