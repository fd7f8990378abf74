#include "adascale/engine.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "adascale/errors.hpp"
#include "adascale/kernels/kernels.hpp"

namespace adascale {

void TrainConfig::validate() const {
  if (S < 1) throw ConfigError("run.S must be >= 1");
  schedule.validate();
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("run.rho must lie in [0, 1)");
  if (T && T_SI) throw ConfigError("set exactly one of run.T and run.T_SI, not both");
  if (algorithm == Algorithm::scaled_sgd) {
    if (!T) throw ConfigError("scaled_sgd needs run.T");
    if (*T < 1) throw ConfigError("run.T must be >= 1");
    if (!elastic.empty()) throw ConfigError("elastic scaling requires the adascale algorithm");
  } else {
    if (!T_SI) throw ConfigError("adascale needs run.T_SI");
    if (*T_SI < 1) throw ConfigError("run.T_SI must be >= 1");
  }
  for (std::size_t i = 0; i < elastic.size(); ++i) {
    if (elastic[i].S < 1) throw ConfigError("elastic scales must be >= 1");
    if (i > 0 && !(elastic[i].start_tau > elastic[i - 1].start_tau))
      throw ConfigError("elastic stages must be sorted by strictly increasing start_tau");
  }
  if (gain.theta && !(*gain.theta >= 0.0 && *gain.theta < 1.0))
    throw ConfigError("gain.theta must lie in [0, 1)");
  if (!(gain.epsilon > 0.0)) throw ConfigError("gain.epsilon must be positive");
}

int TrainConfig::max_scale() const {
  int m = S;
  for (const auto& e : elastic) m = std::max(m, e.S);
  return m;
}

RngStream iteration_stream(std::uint64_t seed, std::int64_t t) {
  return RngStream(seed, static_cast<std::uint64_t>(t), 0);
}

void compute_gradient(const ParamVector& w, int S, const StochasticObjective& obj,
                      const RngStream& rng, GradientBundle& out, ThreadPool* workers) {
  if (S < 1) throw ConfigError("S must be >= 1");
  const std::size_t n = static_cast<std::size_t>(S);
  out.per_worker.resize(n);
  auto one = [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    const Batch b = obj.sample_batch(stream, static_cast<int>(i) + 1);
    obj.stochastic_gradient(w, b, out.per_worker[i]);
  };
  if (workers && workers->size() > 1 && n > 1) {
    workers->parallel_for(n, one);
  } else {
    for (std::size_t i = 0; i < n; ++i) one(i);
  }
  // Fixed-order pairwise tree, independent of thread scheduling.
  out.scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.scratch[i] = out.per_worker[i];
  for (std::size_t stride = 1; stride < n; stride *= 2)
    for (std::size_t i = 0; i + stride < n; i += 2 * stride)
      kernels::add(out.scratch[i + stride].span(), out.scratch[i].span());
  out.mean = out.scratch[0];
  if (n > 1) kernels::scale(1.0 / static_cast<double>(n), out.mean.span());
}

GradientBundle compute_gradient(const ParamVector& w, int S, const StochasticObjective& obj,
                                const RngStream& rng, ThreadPool* workers) {
  GradientBundle b;
  compute_gradient(w, S, obj, rng, b, workers);
  return b;
}

void apply_update(ParamVector& w, ParamVector& velocity, double rho, double eta,
                  const ParamVector& grad) {
  if (rho == 0.0) {
    kernels::axpy(-eta, grad.span(), w.span());
    return;
  }
  if (velocity.dim() != w.dim()) velocity = ParamVector(w.dim());
  kernels::scale_add(rho, grad.span(), velocity.span());
  kernels::axpy(-eta, velocity.span(), w.span());
}

namespace {

bool bundle_finite(const GradientBundle& b) {
  if (!b.mean.all_finite()) return false;
  for (const auto& g : b.per_worker)
    if (!g.all_finite()) return false;
  return true;
}

bool objective_ok(double F) { return std::isfinite(F) && F <= kDivergenceThreshold; }

int active_scale(const TrainConfig& cfg, double tau) {
  int S = cfg.S;
  for (const auto& e : cfg.elastic)
    if (e.start_tau <= tau) S = e.S;
  return S;
}

// Shared tail of both loops. Returns false when the run must stop.
struct Stepper {
  const StochasticObjective& obj;
  const TrainConfig& cfg;
  const RunOptions& opts;
  Trace& trace;
  ParamVector w;
  ParamVector velocity;
  GradientBundle bundle;

  bool step(std::int64_t t, double tau, int S, double r, double eta, const GainSample& sample) {
    const double F = obj.value(w);
    if (opts.record_trace)
      trace.rows.push_back({t, tau, S, r, eta, F, sample.mean_sq_norm, sample.agg_sq_norm});
    if (!objective_ok(F) || !bundle_finite(bundle) || !std::isfinite(eta)) {
      trace.diverged = true;
      return false;
    }
    if (opts.observer) opts.observer(IterationView{t, tau, S, r, eta, w, bundle});
    apply_update(w, velocity, cfg.rho, eta, bundle.mean);
    if (!w.all_finite()) {
      trace.diverged = true;
      return false;
    }
    return true;
  }

  void finish(std::int64_t iterations, double tau) {
    trace.iterations = iterations;
    trace.final_tau = tau;
    trace.final_F = obj.value(w);
    if (!objective_ok(trace.final_F)) trace.diverged = true;
    trace.final_w = std::move(w);
  }
};

}  // namespace

Trace run_scaled_sgd(const StochasticObjective& obj, const TrainConfig& cfg,
                     const RunOptions& opts) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::scaled_sgd)
    throw ConfigError("run_scaled_sgd needs run.algorithm = scaled_sgd");
  const AppliedSchedule sched = apply_rule(
      ScaledSchedule{cfg.schedule, cfg.rule, cfg.S, *cfg.T, cfg.warmup_fraction, cfg.T_target});

  Trace trace;
  trace.seed = cfg.seed;
  trace.max_S = cfg.S;
  Stepper st{obj, cfg, opts, trace, obj.initial_point(), ParamVector(obj.dim()), {}};
  if (st.w.dim() != obj.dim()) throw ConfigError("initial point has the wrong dimension");
  if (opts.record_trace) trace.rows.reserve(static_cast<std::size_t>(sched.iterations()));

  std::int64_t t = 0;
  for (; t < sched.iterations(); ++t) {
    compute_gradient(st.w, cfg.S, obj, iteration_stream(cfg.seed, t), st.bundle, opts.workers);
    const GainSample sample = gain_sample(st.bundle.per_worker, st.bundle.mean);
    const bool ok = st.step(t, static_cast<double>(t), cfg.S, sched.effective_gain(t), sched.lr(t),
                            sample);
    if (!ok) {
      ++t;
      break;
    }
  }
  st.finish(t, static_cast<double>(t));
  return trace;
}

Trace run_adascale(const StochasticObjective& obj, const TrainConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::adascale)
    throw ConfigError("run_adascale needs run.algorithm = adascale");
  const auto T_SI = static_cast<double>(*cfg.T_SI);

  Trace trace;
  trace.seed = cfg.seed;
  trace.max_S = cfg.max_scale();
  trace.T_SI = cfg.T_SI;
  Stepper st{obj, cfg, opts, trace, obj.initial_point(), ParamVector(obj.dim()), {}};
  if (st.w.dim() != obj.dim()) throw ConfigError("initial point has the wrong dimension");

  double tau = 0.0;
  int S = active_scale(cfg, tau);
  GainEstimator gain(cfg.gain, S);
  std::int64_t t = 0;
  while (tau < T_SI) {
    const int S_t = active_scale(cfg, tau);
    if (S_t != gain.scale()) gain.set_scale(S_t);
    compute_gradient(st.w, S_t, obj, iteration_stream(cfg.seed, t), st.bundle, opts.workers);
    const GainSample sample = gain_sample(st.bundle.per_worker, st.bundle.mean);
    const double r = gain.update(sample);
    const double eta = r * lr_eval(cfg.schedule, static_cast<std::int64_t>(std::floor(tau)));
    const bool ok = st.step(t, tau, S_t, r, eta, sample);
    tau += r;
    ++t;
    if (!ok) break;
  }
  st.finish(t, tau);
  return trace;
}

Trace run_elastic(const StochasticObjective& obj, const TrainConfig& cfg, const RunOptions& opts) {
  if (cfg.elastic.empty()) throw ConfigError("run_elastic needs a non-empty elastic schedule");
  return run_adascale(obj, cfg, opts);
}

Trace run(const StochasticObjective& obj, const TrainConfig& cfg, const RunOptions& opts) {
  return cfg.algorithm == Algorithm::adascale ? run_adascale(obj, cfg, opts)
                                              : run_scaled_sgd(obj, cfg, opts);
}

Trace run(const TrainConfig& cfg, const RunOptions& opts) {
  const auto obj = make_objective(cfg.objective);
  return run(*obj, cfg, opts);
}

void write_trace_csv(std::ostream& os, const Trace& trace, bool with_seed_comment) {
  if (with_seed_comment) os << "# seed=" << trace.seed << '\n';
  os << kTraceCsvHeader << '\n';
  for (const auto& r : trace.rows) {
    os << fmt::format("{},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.tau, r.S,
                      r.r, r.eta, r.F, r.grad_mean_sq, r.grad_agg_sq);
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& is) {
  std::vector<TraceRecord> rows;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kTraceCsvHeader) throw ConfigError("unexpected trace header: " + line);
      header = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    TraceRecord r;
    std::string F;  // may be inf/nan
    if (!(fields >> r.t >> r.tau >> r.S >> r.r >> r.eta >> F >> r.grad_mean_sq >> r.grad_agg_sq))
      throw ConfigError("malformed trace row");
    r.F = std::stod(F);
    rows.push_back(r);
  }
  return rows;
}

std::string_view to_string(Algorithm a) {
  return a == Algorithm::adascale ? "adascale" : "scaled_sgd";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "adascale") return Algorithm::adascale;
  if (s == "scaled_sgd") return Algorithm::scaled_sgd;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

}  // namespace adascale
