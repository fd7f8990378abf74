#include "adascale/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adascale/errors.hpp"

namespace adascale {

void TheoryParams::validate() const {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(beta >= alpha)) throw DomainError("beta must be >= alpha");
  if (!(V >= 0.0)) throw DomainError("V must be non-negative");
  if (!(eta > 0.0 && eta * beta < 2.0)) throw DomainError("need 0 < eta < 2 / beta");
}

double TheoryParams::gamma() const { return eta * alpha * (2.0 - eta * beta); }

double TheoryParams::delta() const { return eta * eta * beta * V / (2.0 * gamma()); }

double TheoryParams::xi(double S) const {
  const double den = 2.0 - S * eta * beta;
  if (!(den > 0.0)) throw DomainError("S is at or beyond the asymptote 2 / (eta * beta)");
  return (2.0 - eta * beta) / den;
}

double bound_single_batch(const TheoryParams& p, double F0_gap, std::int64_t T) {
  p.validate();
  if (T < 0) throw DomainError("T must be non-negative");
  return std::pow(1.0 - p.gamma(), static_cast<double>(T)) * F0_gap + p.delta();
}

AdaScaleBound bound_adascale(const TheoryParams& p, double F0_gap, std::span<const double> gains) {
  p.validate();
  const double g = p.gamma();
  double product = 1.0;
  double total = 0.0;
  for (double r : gains) {
    if (!(r >= 1.0)) throw DomainError("gains must be >= 1");
    if (!(r * g < 1.0)) throw DomainError("gain * gamma must stay below 1");
    product *= 1.0 - r * g;
    total += r;
  }
  return {F0_gap * product + p.delta(), std::pow(1.0 - g, total) * F0_gap + p.delta()};
}

AdaScaleBound bound_adascale(const TheoryParams& p, double F0_gap, std::span<const double> gains,
                             int S) {
  p.validate();
  if (S < 1) throw DomainError("S must be >= 1");
  if (static_cast<double>(S) * p.gamma() > 1.0) throw DomainError("need S <= 1 / gamma");
  for (double r : gains)
    if (r > static_cast<double>(S)) throw DomainError("gains must not exceed S");
  return bound_adascale(p, F0_gap, gains);
}

std::vector<double> product_bound_curve(const TheoryParams& p, double F0_gap,
                                        std::span<const double> gains) {
  bound_adascale(p, F0_gap, gains);  // domain checks
  const double g = p.gamma();
  const double delta = p.delta();
  std::vector<double> curve;
  curve.reserve(gains.size() + 1);
  double product = 1.0;
  curve.push_back(F0_gap + delta);
  for (double r : gains) {
    product *= 1.0 - r * g;
    curve.push_back(F0_gap * product + delta);
  }
  return curve;
}

double bound_linear(const TheoryParams& p, double F0_gap, int S, std::int64_t T) {
  p.validate();
  if (S < 1) throw DomainError("S must be >= 1");
  if (T < 0) throw DomainError("T must be non-negative");
  const double xi = p.xi(static_cast<double>(S));
  return std::pow(1.0 - p.gamma() / xi, static_cast<double>(S) * static_cast<double>(T)) * F0_gap +
         xi * p.delta();
}

std::vector<Trace> run_seeds(const StochasticObjective& obj, const TrainConfig& cfg,
                             std::size_t n_seeds, std::uint64_t first_seed, ThreadPool* pool,
                             bool record_trace) {
  cfg.validate();
  std::vector<Trace> out(n_seeds);
  auto one = [&](std::size_t i) {
    TrainConfig c = cfg;
    c.seed = first_seed + i;
    RunOptions opts;
    opts.record_trace = record_trace;
    out[i] = run(obj, c, opts);
  };
  if (pool) {
    pool->parallel_for(n_seeds, one);
  } else {
    for (std::size_t i = 0; i < n_seeds; ++i) one(i);
  }
  return out;
}

namespace {

double optimum_of(const StochasticObjective& obj) {
  if (auto f = obj.optimum_value()) return *f;
  throw CapabilityError("bound checks need an objective with a closed-form optimum");
}

}  // namespace

BoundReport verify_bound_empirically(const StochasticObjective& obj, const TrainConfig& cfg,
                                     const TheoryParams& p, std::size_t n_seeds, ThreadPool* pool,
                                     std::int64_t log_every, std::uint64_t first_seed) {
  p.validate();
  if (n_seeds == 0) throw ConfigError("need at least one seed");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (cfg.schedule.family != LrFamily::constant || cfg.schedule.eta0 != p.eta)
    throw ConfigError("bound checks need a constant schedule with eta0 = eta");
  if (cfg.rho != 0.0) throw ConfigError("bound checks assume plain SGD (rho = 0)");

  BoundReport rep;
  rep.n_seeds = n_seeds;
  const double f_star = optimum_of(obj);
  const double gap0 = obj.value(obj.initial_point()) - f_star;

  const std::vector<Trace> traces = run_seeds(obj, cfg, n_seeds, first_seed, pool);
  std::size_t common = std::numeric_limits<std::size_t>::max();
  rep.T_SI = cfg.algorithm == Algorithm::adascale ? cfg.T_SI : std::nullopt;
  rep.max_S = cfg.max_scale();
  for (const auto& tr : traces) {
    rep.seed_iterations.push_back(tr.iterations);
    if (tr.diverged) ++rep.diverged_seeds;
    common = std::min(common, tr.rows.size());
  }

  std::vector<double> curve;
  if (cfg.algorithm == Algorithm::adascale) {
    rep.bound_name = "adascale_product";
    std::vector<double> mean_gains(common);
    std::vector<double> column(n_seeds);
    for (std::size_t t = 0; t < common; ++t) {
      for (std::size_t s = 0; s < n_seeds; ++s) column[s] = traces[s].rows[t].r;
      mean_gains[t] = summarize(column).mean;
    }
    const int S = cfg.max_scale();
    rep.rbar_bound = bound_adascale(p, gap0, mean_gains, S).rbar_bound;
    curve = product_bound_curve(p, gap0, mean_gains);
  } else if (cfg.rule == ScalingRule::identity) {
    rep.bound_name = "single_batch";
    for (std::size_t t = 0; t <= common; ++t)
      curve.push_back(bound_single_batch(p, gap0, static_cast<std::int64_t>(t)));
  } else if (cfg.rule == ScalingRule::linear) {
    rep.bound_name = "linear";
    for (std::size_t t = 0; t <= common; ++t)
      curve.push_back(bound_linear(p, gap0, cfg.S, static_cast<std::int64_t>(t)));
  } else {
    throw ConfigError("bound checks support adascale, identity and linear rules");
  }

  rep.worst_excess = -std::numeric_limits<double>::infinity();
  std::vector<double> column(n_seeds);
  for (std::size_t t = 0; t < common; t += static_cast<std::size_t>(log_every)) {
    for (std::size_t s = 0; s < n_seeds; ++s) column[s] = traces[s].rows[t].F - f_star;
    BoundPoint pt{static_cast<std::int64_t>(t), summarize(column), curve[t]};
    // Rounding slack so exact geometric decay (V = 0) compares equal.
    const double slack = 1e-12 * std::abs(pt.bound);
    rep.worst_excess = std::max(rep.worst_excess, pt.gap.mean + pt.gap.ci95 - pt.bound - slack);
    rep.points.push_back(pt);
  }
  rep.pass = rep.diverged_seeds == 0 && !rep.points.empty() && rep.worst_excess <= 0.0;
  return rep;
}

Prop2Report verify_prop2(const ObjectiveSpec& base, double eta, std::int64_t T, int S,
                         std::span<const int> nu_list, std::size_t n_seeds, ThreadPool* pool,
                         std::uint64_t first_seed) {
  if (base.kind != "noisy_quadratic") throw ConfigError("verify_prop2 needs a noisy quadratic");
  if (nu_list.empty()) throw ConfigError("nu_list must not be empty");
  if (n_seeds < 2) throw ConfigError("verify_prop2 needs at least two seeds");

  Prop2Report rep;
  for (int nu : nu_list) {
    if (nu < 1) throw DomainError("nu must be a positive integer");
    ObjectiveSpec spec = base;
    spec.nu = static_cast<double>(nu);
    const auto obj = make_objective(spec);
    const auto& quad = dynamic_cast<const NoisyQuadratic&>(*obj);
    const double lr = eta / static_cast<double>(nu);
    if (!(lr * quad.beta() < 2.0)) throw DomainError("eta / nu must stay below 2 / beta");

    TrainConfig single;
    single.objective = spec;
    single.algorithm = Algorithm::scaled_sgd;
    single.rule = ScalingRule::identity;
    single.S = 1;
    single.schedule = LrSchedule{LrFamily::constant, lr, 1.0, {}, 1};
    single.T = static_cast<std::int64_t>(nu) * T;
    TrainConfig scaled = single;
    scaled.rule = ScalingRule::linear;
    scaled.S = S;

    auto finals = [&](const TrainConfig& c) {
      const auto traces = run_seeds(*obj, c, n_seeds, first_seed, pool, false);
      std::vector<double> f;
      f.reserve(n_seeds);
      for (const auto& tr : traces) f.push_back(tr.final_F);
      return summarize(f);
    };
    Prop2Point pt;
    pt.nu = static_cast<double>(nu);
    pt.F_single = finals(single);
    pt.F_scaled = S == 1 ? pt.F_single : finals(scaled);
    pt.gap = pt.F_scaled.mean - pt.F_single.mean;
    pt.gap_ci95 = std::hypot(pt.F_single.ci95, pt.F_scaled.ci95);
    if (S == 1) pt.gap_ci95 = 0.0;
    rep.points.push_back(pt);
  }

  rep.non_increasing = true;
  for (std::size_t k = 1; k < rep.points.size(); ++k) {
    const auto& a = rep.points[k - 1];
    const auto& b = rep.points[k];
    if (std::abs(b.gap) - b.gap_ci95 > std::abs(a.gap) + a.gap_ci95) rep.non_increasing = false;
  }
  const auto& last = rep.points.back();
  rep.final_contains_zero = std::abs(last.gap) <= last.gap_ci95;
  rep.pass = rep.non_increasing && rep.final_contains_zero;
  return rep;
}

std::vector<double> interpolate_curve(const Trace& trace, std::span<const double> grid,
                                      CurveAxis axis) {
  std::vector<double> xs, fs;
  xs.reserve(trace.rows.size() + 1);
  fs.reserve(trace.rows.size() + 1);
  for (const auto& r : trace.rows) {
    xs.push_back(axis == CurveAxis::tau ? r.tau : static_cast<double>(r.t));
    fs.push_back(r.F);
  }
  const double x_end =
      axis == CurveAxis::tau ? trace.final_tau : static_cast<double>(trace.iterations);
  if (xs.empty() || x_end > xs.back()) {
    xs.push_back(x_end);
    fs.push_back(trace.final_F);
  }

  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    if (g < xs.front() || g > xs.back()) throw DomainError("grid point outside the trace's range");
    auto it = std::upper_bound(xs.begin(), xs.end(), g);
    if (it == xs.end()) {
      out.push_back(fs.back());
      continue;
    }
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double span = xs[hi] - xs[lo];
    const double w = span > 0.0 ? (g - xs[lo]) / span : 0.0;
    out.push_back(fs[lo] + w * (fs[hi] - fs[lo]));
  }
  return out;
}

std::vector<double> mean_curve(std::span<const Trace> traces, std::span<const double> grid,
                               CurveAxis axis) {
  if (traces.empty()) throw ConfigError("mean_curve needs at least one trace");
  std::vector<std::vector<double>> per(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) per[i] = interpolate_curve(traces[i], grid, axis);
  std::vector<double> out(grid.size());
  std::vector<double> column(traces.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < traces.size(); ++i) column[i] = per[i][g];
    out[g] = pairwise_sum(column) / static_cast<double>(column.size());
  }
  return out;
}

double max_spread(std::span<const std::vector<double>> curves) {
  if (curves.empty()) return 0.0;
  double worst = 0.0;
  for (std::size_t g = 0; g < curves.front().size(); ++g) {
    double lo = curves.front()[g], hi = lo;
    for (const auto& c : curves) {
      lo = std::min(lo, c[g]);
      hi = std::max(hi, c[g]);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

double curve_alignment(std::span<const Trace> traces, std::span<const double> grid,
                       CurveAxis axis) {
  std::vector<std::vector<double>> curves;
  for (const auto& tr : traces) curves.push_back(interpolate_curve(tr, grid, axis));
  return max_spread(curves);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

}  // namespace adascale
