#include "adascale/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adascale/errors.hpp"

namespace adascale {

void LrSchedule::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw ConfigError("schedule.eta0 must be positive");
  if (family != LrFamily::constant && !(d > 0.0 && d <= 1.0))
    throw ConfigError("schedule.d must lie in (0, 1]");
  if (family == LrFamily::exponential_decay && T_S1 < 1)
    throw ConfigError("schedule.T_S1 must be positive");
  for (std::size_t i = 1; i < milestones.size(); ++i)
    if (milestones[i] <= milestones[i - 1])
      throw ConfigError("schedule.milestones must be strictly increasing");
}

double LrSchedule::at(double t) const {
  switch (family) {
    case LrFamily::constant: return eta0;
    case LrFamily::exponential_decay: return eta0 * std::pow(d, t / static_cast<double>(T_S1));
    case LrFamily::step_decay: {
      int passed = 0;
      for (auto m : milestones)
        if (t > static_cast<double>(m)) ++passed;
      return eta0 * std::pow(d, passed);
    }
  }
  return eta0;
}

double lr_eval(const LrSchedule& s, std::int64_t t) {
  if (t < 0) throw ConfigError("lr_eval needs t >= 0");
  return s.at(static_cast<double>(t));
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t ceil_fraction(double fraction, std::int64_t n) {
  const double x = fraction * static_cast<double>(n);
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

AppliedSchedule::AppliedSchedule(ScaledSchedule sch) : sch_(std::move(sch)) {
  sch_.base.validate();
  if (sch_.S < 1) throw ConfigError("S must be >= 1");
  if (sch_.T_1 < 1) throw ConfigError("T_1 must be >= 1");
  if (!(sch_.warmup_fraction >= 0.0 && sch_.warmup_fraction < 1.0))
    throw ConfigError("warmup_fraction must lie in [0, 1)");

  switch (sch_.rule) {
    case ScalingRule::identity: iterations_ = sch_.T_1; break;
    case ScalingRule::linear: iterations_ = ceil_div(sch_.T_1, sch_.S); break;
    case ScalingRule::lsw:
    case ScalingRule::lsw_plus:
      lsw_iterations_ = ceil_div(sch_.T_1, sch_.S);
      warmup_ = ceil_fraction(sch_.warmup_fraction, lsw_iterations_);
      iterations_ = lsw_iterations_;
      if (sch_.rule == ScalingRule::lsw_plus) {
        if (sch_.T_target < lsw_iterations_)
          throw ConfigError("lsw_plus needs T_target >= ceil(T_1 / S) = " +
                            std::to_string(lsw_iterations_));
        if (sch_.T_target > sch_.T_1) throw ConfigError("lsw_plus needs T_target <= T_1");
        iterations_ = sch_.T_target;
      }
      break;
  }
}

std::int64_t AppliedSchedule::stretch(std::int64_t t) const {
  if (sch_.rule != ScalingRule::lsw_plus) return t;
  // floor(t * T_lsw / T_target) in exact integer arithmetic
  return static_cast<std::int64_t>((static_cast<__int128>(t) * lsw_iterations_) / sch_.T_target);
}

double AppliedSchedule::lsw_gain(std::int64_t t) const {
  if (t < warmup_) {
    return 1.0 + static_cast<double>(sch_.S - 1) * static_cast<double>(t) /
                     static_cast<double>(warmup_);
  }
  return static_cast<double>(sch_.S);
}

double AppliedSchedule::lsw_lr(std::int64_t t) const {
  const LrSchedule& base = sch_.base;
  const double S = static_cast<double>(sch_.S);
  if (t < warmup_) return lsw_gain(t) * base.at(0.0);
  if (base.family != LrFamily::exponential_decay) {
    // The first W_S post-warm-up iterations of the linearly scaled schedule
    // are dropped, so global t lines up with the scaled schedule's own t.
    return S * base.at(S * static_cast<double>(t));
  }
  // Exponential: traverse the rest of the single-batch horizon uniformly,
  // from S * W_S at the end of warm-up to T_1 at T_S.
  const double W = static_cast<double>(warmup_);
  const double TS = static_cast<double>(lsw_iterations_);
  const double T1 = static_cast<double>(sch_.T_1);
  double mapped = S * W;
  if (lsw_iterations_ > warmup_) mapped += (static_cast<double>(t) - W) * (T1 - S * W) / (TS - W);
  return S * base.at(mapped);
}

double AppliedSchedule::lr(std::int64_t t) const {
  if (t < 0) throw ConfigError("lr needs t >= 0");
  const double S = static_cast<double>(sch_.S);
  switch (sch_.rule) {
    case ScalingRule::identity: return sch_.base.at(static_cast<double>(t));
    case ScalingRule::linear: return S * sch_.base.at(S * static_cast<double>(t));
    case ScalingRule::lsw:
    case ScalingRule::lsw_plus: return lsw_lr(stretch(t));
  }
  return sch_.base.eta0;
}

double AppliedSchedule::effective_gain(std::int64_t t) const {
  switch (sch_.rule) {
    case ScalingRule::identity: return 1.0;
    case ScalingRule::linear: return static_cast<double>(sch_.S);
    case ScalingRule::lsw:
    case ScalingRule::lsw_plus: return lsw_gain(stretch(t));
  }
  return 1.0;
}

AppliedSchedule apply_rule(const ScaledSchedule& sch) { return AppliedSchedule(sch); }

std::string_view to_string(LrFamily f) {
  switch (f) {
    case LrFamily::constant: return "constant";
    case LrFamily::exponential_decay: return "exponential_decay";
    case LrFamily::step_decay: return "step_decay";
  }
  return "constant";
}

std::string_view to_string(ScalingRule r) {
  switch (r) {
    case ScalingRule::identity: return "identity";
    case ScalingRule::linear: return "linear";
    case ScalingRule::lsw: return "lsw";
    case ScalingRule::lsw_plus: return "lsw_plus";
  }
  return "identity";
}

LrFamily parse_family(std::string_view s) {
  if (s == "constant") return LrFamily::constant;
  if (s == "exponential_decay" || s == "exponential") return LrFamily::exponential_decay;
  if (s == "step_decay" || s == "step") return LrFamily::step_decay;
  throw ConfigError("unknown schedule family '" + std::string(s) + "'");
}

ScalingRule parse_rule(std::string_view s) {
  if (s == "identity") return ScalingRule::identity;
  if (s == "linear") return ScalingRule::linear;
  if (s == "lsw") return ScalingRule::lsw;
  if (s == "lsw_plus") return ScalingRule::lsw_plus;
  throw ConfigError("unknown scaling rule '" + std::string(s) + "'");
}

}  // namespace adascale
