#pragma once

// Learning-rate families and the fixed scaling rules that turn a
// single-batch schedule (lr_1, T_1) into a scale-S schedule (lr_S, T_S).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adascale {

enum class LrFamily { constant, exponential_decay, step_decay };

/// Single-batch schedule. Field names follow the usual table format:
///   exponential_decay: lr(t) = eta0 * d^(t / T_S1)
///   step_decay:        lr(t) = eta0 * d^(#{i : t > milestones[i]})
struct LrSchedule {
  LrFamily family = LrFamily::constant;
  double eta0 = 0.1;
  double d = 1.0;
  std::vector<std::int64_t> milestones;
  std::int64_t T_S1 = 1;

  /// Throws ConfigError on eta0 <= 0, d outside (0, 1], unsorted milestones, T_S1 < 1.
  void validate() const;
  /// Real-argument evaluation; only exponential decay is non-piecewise.
  double at(double t) const;

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

double lr_eval(const LrSchedule& s, std::int64_t t);

enum class ScalingRule { identity, linear, lsw, lsw_plus };

struct ScaledSchedule {
  LrSchedule base;
  ScalingRule rule = ScalingRule::identity;
  int S = 1;
  std::int64_t T_1 = 1;
  double warmup_fraction = 0.055;
  std::int64_t T_target = 0;  ///< lsw_plus only

  friend bool operator==(const ScaledSchedule&, const ScaledSchedule&) = default;
};

/// Warm-up preset with twice the default duration.
inline constexpr double kDoubledWarmupFraction = 0.11;

/// Result of applying a scaling rule: lr_S on [0, T_S).
class AppliedSchedule {
 public:
  explicit AppliedSchedule(ScaledSchedule sch);

  double lr(std::int64_t t) const;
  std::int64_t iterations() const { return iterations_; }
  /// Warm-up length W_S (0 for identity and linear).
  std::int64_t warmup_iterations() const { return warmup_; }
  /// lr_S(t) expressed as a multiple of the single-batch rate it replaces:
  /// 1 for identity, S for linear, the ramp factor during warm-up.
  double effective_gain(std::int64_t t) const;
  const ScaledSchedule& config() const { return sch_; }

 private:
  double lsw_lr(std::int64_t t) const;
  double lsw_gain(std::int64_t t) const;
  std::int64_t stretch(std::int64_t t) const;

  ScaledSchedule sch_;
  std::int64_t iterations_ = 0;
  std::int64_t lsw_iterations_ = 0;
  std::int64_t warmup_ = 0;
};

AppliedSchedule apply_rule(const ScaledSchedule& sch);

/// ceil(a / b) for positive integers.
std::int64_t ceil_div(std::int64_t a, std::int64_t b);
/// ceil(fraction * n), treating values within 1e-9 of an integer as that integer.
std::int64_t ceil_fraction(double fraction, std::int64_t n);

std::string_view to_string(LrFamily f);
std::string_view to_string(ScalingRule r);
LrFamily parse_family(std::string_view s);
ScalingRule parse_rule(std::string_view s);

}  // namespace adascale
