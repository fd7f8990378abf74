#pragma once

// Experiment description in a flat "section.key = value" text format.
//
//   # comment
//   objective.kind = noisy_quadratic
//   objective.a_diag = 1, 0.5
//   schedule.family = step_decay
//   schedule.milestones = 100, 200
//   run.algorithm = adascale
//   run.elastic = 0:2, 500:8
//   gain.theta = default
//   sweep.axis = theta
//   sweep.theta = 0, 1-S/100, 1-S/1000
//
// Lists are comma-separated. Unknown keys and repeated keys are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adascale/engine.hpp"

namespace adascale::cli {

enum class SweepKind { S, theta, lr_grid };

struct SweepAxis {
  SweepKind kind = SweepKind::S;
  std::vector<int> S;
  /// Numbers or expressions of the form "1-S/<n>" and "max(1-S/<n>,0)".
  std::vector<std::string> theta;
  std::vector<double> eta0;  ///< lr_grid rows
  std::vector<double> d;     ///< lr_grid columns

  /// Throws ConfigError when the selected axis is empty.
  void validate() const;
  /// Number of sweep points.
  std::size_t size() const;

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct ExperimentSpec {
  TrainConfig train;
  std::optional<SweepAxis> sweep;
  std::filesystem::path out_dir = "out";
  std::vector<std::uint64_t> seeds{1};
  std::int64_t compare_every = 50;
  std::size_t oracle_batches = 1000;

  void validate() const;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec load_spec(const std::filesystem::path& path);
/// Every field, in a stable order; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ExperimentSpec& spec);

/// Evaluates a theta entry for scale S, e.g. "1-S/100" at S = 32 gives 0.68.
double eval_theta(std::string_view expr, int S);

/// "1,2,3" -> seeds; throws ConfigError on malformed entries.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

std::string_view to_string(SweepKind k);
SweepKind parse_sweep_kind(std::string_view s);

}  // namespace adascale::cli
