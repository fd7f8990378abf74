#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "adascale/cli/config.hpp"

namespace adascale::cli {

enum ExitCode : int { kSuccess = 0, kFail = 1, kUsage = 2 };

struct CommandOptions {
  unsigned threads = 1;
  std::ostream* out = nullptr;  ///< progress and reports; std::cout when null
  std::ostream* err = nullptr;  ///< std::cerr when null
};

/// Per seed: <out>/trace_seed<N>.csv. Then <out>/summary.txt, written atomically.
int cmd_train(const ExperimentSpec& spec, const CommandOptions& opts = {});
/// One train per sweep point under <out>/point_<k>/, plus <out>/matrix.csv.
int cmd_sweep(const ExperimentSpec& spec, const CommandOptions& opts = {});
/// Runs an acceptance suite and prints one line per criterion.
int cmd_verify(std::string_view suite, const CommandOptions& opts = {});
/// Per seed: <out>/gain_compare_seed<N>.csv with columns t,tau,online,oracle,analytic.
int cmd_gain_compare(const ExperimentSpec& spec, const CommandOptions& opts = {});

inline constexpr std::string_view kMatrixHeader =
    "point,S,theta,eta0,d,final_F_mean,final_F_std,iterations_mean,iterations_std,diverged";
inline constexpr std::string_view kGainCompareHeader = "t,tau,online,oracle,analytic";

/// Writes `text` to a temporary sibling and renames it over `path`.
void write_atomically(const std::filesystem::path& path, std::string_view text);

}  // namespace adascale::cli
