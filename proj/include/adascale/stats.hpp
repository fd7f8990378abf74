#pragma once

#include <cstddef>
#include <span>

namespace adascale {

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample (n - 1) standard deviation
  double ci95 = 0.0;    ///< half-width, 1.96 * stddev / sqrt(n)
};

/// Pairwise summation; the result depends only on the order of `x`.
double pairwise_sum(std::span<const double> x);
SampleStats summarize(std::span<const double> x);

}  // namespace adascale
