#include "adascale/stats.hpp"

#include <cmath>

namespace adascale {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

SampleStats summarize(std::span<const double> x) {
  SampleStats s;
  s.n = x.size();
  if (s.n == 0) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

}  // namespace adascale
