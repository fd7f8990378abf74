#pragma once

// Dense vector kernels used on every inner loop of the simulator.
//
// Each ISA variant implements the same table. Reductions accumulate into four
// interleaved lanes (lane j sums indices i with i % 4 == j over the largest
// multiple-of-four prefix), combine as (l0 + l2) + (l1 + l3), and then add the
// tail sequentially. Elementwise ops are plain mul/add with no fused
// multiply-add. Under those rules every variant is bitwise identical to the
// scalar reference, which keeps traces reproducible across machines.

#include <cstddef>
#include <span>
#include <string_view>

namespace adascale::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// sum_i x[i]^2
  double (*sq_norm)(const double* x, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y[i] = a * y[i] + x[i]
  void (*scale_add)(double a, const double* x, double* y, std::size_t n);
  /// z[i] = x[i] - y[i]
  void (*sub)(const double* x, const double* y, double* z, std::size_t n);
  /// y[i] += x[i]
  void (*add)(const double* x, double* y, std::size_t n);
  /// y[i] *= a
  void (*scale)(double a, double* y, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the ISA was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// The table used by the library. Picked once on first use: the best ISA
/// the CPU supports, unless ADASCALE_KERNELS=scalar|avx2|neon overrides it.
const KernelTable& active();

/// Force a variant for the rest of the process (tests, benchmarks).
/// Returns false if the ISA is unavailable on this machine.
bool select(Isa isa);

std::string_view isa_name(Isa isa);

// Span conveniences over the active table.
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline double sq_norm(std::span<const double> x) { return active().sq_norm(x.data(), x.size()); }
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}
inline void scale_add(double a, std::span<const double> x, std::span<double> y) {
  active().scale_add(a, x.data(), y.data(), y.size());
}
inline void sub(std::span<const double> x, std::span<const double> y, std::span<double> z) {
  active().sub(x.data(), y.data(), z.data(), z.size());
}
inline void add(std::span<const double> x, std::span<double> y) {
  active().add(x.data(), y.data(), y.size());
}
inline void scale(double a, std::span<double> y) { active().scale(a, y.data(), y.size()); }

}  // namespace adascale::kernels
