// Scalar reference kernels. The SIMD variants are tested for bitwise
// equality against these, so the lane layout here is the contract.

#include "adascale/kernels/kernels.hpp"

namespace adascale::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += x[i] * y[i];
    l1 += x[i + 1] * y[i + 1];
    l2 += x[i + 2] * y[i + 2];
    l3 += x[i + 3] * y[i + 3];
  }
  double s = (l0 + l2) + (l1 + l3);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sq_norm_scalar(const double* x, std::size_t n) { return dot_scalar(x, x, n); }

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_add_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * y[i] + x[i];
}

void sub_scalar(const double* x, const double* y, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] - y[i];
}

void add_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void scale_scalar(double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

constexpr KernelTable kScalar{Isa::scalar,    dot_scalar, sq_norm_scalar, axpy_scalar,
                              scale_add_scalar, sub_scalar, add_scalar,     scale_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace adascale::kernels
