#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "adascale/kernels/kernels.hpp"

namespace k = adascale::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n) {
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(g);
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<const k::KernelTable*> variants() {
  std::vector<const k::KernelTable*> out{&k::scalar_table()};
  if (auto* t = k::avx2_table()) out.push_back(t);
  if (auto* t = k::neon_table()) out.push_back(t);
  return out;
}

}  // namespace

TEST(Kernels, ScalarMatchesLongDoubleReference) {
  std::mt19937_64 g(7);
  const auto& s = k::scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 256u, 1001u}) {
    auto x = random_vec(g, n), y = random_vec(g, n);
    long double dot = 0, sq = 0, mag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += static_cast<long double>(x[i]) * y[i];
      sq += static_cast<long double>(x[i]) * x[i];
      mag += std::abs(static_cast<long double>(x[i]) * y[i]);
    }
    EXPECT_NEAR(s.dot(x.data(), y.data(), n), static_cast<double>(dot),
                1e-14 * static_cast<double>(mag) + 1e-300);
    EXPECT_NEAR(s.sq_norm(x.data(), n), static_cast<double>(sq), 1e-14 * static_cast<double>(sq));

    auto z = y;
    s.axpy(0.5, x.data(), z.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(z[i], y[i] + 0.5 * x[i]);
    z = y;
    s.scale_add(0.9, x.data(), z.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(z[i], 0.9 * y[i] + x[i]);
    std::vector<double> d(n);
    s.sub(x.data(), y.data(), d.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(d[i], x[i] - y[i]);
    z = y;
    s.add(x.data(), z.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(z[i], y[i] + x[i]);
    z = y;
    s.scale(-2.5, z.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(z[i], -2.5 * y[i]);
  }
}

TEST(Kernels, EveryVariantBitwiseEqualsScalar) {
  std::mt19937_64 g(11);
  std::uniform_int_distribution<std::size_t> len(0, 1000);
  const auto& ref = k::scalar_table();
  for (const auto* t : variants()) {
    SCOPED_TRACE(std::string(k::isa_name(t->isa)));
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = len(g);
      auto x = random_vec(g, n), y = random_vec(g, n);
      ASSERT_TRUE(same_bits(t->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)));
      ASSERT_TRUE(same_bits(t->sq_norm(x.data(), n), ref.sq_norm(x.data(), n)));

      auto a = y, b = y;
      t->axpy(-1.3, x.data(), a.data(), n);
      ref.axpy(-1.3, x.data(), b.data(), n);
      ASSERT_TRUE(same_bits(a, b));
      a = y, b = y;
      t->scale_add(0.7, x.data(), a.data(), n);
      ref.scale_add(0.7, x.data(), b.data(), n);
      ASSERT_TRUE(same_bits(a, b));
      std::vector<double> c(n), e(n);
      t->sub(x.data(), y.data(), c.data(), n);
      ref.sub(x.data(), y.data(), e.data(), n);
      ASSERT_TRUE(same_bits(c, e));
      a = y, b = y;
      t->add(x.data(), a.data(), n);
      ref.add(x.data(), b.data(), n);
      ASSERT_TRUE(same_bits(a, b));
      a = y, b = y;
      t->scale(3.1, a.data(), n);
      ref.scale(3.1, b.data(), n);
      ASSERT_TRUE(same_bits(a, b));
    }
  }
}

TEST(Kernels, SelectAndNames) {
  EXPECT_EQ(k::isa_name(k::Isa::scalar), "scalar");
  EXPECT_EQ(k::isa_name(k::Isa::avx2), "avx2");
  EXPECT_EQ(k::isa_name(k::Isa::neon), "neon");
  const k::Isa before = k::active().isa;
  ASSERT_TRUE(k::select(k::Isa::scalar));
  EXPECT_EQ(k::active().isa, k::Isa::scalar);
  EXPECT_EQ(k::select(k::Isa::avx2), k::avx2_table() != nullptr);
  EXPECT_EQ(k::select(k::Isa::neon), k::neon_table() != nullptr);
  ASSERT_TRUE(k::select(before));
}
