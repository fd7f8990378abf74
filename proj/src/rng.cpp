#include "adascale/rng.hpp"

namespace adascale {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamA = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kStreamB = 0xabc98388fb8fac03ULL;
}  // namespace

std::uint64_t RngStream::mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ (a * kStreamA + kGolden));
  k = mix64(k ^ (b * kStreamB + kGolden));
  key_ = k;
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(KeyTag{}, mix64(key_ ^ mix64(index * kStreamA + kStreamB)));
}

double RngStream::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(*this); }

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection; unbiased.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace adascale
