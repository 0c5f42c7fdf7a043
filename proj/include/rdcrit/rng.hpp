#pragma once

#include <cstdint>
#include <span>

namespace rdcrit {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

// Counter-based generator: draw i of stream (seed, stream) is a bijective
// mix of key + i*gamma, so streams are random-access, order-independent, and
// reproducible regardless of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(seed + 0x9e3779b97f4a7c15ULL * detail::mix64(stream + 1))) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Inverse-CDF draw; `cumulative` is the running pmf sum ending at ~1.
  std::size_t next_index(std::span<const double> cumulative) {
    const double u = next_unit();
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i)
      if (u < cumulative[i]) return i;
    return cumulative.size() - 1;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rdcrit
