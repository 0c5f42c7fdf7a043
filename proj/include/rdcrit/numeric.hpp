#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace rdcrit {

inline constexpr double kLog2E = 1.4426950408889634074;  // 1/ln 2
inline constexpr double kLn2 = 0.69314718055994530942;

constexpr double bits_from_nats(double nats) { return nats * kLog2E; }
constexpr double nats_from_bits(double bits) { return bits * kLn2; }

// log(sum_i exp(args[i])) with max subtraction. -inf entries contribute
// nothing; an all -inf (or empty) input returns -inf.
inline double log_sum_exp(std::span<const double> args) {
  double max_arg = -std::numeric_limits<double>::infinity();
  for (double a : args) max_arg = std::max(max_arg, a);
  if (!std::isfinite(max_arg)) return max_arg;
  double sum = 0.0;
  for (double a : args) sum += std::exp(a - max_arg);
  return max_arg + std::log(sum);
}

// Kahan compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double y = x - carry_;
    double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Binary entropy in bits; h2(0) = h2(1) = 0.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Shannon entropy of a pmf in bits; zero-mass entries contribute nothing.
inline double entropy_bits(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

inline double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace rdcrit
