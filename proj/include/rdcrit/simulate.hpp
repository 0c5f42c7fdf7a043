#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rdcrit/model.hpp"
#include "rdcrit/numeric.hpp"
#include "rdcrit/rd_solver.hpp"
#include "rdcrit/rng.hpp"

namespace rdcrit {

struct ScaledStats {
  double mean_scaled;                  // mean of S_n / sqrt(n) at the largest n
  std::optional<double> var_scaled;    // absent when trials < 2
};

// Monte Carlo of the redundancy sum S_n = sum_i f(X_i) along a grid of n,
// with the analytic reference envelopes nR + S_n - 2 log2 n (converse) and
// nR + S_n + 5 log2 n (achievability).
struct SimulationResult {
  std::vector<std::size_t> n_grid;
  std::size_t trials;
  std::uint64_t seed;
  double distortion;
  double rate_bits;
  double sigma2_bits2;
  Verdict verdict;
  std::vector<double> f_table_bits;              // per source letter, as sampled
  std::vector<std::vector<double>> s_paths;      // [trial][grid] S_n in bits
  std::vector<std::vector<double>> lower_envelope;
  std::vector<std::vector<double>> upper_envelope;
  std::size_t lower_above_rate_count;  // grid points with S_n - 2 log2 n > 0
  std::size_t upper_below_rate_count;  // grid points with S_n + 5 log2 n < 0
  ScaledStats scaled_stats;
};

inline SimulationResult sample_redundancy_paths(const DiscreteModel& model, double distortion,
                                                std::vector<std::size_t> n_grid,
                                                std::size_t trials, std::uint64_t seed,
                                                const SolveOptions& opts = {}) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (n_grid.empty()) throw std::invalid_argument("n_grid must be non-empty");
  for (std::size_t g = 1; g < n_grid.size(); ++g)
    if (n_grid[g] <= n_grid[g - 1]) throw std::invalid_argument("n_grid must be increasing");

  const RDSolution sol = solve_at_distortion(model, distortion, opts);
  SimulationResult out;
  out.n_grid = std::move(n_grid);
  out.trials = trials;
  out.seed = seed;
  out.distortion = distortion;
  out.rate_bits = sol.rate_bits;
  out.sigma2_bits2 = sol.sigma2_bits2;
  out.verdict = sol.verdict;
  out.f_table_bits = sol.f_bits;
  // A critical source has f = 0 almost surely; drop the ~1e-16 solver residue
  // so S_n is exactly zero as the classification asserts.
  if (sol.verdict == Verdict::Critical)
    std::fill(out.f_table_bits.begin(), out.f_table_bits.end(), 0.0);

  std::vector<double> cumulative(model.pmf().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    acc += model.pmf()[i];
    cumulative[i] = acc;
  }

  const std::size_t n_max = out.n_grid.back();
  out.s_paths.assign(trials, {});
  out.lower_envelope.assign(trials, {});
  out.upper_envelope.assign(trials, {});
  out.lower_above_rate_count = 0;
  out.upper_below_rate_count = 0;

  double sum_scaled = 0.0, sum_scaled_sq = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CounterRng rng(seed, trial);
    CompensatedSum s;
    std::size_t next_grid = 0;
    auto& path = out.s_paths[trial];
    auto& lower = out.lower_envelope[trial];
    auto& upper = out.upper_envelope[trial];
    path.reserve(out.n_grid.size());
    for (std::size_t n = 1; n <= n_max; ++n) {
      s.add(out.f_table_bits[rng.next_index(cumulative)]);
      if (n == out.n_grid[next_grid]) {
        const double s_n = s.value();
        const double log_n = std::log2(static_cast<double>(n));
        const double base = static_cast<double>(n) * out.rate_bits + s_n;
        path.push_back(s_n);
        lower.push_back(base - 2.0 * log_n);
        upper.push_back(base + 5.0 * log_n);
        if (s_n - 2.0 * log_n > 0.0) ++out.lower_above_rate_count;
        if (s_n + 5.0 * log_n < 0.0) ++out.upper_below_rate_count;
        ++next_grid;
      }
    }
    const double scaled = path.back() / std::sqrt(static_cast<double>(n_max));
    sum_scaled += scaled;
    sum_scaled_sq += scaled * scaled;
  }

  const double t = static_cast<double>(trials);
  out.scaled_stats.mean_scaled = sum_scaled / t;
  if (trials >= 2) {
    const double mean = out.scaled_stats.mean_scaled;
    out.scaled_stats.var_scaled = (sum_scaled_sq - t * mean * mean) / (t - 1.0);
  }
  return out;
}

struct CltSummary {
  double mean_scaled;
  std::optional<double> var_scaled;
  std::optional<double> rel_gap;  // |var_scaled - sigma2| / sigma2
};

inline CltSummary clt_summary(const SimulationResult& result, double sigma2_bits2) {
  CltSummary out{result.scaled_stats.mean_scaled, result.scaled_stats.var_scaled, {}};
  if (out.var_scaled && sigma2_bits2 > 0.0)
    out.rel_gap = std::abs(*out.var_scaled - sigma2_bits2) / sigma2_bits2;
  return out;
}

struct SlopeTrendPoint {
  double distortion;
  double lambda_star;
};

struct SlopeTrend {
  std::vector<SlopeTrendPoint> points;
  std::size_t monotonicity_violations;  // informational: only the limit is
                                        // guaranteed, not monotone decrease
};

// lambda* along a decreasing distortion sequence; diverges to -inf as D -> 0.
inline SlopeTrend slope_trend(const DiscreteModel& model, std::span<const double> d_sequence,
                              const SolveOptions& opts = {}) {
  SlopeTrend out{{}, 0};
  for (double d : d_sequence) {
    const RDSolution sol = solve_at_distortion(model, d, opts);
    out.points.push_back({d, sol.lambda_star});
  }
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].lambda_star >= out.points[i - 1].lambda_star)
      ++out.monotonicity_violations;
  return out;
}

}  // namespace rdcrit
