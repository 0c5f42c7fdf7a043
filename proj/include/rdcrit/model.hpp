#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdcrit/errors.hpp"
#include "rdcrit/numeric.hpp"

namespace rdcrit {

using Matrix = std::vector<std::vector<double>>;

inline constexpr double kPmfSumTol = 1e-12;
inline constexpr double kStructuralTol = 1e-9;

// Subtracts each row's minimum so every source letter has a zero-distortion
// reproduction. Returns the shifted matrix and the per-row offsets.
inline std::pair<Matrix, std::vector<double>> normalize_distortion(const Matrix& raw) {
  if (raw.empty() || raw.front().empty())
    throw InvalidModelError("distortion matrix must be non-empty");
  const std::size_t cols = raw.front().size();
  Matrix out(raw.size(), std::vector<double>(cols));
  std::vector<double> offsets(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != cols)
      throw InvalidModelError("distortion matrix rows have unequal lengths");
    double row_min = raw[i][0];
    for (double v : raw[i]) {
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidModelError("distortion entries must be finite and nonnegative");
      row_min = std::min(row_min, v);
    }
    offsets[i] = row_min;
    for (std::size_t j = 0; j < cols; ++j) out[i][j] = raw[i][j] - row_min;
  }
  return {std::move(out), std::move(offsets)};
}

// Finite-alphabet memoryless source with a normalized distortion matrix.
// Immutable after construction; all member queries are pure.
class DiscreteModel {
 public:
  DiscreteModel(std::vector<std::string> source_labels, std::vector<double> pmf,
                std::vector<std::string> repro_labels, const Matrix& raw_rho)
      : source_labels_(std::move(source_labels)),
        pmf_(std::move(pmf)),
        repro_labels_(std::move(repro_labels)) {
    if (source_labels_.empty() || repro_labels_.empty())
      throw InvalidModelError("alphabets must be non-empty");
    if (pmf_.size() != source_labels_.size())
      throw InvalidModelError("pmf length does not match source alphabet");
    double sum = 0.0;
    for (double p : pmf_) {
      if (!(p > 0.0)) throw InvalidModelError("pmf entries must be strictly positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol)
      throw InvalidModelError("pmf does not sum to 1 within 1e-12");
    for (double& p : pmf_) p /= sum;
    if (raw_rho.size() != pmf_.size())
      throw InvalidModelError("distortion row count does not match source alphabet");
    for (const auto& row : raw_rho)
      if (row.size() != repro_labels_.size())
        throw InvalidModelError("distortion column count does not match reproduction alphabet");
    auto [normalized, offsets] = normalize_distortion(raw_rho);
    rho_ = std::move(normalized);
    offsets_ = std::move(offsets);
    max_rho_ = 0.0;
    for (const auto& row : rho_)
      for (double v : row) max_rho_ = std::max(max_rho_, v);
  }

  std::size_t source_size() const { return pmf_.size(); }
  std::size_t repro_size() const { return repro_labels_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  const Matrix& rho() const { return rho_; }
  const std::vector<double>& normalization_offsets() const { return offsets_; }
  const std::vector<std::string>& source_labels() const { return source_labels_; }
  const std::vector<std::string>& repro_labels() const { return repro_labels_; }
  // Largest entry of the normalized matrix; the distortion scale M.
  double max_distortion() const { return max_rho_; }

 private:
  std::vector<std::string> source_labels_;
  std::vector<double> pmf_;
  std::vector<std::string> repro_labels_;
  Matrix rho_;
  std::vector<double> offsets_;
  double max_rho_;
};

struct DmaxResult {
  double value;
  std::size_t column;  // lowest index on ties
};

// D_max = min over reproduction letters of E_P[rho(X, a_j)]. The rate is zero
// at and beyond this distortion.
inline DmaxResult d_max(const DiscreteModel& model) {
  DmaxResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t j = 0; j < model.repro_size(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < model.source_size(); ++i)
      mean += model.pmf()[i] * model.rho()[i][j];
    if (mean < best.value) best = {mean, j};
  }
  return best;
}

namespace detail {
inline void require_pmf(const DiscreteModel& model, std::span<const double> q) {
  if (q.size() != model.repro_size())
    throw std::invalid_argument("Q length does not match reproduction alphabet");
  double sum = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw std::invalid_argument("Q entries must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("Q does not sum to 1");
}
}  // namespace detail

// E_P[min over supp(Q) of rho]: the smallest distortion reachable with
// reproductions drawn from Q's support.
inline double d_min_q(const DiscreteModel& model, std::span<const double> q) {
  detail::require_pmf(model, q);
  double total = 0.0;
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.repro_size(); ++j)
      if (q[j] > 0.0) row_min = std::min(row_min, model.rho()[i][j]);
    if (!std::isfinite(row_min)) throw std::invalid_argument("Q has empty support");
    total += model.pmf()[i] * row_min;
  }
  return total;
}

// E_{P x Q}[rho]: the distortion of coding with Y independent of X.
inline double d_max_q(const DiscreteModel& model, std::span<const double> q) {
  detail::require_pmf(model, q);
  double total = 0.0;
  for (std::size_t i = 0; i < model.source_size(); ++i)
    for (std::size_t j = 0; j < model.repro_size(); ++j)
      total += model.pmf()[i] * q[j] * model.rho()[i][j];
  return total;
}

struct PermutationCheck {
  bool is_permutation;
  std::string reason;                                   // empty when true
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // first failing row pair
};

// True when all rows of rho are permutations of one another (multiset
// comparison within tol). Requires a square matrix.
inline PermutationCheck is_permutation_measure(const DiscreteModel& model,
                                               double tol = kStructuralTol) {
  if (model.source_size() != model.repro_size())
    return {false, "not square", std::nullopt};
  std::vector<std::vector<double>> sorted(model.source_size());
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    sorted[i] = model.rho()[i];
    std::sort(sorted[i].begin(), sorted[i].end());
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sup_norm_diff(sorted[0], sorted[i]) > tol)
      return {false, "row multisets differ", std::make_pair(std::size_t{0}, i)};
  }
  return {true, "", std::nullopt};
}

inline bool is_uniform(std::span<const double> pmf, double tol = kStructuralTol) {
  const double target = 1.0 / static_cast<double>(pmf.size());
  for (double p : pmf)
    if (std::abs(p - target) > tol) return false;
  return true;
}

struct SymmetryAdvisory {
  bool symmetric;
  bool zero_diagonal_only;  // rho_ij = 0 iff i = j
};

// Advisory only: the permutation-criticality analysis assumes these, the
// solver does not.
inline SymmetryAdvisory symmetry_advisory(const DiscreteModel& model,
                                          double tol = kStructuralTol) {
  SymmetryAdvisory adv{true, true};
  if (model.source_size() != model.repro_size()) return {false, false};
  const auto& rho = model.rho();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (std::abs(rho[i][j] - rho[j][i]) > tol) adv.symmetric = false;
      const bool zero = std::abs(rho[i][j]) <= tol;
      if (zero != (i == j)) adv.zero_diagonal_only = false;
    }
  }
  return adv;
}

enum class DistortionFamily { SquaredError, AbsoluteError };

struct DensitySpec {
  std::string name;   // "uniform" | "gaussian"
  double mean = 0.0;  // gaussian only
  double stddev = 1.0;

  double operator()(double x) const {
    if (name == "uniform") return 1.0;
    if (name == "gaussian") {
      const double z = (x - mean) / stddev;
      return std::exp(-0.5 * z * z) / stddev;
    }
    throw InvalidModelError("unknown density: " + name);
  }
};

// Source on an interval with a positive density and a finite set of real
// reproduction points. r_j(x) is the per-letter distortion to point j after
// the row normalization; r_0 is identically zero.
class ContinuousModel {
 public:
  ContinuousModel(double low, double high, DensitySpec density,
                  std::vector<double> repro_points, DistortionFamily family,
                  std::size_t grid_size)
      : low_(low),
        high_(high),
        density_(std::move(density)),
        repro_(std::move(repro_points)),
        family_(family),
        grid_size_(grid_size) {
    if (!(low_ < high_)) throw InvalidModelError("interval endpoints must satisfy low < high");
    if (grid_size_ == 0) throw InvalidModelError("grid_size must be positive");
    if (density_.name != "uniform" && density_.name != "gaussian")
      throw InvalidModelError("unknown density: " + density_.name);
    if (density_.name == "gaussian" && !(density_.stddev > 0.0))
      throw InvalidModelError("gaussian stddev must be positive");
    std::vector<double> sorted = repro_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 1; j < sorted.size(); ++j)
      if (sorted[j] == sorted[j - 1])
        throw InvalidModelError("reproduction points must be distinct");
  }

  double low() const { return low_; }
  double high() const { return high_; }
  const DensitySpec& density() const { return density_; }
  const std::vector<double>& repro_points() const { return repro_; }
  DistortionFamily family() const { return family_; }
  std::size_t grid_size() const { return grid_size_; }
  std::size_t repro_size() const { return repro_.size(); }
  bool contains(double x) const { return x >= low_ && x <= high_; }

  double raw_distortion(double x, std::size_t j) const {
    const double d = x - repro_[j];
    return family_ == DistortionFamily::SquaredError ? d * d : std::abs(d);
  }

  // r_j(x), 1-based in j; r(0, x) = 0. Rows are shifted so min_j r_j(x) = 0.
  double r(std::size_t j, double x) const {
    if (j == 0) return 0.0;
    return raw_distortion(x, j - 1) - row_offset(x);
  }

  double row_offset(double x) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < repro_.size(); ++j) m = std::min(m, raw_distortion(x, j));
    return repro_.empty() ? 0.0 : m;
  }

 private:
  double low_, high_;
  DensitySpec density_;
  std::vector<double> repro_;
  DistortionFamily family_;
  std::size_t grid_size_;
};

}  // namespace rdcrit
