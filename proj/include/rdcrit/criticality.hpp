#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rdcrit/lagrangian.hpp"
#include "rdcrit/model.hpp"
#include "rdcrit/numeric.hpp"
#include "rdcrit/rng.hpp"

namespace rdcrit {

enum class Verdict { Critical, Generic };

inline const char* verdict_name(Verdict v) {
  return v == Verdict::Critical ? "Critical" : "Generic";
}
// Redundancy order implied by the verdict: a critical source admits
// O(log n) pointwise redundancy, a generic one is Theta(sqrt n).
inline const char* redundancy_order(Verdict v) {
  return v == Verdict::Critical ? "O(log n)" : "O(sqrt n)";
}

inline constexpr double kDefaultEpsilonBits = 1e-6;

// Per-letter redundancy function, in bits:
//   f(x) = log2(e) * [lambda* D - log_e sum_j Q*_j e^{lambda* rho(x,a_j)}] - R(D).
// Zero-mean under P for a converged certificate.
inline std::vector<double> f_values(const DiscreteModel& model, std::span<const double> q_star,
                                    double lambda_star, double distortion, double rate_bits) {
  detail::require_pmf(model, q_star);
  std::vector<double> scratch(model.repro_size());
  std::vector<double> f(model.source_size());
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    const double log_mgf =
        detail::tilted_row(model.rho()[i], q_star, lambda_star, scratch).log_mgf;
    f[i] = bits_from_nats(lambda_star * distortion - log_mgf) - rate_bits;
  }
  return f;
}

struct ConstancyResult {
  bool critical;
  double spread_bits;  // log-domain range of sum_j Q*_j e^{lambda* rho_ij}
};

// The criticality condition: the tilted mass sum_j Q*_j e^{lambda* rho(x,.)}
// must be the same constant for every source letter.
inline ConstancyResult constancy_test(const DiscreteModel& model, std::span<const double> q_star,
                                      double lambda_star,
                                      double epsilon_bits = kDefaultEpsilonBits) {
  detail::require_pmf(model, q_star);
  std::vector<double> scratch(model.repro_size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    const double lg = detail::tilted_row(model.rho()[i], q_star, lambda_star, scratch).log_mgf;
    lo = std::min(lo, lg);
    hi = std::max(hi, lg);
  }
  const double spread = bits_from_nats(hi - lo);
  return {spread <= epsilon_bits, spread};
}

// Var_P[f(X)] in bits^2; f is zero-mean so this is just the second moment.
inline double minimal_coding_variance(const DiscreteModel& model, std::span<const double> f_bits) {
  double v = 0.0;
  for (std::size_t i = 0; i < model.source_size(); ++i)
    v += model.pmf()[i] * f_bits[i] * f_bits[i];
  return v;
}

// Lossless limit: f(x) = -log2 P(x) - H(P).
inline std::vector<double> lossless_f(std::span<const double> pmf) {
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p > 0.0)) throw std::invalid_argument("pmf entries must be strictly positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("pmf does not sum to 1");
  const double h = entropy_bits(pmf);
  std::vector<double> f(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) f[i] = -std::log2(pmf[i]) - h;
  return f;
}

struct Theorem1Prediction {
  bool uniform;
  bool permutation;
  bool critical_for_all_D;  // uniform AND permutation
  SymmetryAdvisory advisory;
};

// Uniform source + permutation distortion is critical at every D; violating
// either hypothesis rules out criticality near D = 0.
inline Theorem1Prediction theorem1_predict(const DiscreteModel& model,
                                           double tol = kStructuralTol) {
  Theorem1Prediction out{};
  out.uniform = is_uniform(model.pmf(), tol);
  out.permutation = is_permutation_measure(model, tol).is_permutation;
  out.critical_for_all_D = out.uniform && out.permutation;
  out.advisory = symmetry_advisory(model, tol);
  return out;
}

struct DetDiagnostic {
  double lambda;
  std::vector<double> points;  // filled by callers that know them
  double det_value;
  double matrix_inf_norm;
  bool s_pi_checked;
  bool s_pi_exhaustive;  // full (k+1)! enumeration vs sampled
  bool s_pi_distinct;
  double s_pi_min_gap;
};

namespace detail {

inline double permutation_sum(const Matrix& r_full, std::span<const std::size_t> perm) {
  double s = 0.0;
  for (std::size_t j = 0; j < perm.size(); ++j) s += r_full[perm[j]][j];
  return s;
}

}  // namespace detail

// Determinant of the (k+1)x(k+1) matrix [e^{lambda r_j(x_i)}], j = 0..k with
// r_0 == 0 prepended, plus distinctness of the permutation sums
// s_pi = sum_j r_j(x_pi(j)). Full enumeration up to (k+1)! with k+1 <= 8;
// larger inputs skip the s_pi check and are flagged.
inline DetDiagnostic det_T(const Matrix& r_matrix, double lambda) {
  if (r_matrix.empty()) throw std::invalid_argument("r_matrix must be non-empty");
  const std::size_t k = r_matrix.front().size();
  if (r_matrix.size() != k + 1)
    throw std::invalid_argument("r_matrix must have k+1 rows and k columns");
  const std::size_t n = k + 1;
  Matrix r_full(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (r_matrix[i].size() != k) throw std::invalid_argument("ragged r_matrix");
    for (std::size_t j = 0; j < k; ++j) r_full[i][j + 1] = r_matrix[i][j];
  }

  Eigen::MatrixXd t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(lambda * r_full[i][j]);

  DetDiagnostic out{};
  out.lambda = lambda;
  out.det_value = t.determinant();
  out.matrix_inf_norm = t.cwiseAbs().rowwise().sum().maxCoeff();
  out.s_pi_checked = n <= 8;
  out.s_pi_exhaustive = out.s_pi_checked;
  out.s_pi_distinct = false;
  out.s_pi_min_gap = 0.0;
  if (!out.s_pi_checked) return out;

  std::vector<double> sums;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    sums.push_back(detail::permutation_sum(r_full, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(sums.begin(), sums.end());
  double scale = std::max(1.0, std::abs(sums.back()));
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sums.size(); ++i) min_gap = std::min(min_gap, sums[i] - sums[i - 1]);
  out.s_pi_min_gap = min_gap;
  out.s_pi_distinct = min_gap > 1e-12 * scale;
  return out;
}

struct CertificateDet {
  double det_value;
  double scale;      // (matrix inf-norm)^dim
  std::size_t dim;   // 1 + |supp Q*| columns
  std::size_t appended_rows;
};

// Bordered determinant that vanishes exactly when the certificate vector
// (-c, Q*) is a kernel of [1 | e^{lambda rho_ij}] over the support columns,
// i.e. when the tilted row sums are constant. When the source alphabet has
// exactly 1 + |supp| letters this is the plain determinant of that matrix;
// wider kernels are squared up with rows orthogonal to the candidate vector.
inline CertificateDet det_certificate(const DiscreteModel& model, std::span<const double> q_star,
                                      double lambda_star) {
  detail::require_pmf(model, q_star);
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < q_star.size(); ++j)
    if (q_star[j] > 0.0) support.push_back(j);
  const std::size_t n = support.size() + 1;

  std::vector<double> scratch(model.repro_size());
  std::vector<double> g(model.source_size());
  double c = 0.0;
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    g[i] = std::exp(detail::tilted_row(model.rho()[i], q_star, lambda_star, scratch).log_mgf);
    c += model.pmf()[i] * g[i];
  }

  Eigen::VectorXd kernel(static_cast<Eigen::Index>(n));
  kernel(0) = -c;
  for (std::size_t s = 0; s < support.size(); ++s)
    kernel(static_cast<Eigen::Index>(s + 1)) = q_star[support[s]];

  const std::size_t source_rows = std::min(model.source_size(), n);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < source_rows; ++i) {
    t(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t s = 0; s < support.size(); ++s)
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s + 1)) =
          std::exp(lambda_star * model.rho()[i][support[s]]);
  }

  // Square up with unit rows orthogonal to the kernel candidate (and to each
  // other): the determinant then vanishes iff the candidate really is in the
  // kernel of the source rows.
  std::size_t filled = source_rows;
  std::vector<Eigen::VectorXd> added;
  for (std::size_t basis = 0; basis < n && filled < n; ++basis) {
    Eigen::VectorXd w = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(basis));
    w -= kernel * (kernel.dot(w) / kernel.squaredNorm());
    for (const auto& prev : added) w -= prev * prev.dot(w);
    if (w.norm() < 0.5) continue;
    w.normalize();
    added.push_back(w);
    t.row(static_cast<Eigen::Index>(filled++)) = w.transpose();
  }

  CertificateDet out{};
  out.det_value = t.determinant();
  out.scale = std::pow(t.cwiseAbs().rowwise().sum().maxCoeff(), static_cast<double>(n));
  out.dim = n;
  out.appended_rows = n - source_rows;
  return out;
}

namespace detail {

inline void require_points(const ContinuousModel& model, std::span<const double> points) {
  for (double x : points)
    if (!model.contains(x)) throw std::invalid_argument("point outside the source interval");
  std::vector<double> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1]) throw std::invalid_argument("points must be distinct");
}

inline Matrix r_values_at(const ContinuousModel& model, std::span<const double> points) {
  Matrix r(points.size(), std::vector<double>(model.repro_size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < model.repro_size(); ++j) r[i][j] = model.r(j + 1, points[i]);
  return r;
}

}  // namespace detail

inline DetDiagnostic det_T_at_points(const ContinuousModel& model,
                                     std::span<const double> points, double lambda) {
  detail::require_points(model, points);
  if (points.size() != model.repro_size() + 1)
    throw std::invalid_argument("need k+1 points for k reproduction letters");
  auto diag = det_T(detail::r_values_at(model, points), lambda);
  diag.points.assign(points.begin(), points.end());
  return diag;
}

// Dominance condition: each reproduction letter's distortion is maximized at
// its own point, r_j(x_j) > r_j(x_i) for all i != j, j != 0.
inline bool check_thm3a(std::span<const double> points, const ContinuousModel& model) {
  detail::require_points(model, points);
  if (points.size() != model.repro_size() + 1)
    throw std::invalid_argument("need k+1 points for k reproduction letters");
  for (std::size_t j = 1; j < points.size(); ++j)
    for (std::size_t i = 0; i < points.size(); ++i)
      if (i != j && !(model.r(j, points[j]) > model.r(j, points[i]))) return false;
  return true;
}

struct Thm3bResult {
  bool holds;
  double margin;     // min over non-identity pi of |s_id - s_pi|
  bool exhaustive;   // full enumeration vs 1e4 sampled permutations
};

// Identity-sum separation: sum_j r_j(x_j) differs from every permuted sum.
// Exhaustive for k+1 <= 8; sampled (and labeled so) beyond that.
inline Thm3bResult check_thm3b(std::span<const double> points, const ContinuousModel& model,
                               std::uint64_t sample_seed = 2024) {
  detail::require_points(model, points);
  const std::size_t n = points.size();
  if (n != model.repro_size() + 1)
    throw std::invalid_argument("need k+1 points for k reproduction letters");
  Matrix r_full(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j < n; ++j) r_full[i][j] = model.r(j, points[i]);

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const double s_id = detail::permutation_sum(r_full, identity);
  double scale = std::max(1.0, std::abs(s_id));
  double margin = std::numeric_limits<double>::infinity();

  if (n <= 8) {
    std::vector<std::size_t> perm = identity;
    while (std::next_permutation(perm.begin(), perm.end())) {
      margin = std::min(margin, std::abs(s_id - detail::permutation_sum(r_full, perm)));
    }
    return {margin > 1e-12 * scale, margin, true};
  }
  CounterRng rng(sample_seed, 0);
  std::vector<std::size_t> perm = identity;
  for (int trial = 0; trial < 10000; ++trial) {
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = rng.next_u64() % (i + 1);
      std::swap(perm[i], perm[j]);
    }
    if (perm == identity) continue;
    margin = std::min(margin, std::abs(s_id - detail::permutation_sum(r_full, perm)));
  }
  return {margin > 1e-12 * scale, margin, false};
}

struct Thm2Result {
  std::map<double, double> min_singular_value_by_lambda;
  bool independent;
};

// Numerical rank check for {e^{lambda r_j}} on [low, high]: sample rows,
// normalize columns (entry magnitudes span many decades at large |lambda|),
// and require the smallest singular value to clear 1e-8 at every lambda.
inline Thm2Result check_thm2_independence(
    double low, double high, const std::vector<std::function<double(double)>>& r_funcs,
    std::span<const double> lambda_grid, std::size_t sample_count) {
  const std::size_t k = r_funcs.size();
  if (sample_count < 4 * (k + 1))
    throw std::invalid_argument("sample_count must be at least 4(k+1)");
  Thm2Result out{{}, true};
  for (double lambda : lambda_grid) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(sample_count), static_cast<Eigen::Index>(k + 1));
    for (std::size_t s = 0; s < sample_count; ++s) {
      const double x = low + (static_cast<double>(s) + 0.5) * (high - low) /
                                 static_cast<double>(sample_count);
      a(static_cast<Eigen::Index>(s), 0) = 1.0;
      for (std::size_t j = 0; j < k; ++j)
        a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j + 1)) =
            std::exp(lambda * r_funcs[j](x));
    }
    for (Eigen::Index col = 0; col < a.cols(); ++col) {
      const double norm = a.col(col).norm();
      if (norm > 0.0) a.col(col) /= norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const double sigma_min = svd.singularValues().tail(1)(0);
    out.min_singular_value_by_lambda[lambda] = sigma_min;
    if (sigma_min <= 1e-8) out.independent = false;
  }
  return out;
}

inline Thm2Result check_thm2_independence(const ContinuousModel& model,
                                          std::span<const double> lambda_grid,
                                          std::size_t sample_count = 200) {
  std::vector<std::function<double(double)>> r_funcs;
  for (std::size_t j = 1; j <= model.repro_size(); ++j)
    r_funcs.push_back([&model, j](double x) { return model.r(j, x); });
  return check_thm2_independence(model.low(), model.high(), r_funcs, lambda_grid, sample_count);
}

// Midpoint discretization: m cells on [low, high], pmf proportional to the
// density at cell midpoints, distortion rows r_j(midpoint) renormalized.
inline DiscreteModel discretize(const ContinuousModel& model) {
  const std::size_t m = model.grid_size();
  if (m < model.repro_size())
    throw std::invalid_argument("grid_size must be at least the reproduction alphabet size");
  const double width = (model.high() - model.low()) / static_cast<double>(m);
  std::vector<double> pmf(m);
  std::vector<std::string> labels(m);
  Matrix rho(m, std::vector<double>(model.repro_size()));
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = model.low() + (static_cast<double>(i) + 0.5) * width;
    pmf[i] = model.density()(x) * width;
    if (!(pmf[i] > 0.0)) throw InvalidModelError("density must be positive on the interval");
    total += pmf[i];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    labels[i] = buf;
    for (std::size_t j = 0; j < model.repro_size(); ++j) rho[i][j] = model.raw_distortion(x, j);
  }
  for (double& p : pmf) p /= total;
  std::vector<std::string> repro_labels(model.repro_size());
  for (std::size_t j = 0; j < model.repro_size(); ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", model.repro_points()[j]);
    repro_labels[j] = buf;
  }
  return DiscreteModel(std::move(labels), std::move(pmf), std::move(repro_labels), rho);
}

}  // namespace rdcrit
