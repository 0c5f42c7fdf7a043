#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rdcrit/errors.hpp"
#include "rdcrit/model.hpp"
#include "rdcrit/numeric.hpp"

namespace rdcrit {

// Lambda_{P,Q}(lambda) = E_P[ log_e E_Q(e^{lambda rho(X,Y)}) ] together with
// its first two derivatives in lambda. All values in nats.
struct LambdaEval {
  double lambda;
  double value;
  double first_deriv;   // tilted mean of rho, in distortion units
  double second_deriv;  // tilted variance of rho, >= 0
};

struct LegendreEval {
  double D;
  double lambda_star = 0.0;
  bool lambda_star_exists = false;
  double value_nats = 0.0;
  double value_bits = 0.0;
};

namespace detail {

// Per-source-row tilted statistics. Inner sums run in the log domain so the
// evaluation survives lambda ~ -1e4 * max(rho).
struct RowStats {
  double log_mgf;  // log_e sum_j Q_j e^{lambda rho_ij}
  double mean;
  double variance;
};

inline RowStats tilted_row(std::span<const double> rho_row, std::span<const double> q,
                           double lambda, std::span<double> scratch) {
  double max_t = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.size(); ++j) {
    scratch[j] = q[j] > 0.0 ? std::log(q[j]) + lambda * rho_row[j]
                            : -std::numeric_limits<double>::infinity();
    max_t = std::max(max_t, scratch[j]);
  }
  if (!std::isfinite(max_t)) throw std::invalid_argument("Q has empty support");
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) sum += std::exp(scratch[j] - max_t);
  const double log_mgf = max_t + std::log(sum);
  double mean = 0.0, sq = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double w = std::exp(scratch[j] - log_mgf);
    mean += w * rho_row[j];
    sq += w * rho_row[j] * rho_row[j];
  }
  return {log_mgf, mean, sq - mean * mean};
}

}  // namespace detail

inline LambdaEval lambda_eval(const DiscreteModel& model, std::span<const double> q,
                              double lambda) {
  if (lambda > 0.0) throw std::domain_error("lambda must be <= 0");
  detail::require_pmf(model, q);
  if (lambda == 0.0) {
    // Exact by definition: Lambda(0) = 0 and Lambda'(0) = E_{PxQ}[rho],
    // summed in the same order as d_max_q.
    double var = 0.0;
    for (std::size_t i = 0; i < model.source_size(); ++i) {
      double m = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < model.repro_size(); ++j) {
        m += q[j] * model.rho()[i][j];
        sq += q[j] * model.rho()[i][j] * model.rho()[i][j];
      }
      var += model.pmf()[i] * (sq - m * m);
    }
    return {0.0, 0.0, d_max_q(model, q), var};
  }
  std::vector<double> scratch(model.repro_size());
  double value = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < model.source_size(); ++i) {
    const auto row = detail::tilted_row(model.rho()[i], q, lambda, scratch);
    value += model.pmf()[i] * row.log_mgf;
    mean += model.pmf()[i] * row.mean;
    var += model.pmf()[i] * row.variance;
  }
  return {lambda, value, mean, var};
}

// Unique lambda < 0 with Lambda'(lambda) = D, for D strictly inside
// (d_min_q, d_max_q). Bracketed bisection with Newton refinement; the map
// lambda -> Lambda'(lambda) is nondecreasing.
inline double solve_lambda_for_d(const DiscreteModel& model, std::span<const double> q,
                                 double d_target, double tol = -1.0) {
  const double lo_bound = d_min_q(model, q);
  const double hi_bound = d_max_q(model, q);
  if (!(d_target > lo_bound && d_target < hi_bound))
    throw DistortionRangeError("D must lie strictly inside (d_min_q, d_max_q)", lo_bound,
                               hi_bound);
  if (tol <= 0.0) tol = 1e-10 * std::max(1.0, d_max(model).value);

  double lo = -1.0, hi = 0.0;
  while (lambda_eval(model, q, lo).first_deriv >= d_target) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e18)
      throw ConvergenceError("could not bracket lambda: Lambda' stays above D", d_target);
  }

  double lam = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const auto ev = lambda_eval(model, q, lam);
    const double resid = ev.first_deriv - d_target;
    if (std::abs(resid) <= tol) return lam;
    (resid < 0.0 ? lo : hi) = lam;
    double next = lam;
    if (ev.second_deriv > 0.0) next = lam - resid / ev.second_deriv;  // Newton
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);            // fall back
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(lam)))
      throw ConvergenceError("lambda bracket collapsed before reaching tolerance",
                             std::abs(resid));
    lam = next;
  }
  throw ConvergenceError("solve_lambda_for_d did not converge in 200 iterations",
                         std::abs(lambda_eval(model, q, lam).first_deriv - d_target));
}

// Fenchel-Legendre transform Lambda*_{P,Q}(D) = sup_{lambda<=0}[lambda D -
// Lambda(lambda)]; in bits this is the rate function R(P,Q,D).
inline LegendreEval legendre(const DiscreteModel& model, std::span<const double> q,
                             double d_target, double lambda_tol = -1.0) {
  LegendreEval out;
  out.D = d_target;
  if (d_target >= d_max_q(model, q)) return out;  // lambda = 0 optimal, value 0
  if (d_target <= d_min_q(model, q)) {
    out.value_nats = std::numeric_limits<double>::infinity();
    out.value_bits = out.value_nats;
    return out;
  }
  out.lambda_star = solve_lambda_for_d(model, q, d_target, lambda_tol);
  out.lambda_star_exists = true;
  out.value_nats = out.lambda_star * d_target - lambda_eval(model, q, out.lambda_star).value;
  out.value_bits = bits_from_nats(out.value_nats);
  return out;
}

}  // namespace rdcrit
