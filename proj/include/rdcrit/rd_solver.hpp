#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdcrit/criticality.hpp"
#include "rdcrit/errors.hpp"
#include "rdcrit/lagrangian.hpp"
#include "rdcrit/model.hpp"
#include "rdcrit/numeric.hpp"

namespace rdcrit {

struct BaOptions {
  std::size_t max_iters = 100000;
  double q_tol = 1e-13;          // sup-norm change of Q per sweep
  // Secondary stop on the relative change of Lambda per sweep. Off by
  // default: stopping on the objective alone can leave the output-marginal
  // residual near 1e-7, above the 1e-8 optimality gate.
  double gamma_rel_tol = 0.0;
  double support_clamp = 1e-15;  // components below this are zeroed at the end
  std::optional<std::vector<double>> initial_q;  // default: uniform
  std::vector<double>* gamma_trace = nullptr;    // per-sweep objective, for tests
  // Early stop once Q is within reference_tol of reference_q (degeneracy
  // probes only need basin membership, not full convergence).
  const std::vector<double>* reference_q = nullptr;
  double reference_tol = 1e-7;
};

// Fixed-slope optimum: Q maximizing Lambda_{P,Q}(lambda) and the induced
// point (D(lambda), R(D(lambda))) of the rate-distortion curve.
struct SlopeSolution {
  double lambda;
  std::vector<double> q;
  double gamma_nats;     // Lambda_{P,Q}(lambda) at the optimum, <= 0
  double d_of_lambda;    // Lambda'_{P,Q}(lambda)
  double rate_bits;      // (lambda D - gamma) / ln 2
  std::size_t iterations;
  bool converged;
};

// Alternating maximization of Lambda_{P,Q}(lambda) over Q: tilt the channel
// toward low distortion, W(j|i) prop. to Q_j e^{lambda rho_ij}, then replace
// Q by the output marginal. The objective is nondecreasing sweep to sweep.
inline SlopeSolution ba_fixed_slope(const DiscreteModel& model, double lambda,
                                    const BaOptions& opts = {}) {
  if (lambda > 0.0) throw std::domain_error("lambda must be <= 0");
  const std::size_t ks = model.source_size(), kr = model.repro_size();
  std::vector<double> q;
  if (opts.initial_q) {
    detail::require_pmf(model, *opts.initial_q);
    q = *opts.initial_q;
  } else {
    q.assign(kr, 1.0 / static_cast<double>(kr));
  }

  std::vector<double> scratch(kr), next(kr);
  double gamma_prev = -std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < opts.max_iters; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    double gamma = 0.0;
    for (std::size_t i = 0; i < ks; ++i) {
      const double log_mgf =
          detail::tilted_row(model.rho()[i], q, lambda, scratch).log_mgf;
      gamma += model.pmf()[i] * log_mgf;
      for (std::size_t j = 0; j < kr; ++j) {
        if (q[j] <= 0.0) continue;
        next[j] += model.pmf()[i] *
                   std::exp(std::log(q[j]) + lambda * model.rho()[i][j] - log_mgf);
      }
    }
    double mass = 0.0;
    for (double v : next) mass += v;
    for (double& v : next) v /= mass;

    if (opts.gamma_trace) opts.gamma_trace->push_back(gamma);
    if (gamma + 1e-12 * std::max(1.0, std::abs(gamma)) < gamma_prev)
      throw ConvergenceError("fixed-slope iteration objective decreased", gamma_prev - gamma);
    const double q_change = sup_norm_diff(q, next);
    const bool gamma_settled =
        opts.gamma_rel_tol > 0.0 && std::isfinite(gamma_prev) &&
        std::abs(gamma - gamma_prev) <= opts.gamma_rel_tol * std::max(1.0, std::abs(gamma));
    q.swap(next);
    gamma_prev = gamma;
    const bool near_reference =
        opts.reference_q && sup_norm_diff(q, *opts.reference_q) <= opts.reference_tol;
    if (q_change <= opts.q_tol || gamma_settled || near_reference) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("fixed-slope iteration did not converge", sup_norm_diff(q, next));
  }

  double mass = 0.0;
  for (double& v : q) {
    if (v < opts.support_clamp) v = 0.0;
    mass += v;
  }
  for (double& v : q) v /= mass;

  const auto ev = lambda_eval(model, q, lambda);
  SlopeSolution out;
  out.lambda = lambda;
  out.q = std::move(q);
  out.gamma_nats = ev.value;
  out.d_of_lambda = ev.first_deriv;
  out.rate_bits = bits_from_nats(lambda * ev.first_deriv - ev.value);
  out.iterations = iter;
  out.converged = converged;
  return out;
}

struct KKTReport {
  double cond_a_residual;             // |Lambda'(lambda*) - D|
  double cond_b_residual;             // sup_j |second W-marginal - Q*| on support
  std::vector<std::pair<std::size_t, double>> cond_c_values;  // off-support mass ratios
  std::vector<double> b_constants;    // B_i = P_i / sum_j Q*_j e^{lambda* rho_ij}
  double tol;
  bool passed;
};

// Optimality certificate check: (a) the slope matches the distortion,
// (b) Q* reproduces itself as the output marginal of the tilted channel,
// (c) zero-mass letters would not gain mass (ratio <= 1).
inline KKTReport verify_kkt(const DiscreteModel& model, std::span<const double> q,
                            double lambda, double distortion, double tol = 1e-8) {
  KKTReport report{};
  report.tol = tol;
  const std::size_t ks = model.source_size(), kr = model.repro_size();
  std::vector<double> scratch(kr), marginal(kr, 0.0), off_support(kr, 0.0);
  report.b_constants.resize(ks);
  double d_of_lambda = 0.0;
  for (std::size_t i = 0; i < ks; ++i) {
    const auto row = detail::tilted_row(model.rho()[i], q, lambda, scratch);
    d_of_lambda += model.pmf()[i] * row.mean;
    report.b_constants[i] = model.pmf()[i] * std::exp(-row.log_mgf);
    for (std::size_t j = 0; j < kr; ++j) {
      const double tilt = std::exp(lambda * model.rho()[i][j] - row.log_mgf);
      if (q[j] > 0.0)
        marginal[j] += model.pmf()[i] * q[j] * tilt;
      else
        off_support[j] += model.pmf()[i] * tilt;
    }
  }
  report.cond_a_residual = std::abs(d_of_lambda - distortion);
  report.cond_b_residual = 0.0;
  bool cond_c_ok = true;
  for (std::size_t j = 0; j < kr; ++j) {
    if (q[j] > 0.0) {
      report.cond_b_residual = std::max(report.cond_b_residual, std::abs(marginal[j] - q[j]));
    } else {
      report.cond_c_values.emplace_back(j, off_support[j]);
      cond_c_ok = cond_c_ok && off_support[j] <= 1.0 + tol;
    }
  }
  report.passed =
      report.cond_a_residual <= tol && report.cond_b_residual <= tol && cond_c_ok;
  return report;
}

struct SolveOptions {
  double d_tol = -1.0;  // default 1e-9 * d_max(model)
  double epsilon_bits = kDefaultEpsilonBits;
  double kkt_tol = 1e-8;
  bool check_degenerate = true;
  BaOptions ba;
};

// Full solution at one distortion level.
struct RDSolution {
  double distortion;
  double rate_bits;
  double lambda_star;
  std::vector<double> q_star;
  std::vector<double> f_bits;
  double sigma2_bits2;
  double spread_bits;
  KKTReport kkt;
  Verdict verdict;
  bool dual_degenerate;       // two BA restarts disagreed by > 1e-6
  bool dual_probe_converged;  // false: the restart ran out of sweeps, no flag
  std::size_t iterations;
};

namespace detail {
inline std::string format_range_msg(const char* msg, double d_max_value) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s (D_max = %.12g)", msg, d_max_value);
  return buf;
}
}  // namespace detail

// R(D) and its certificate via the dual: bisect the slope lambda against the
// monotone map lambda -> D(lambda) from ba_fixed_slope, then evaluate
// R = (lambda D - Gamma(lambda)) / ln 2 and attach f, sigma^2, KKT, verdict.
inline RDSolution solve_at_distortion(const DiscreteModel& model, double distortion,
                                      const SolveOptions& opts = {}) {
  const double dmax = d_max(model).value;
  if (distortion <= 0.0)
    throw DistortionRangeError("D <= 0 is the lossless regime; use lossless_f", 0.0, dmax);
  if (distortion >= dmax)
    throw DistortionRangeError(
        detail::format_range_msg("rate is zero at or above D_max", dmax), 0.0, dmax);
  const double d_tol = opts.d_tol > 0.0 ? opts.d_tol : 1e-9 * dmax;

  std::size_t total_iters = 0;
  auto eval = [&](double lambda) {
    SlopeSolution s = ba_fixed_slope(model, lambda, opts.ba);
    total_iters += s.iterations;
    return s;
  };

  // D(lambda) -> d_max as lambda -> 0-, so this upper end always brackets.
  double hi = -1e-12 / std::max(1.0, model.max_distortion());
  double lo = -1.0;
  SlopeSolution at_lo = eval(lo);
  while (at_lo.d_of_lambda >= distortion) {
    lo *= 2.0;
    if (lo < -1e18)
      throw ConvergenceError("could not bracket lambda*: D(lambda) stays above target",
                             at_lo.d_of_lambda - distortion);
    at_lo = eval(lo);
  }

  SlopeSolution best = std::move(at_lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    SlopeSolution s = eval(mid);
    const double resid = s.d_of_lambda - distortion;
    if (std::abs(resid) <= d_tol) {
      best = std::move(s);
      break;
    }
    if (resid < 0.0) {
      lo = mid;
      best = std::move(s);  // smallest bracketing lambda on plateaus
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(lo))) break;
  }

  RDSolution out;
  out.distortion = distortion;
  out.lambda_star = best.lambda;
  out.q_star = best.q;
  out.rate_bits = bits_from_nats(best.lambda * distortion - best.gamma_nats);
  out.f_bits = f_values(model, out.q_star, out.lambda_star, distortion, out.rate_bits);
  out.sigma2_bits2 = minimal_coding_variance(model, out.f_bits);
  const auto constancy = constancy_test(model, out.q_star, out.lambda_star, opts.epsilon_bits);
  out.spread_bits = constancy.spread_bits;
  double max_abs_f = 0.0;
  for (double f : out.f_bits) max_abs_f = std::max(max_abs_f, std::abs(f));
  out.verdict = max_abs_f <= opts.epsilon_bits ? Verdict::Critical : Verdict::Generic;
  out.kkt = verify_kkt(model, out.q_star, out.lambda_star, distortion, opts.kkt_tol);
  out.iterations = total_iters;

  out.dual_degenerate = false;
  out.dual_probe_converged = true;
  if (opts.check_degenerate) {
    BaOptions tilted = opts.ba;
    std::vector<double> q0(model.repro_size());
    double mass = 0.0;
    for (std::size_t j = 0; j < q0.size(); ++j) {
      q0[j] = 1.0 + 0.1 * static_cast<double>(j + 1) / static_cast<double>(q0.size());
      mass += q0[j];
    }
    for (double& v : q0) v /= mass;
    tilted.initial_q = std::move(q0);
    tilted.reference_q = &out.q_star;
    try {
      const SlopeSolution restart = ba_fixed_slope(model, out.lambda_star, tilted);
      out.dual_degenerate = sup_norm_diff(restart.q, out.q_star) > 1e-6;
    } catch (const ConvergenceError&) {
      out.dual_probe_converged = false;  // advisory probe, never fails the solve
    }
  }
  return out;
}

struct CurvePoint {
  double distortion;
  double rate_bits = 0.0;
  double lambda_star = 0.0;
  double sigma2_bits2 = 0.0;
  Verdict verdict = Verdict::Generic;
  std::string error;  // empty on success
};

// Pointwise solves over a distortion grid; rows with solver failures carry
// the error text instead of aborting the sweep.
inline std::vector<CurvePoint> rd_curve(const DiscreteModel& model,
                                        std::vector<double> d_grid,
                                        const SolveOptions& opts = {}) {
  std::sort(d_grid.begin(), d_grid.end());
  std::vector<CurvePoint> rows;
  rows.reserve(d_grid.size());
  for (double d : d_grid) {
    CurvePoint row;
    row.distortion = d;
    try {
      RDSolution sol = solve_at_distortion(model, d, opts);
      row.rate_bits = sol.rate_bits;
      row.lambda_star = sol.lambda_star;
      row.sigma2_bits2 = sol.sigma2_bits2;
      row.verdict = sol.verdict;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct SlopeConsistency {
  double lambda_star;
  double fd_slope_nats;  // ln2 * (R(D+h) - R(D-h)) / (2h)
  double rel_gap;
};

// Cross-check lambda* = ln2 * R'(D) against a central finite difference.
inline SlopeConsistency slope_consistency(const DiscreteModel& model, double distortion,
                                          double h, const SolveOptions& opts = {}) {
  const RDSolution center = solve_at_distortion(model, distortion, opts);
  const RDSolution left = solve_at_distortion(model, distortion - h, opts);
  const RDSolution right = solve_at_distortion(model, distortion + h, opts);
  SlopeConsistency out;
  out.lambda_star = center.lambda_star;
  out.fd_slope_nats = kLn2 * (right.rate_bits - left.rate_bits) / (2.0 * h);
  out.rel_gap = std::abs(out.lambda_star - out.fd_slope_nats) /
                std::max(1e-30, std::abs(out.lambda_star));
  return out;
}

// Criticality classification at one distortion level.
struct CriticalityReport {
  std::vector<double> f_bits;
  std::vector<double> f_tilde_bits;  // f + R(D); mean under P equals R(D)
  double max_abs_f;
  double sigma2_bits2;
  double spread_bits;
  Verdict verdict;
  double epsilon_used;
  Theorem1Prediction theorem1;
};

struct ClassifyResult {
  RDSolution solution;
  CriticalityReport report;
};

inline ClassifyResult classify(const DiscreteModel& model, double distortion,
                               double epsilon_bits = kDefaultEpsilonBits,
                               SolveOptions opts = {}) {
  opts.epsilon_bits = epsilon_bits;
  ClassifyResult out{solve_at_distortion(model, distortion, opts), {}};
  auto& rep = out.report;
  rep.f_bits = out.solution.f_bits;
  rep.f_tilde_bits = out.solution.f_bits;
  for (double& v : rep.f_tilde_bits) v += out.solution.rate_bits;
  rep.max_abs_f = 0.0;
  for (double f : rep.f_bits) rep.max_abs_f = std::max(rep.max_abs_f, std::abs(f));
  rep.sigma2_bits2 = out.solution.sigma2_bits2;
  rep.spread_bits = out.solution.spread_bits;
  rep.verdict = out.solution.verdict;
  rep.epsilon_used = epsilon_bits;
  rep.theorem1 = theorem1_predict(model);
  return out;
}

}  // namespace rdcrit
