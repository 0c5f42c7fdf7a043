#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rdcrit/model.hpp"

namespace rdcrit {

// Ready-made models used by the CLI's --example flag and throughout the
// tests.

inline Matrix hamming_matrix(std::size_t k) {
  Matrix rho(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) rho[i][i] = 0.0;
  return rho;
}

inline std::vector<std::string> index_labels(std::size_t k) {
  std::vector<std::string> labels(k);
  for (std::size_t i = 0; i < k; ++i) labels[i] = std::to_string(i);
  return labels;
}

// Bernoulli(p) source with Hamming distortion.
inline DiscreteModel binary_hamming(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidModelError("binary model needs p in (0,1)");
  return DiscreteModel(index_labels(2), {1.0 - p, p}, index_labels(2), hamming_matrix(2));
}

inline DiscreteModel uniform_hamming(std::size_t k) {
  return DiscreteModel(index_labels(k), std::vector<double>(k, 1.0 / static_cast<double>(k)),
                       index_labels(k), hamming_matrix(k));
}

// Three-letter source with P = (4/13, 4/13, 5/13) and the distortion matrix
//   [ 0      1      alpha ]
//   [ 1      0      alpha ]      alpha = log_e(3e / (4 - e)),
//   [ alpha  alpha  0     ]
// which is critical exactly at the distortion solved by lambda* = -1.
inline DiscreteModel five_model() {
  const double e = std::exp(1.0);
  const double alpha = std::log(3.0 * e / (4.0 - e));
  Matrix rho = {{0.0, 1.0, alpha}, {1.0, 0.0, alpha}, {alpha, alpha, 0.0}};
  return DiscreteModel(index_labels(3), {4.0 / 13.0, 4.0 / 13.0, 5.0 / 13.0}, index_labels(3),
                       rho);
}

// Default pmf for the lossless example; any strictly positive pmf works.
inline DiscreteModel lossless_model(std::vector<double> pmf = {0.5, 0.25, 0.25}) {
  const std::size_t k = pmf.size();
  return DiscreteModel(index_labels(k), std::move(pmf), index_labels(k), hamming_matrix(k));
}

// Squared error on [-2,2] with reproduction points +/-1.
inline ContinuousModel mse2_model(std::size_t grid_size = 400) {
  return ContinuousModel(-2.0, 2.0, DensitySpec{"uniform"}, {-1.0, 1.0},
                         DistortionFamily::SquaredError, grid_size);
}

// Absolute error on [0,6] with reproduction points 1, 3, 5.
inline ContinuousModel l1three_model(std::size_t grid_size = 600) {
  return ContinuousModel(0.0, 6.0, DensitySpec{"uniform"}, {1.0, 3.0, 5.0},
                         DistortionFamily::AbsoluteError, grid_size);
}

}  // namespace rdcrit
