#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "rdcrit/builtin.hpp"
#include "rdcrit/lagrangian.hpp"

using namespace rdcrit;

namespace {
const std::vector<double> kHalf = {0.5, 0.5};
}

TEST_CASE("lambda_eval closed forms") {
  SECTION("lambda = 0 is exact: value 0, derivative d_max_q") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
      const auto model = oracle::random_model(rng, 3, 3);
      const auto q = oracle::random_pmf(rng, 3);
      const auto ev = lambda_eval(model, q, 0.0);
      CHECK(ev.value == 0.0);
      CHECK(ev.first_deriv == d_max_q(model, q));
      CHECK(ev.second_deriv >= -1e-12);
    }
  }
  SECTION("binary Hamming, uniform Q: Lambda = ln((1+e^l)/2)") {
    const auto model = binary_hamming(0.5);
    for (double lambda : {-0.25, -1.0, -3.0, -10.0}) {
      const auto ev = lambda_eval(model, kHalf, lambda);
      CHECK(ev.value ==
            Catch::Approx(std::log((1.0 + std::exp(lambda)) / 2.0)).margin(1e-14));
      CHECK(ev.first_deriv ==
            Catch::Approx(std::exp(lambda) / (1.0 + std::exp(lambda))).margin(1e-14));
    }
  }
  SECTION("Example-5 model at lambda = -1") {
    const auto model = five_model();
    const std::vector<double> q = model.pmf();  // Q* = P here
    const double e = std::exp(1.0);
    const double row_sum = (7.0 * e + 32.0) / (39.0 * e);  // every tilted row mass
    const auto ev = lambda_eval(model, q, -1.0);
    CHECK(ev.value == Catch::Approx(std::log(row_sum)).margin(1e-14));
    CHECK(ev.first_deriv == Catch::Approx(0.4307).margin(1e-4));
  }
  SECTION("domain and argument errors") {
    const auto model = binary_hamming(0.5);
    CHECK_THROWS_AS(lambda_eval(model, kHalf, 0.5), std::domain_error);
    CHECK_THROWS_AS(lambda_eval(model, std::vector<double>{0.0, 0.0}, -1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("lambda_eval derivative consistency and monotonicity") {
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  for (int rep = 0; rep < 12; ++rep) {
    const auto model = oracle::random_model(rng, 2 + rep % 3, 2 + rep % 3);
    const auto q = oracle::random_pmf(rng, model.repro_size());
    std::uniform_real_distribution<double> lam_dist(-4.0, -0.1);
    const double lambda = lam_dist(rng);

    const auto ev = lambda_eval(model, q, lambda);
    const auto lo = lambda_eval(model, q, lambda - h);
    const auto hi = lambda_eval(model, q, lambda + h);
    const double fd1 = (hi.value - lo.value) / (2.0 * h);
    const double fd2 = (hi.first_deriv - lo.first_deriv) / (2.0 * h);
    CHECK(std::abs(fd1 - ev.first_deriv) <= 1e-6 * std::max(1.0, std::abs(ev.first_deriv)));
    CHECK(std::abs(fd2 - ev.second_deriv) <= 1e-6 * std::max(1.0, std::abs(ev.second_deriv)));

    // Lambda' nondecreasing in lambda.
    CHECK(lo.first_deriv <= hi.first_deriv + 1e-10);
    CHECK(lambda_eval(model, q, 0.0).first_deriv == d_max_q(model, q));
  }
}

TEST_CASE("lambda_eval limits at large negative slopes") {
  // Structured models have distortion gaps of order 1, so -100*scale is deep
  // in the d_min_q regime.
  for (const auto& model : {binary_hamming(0.3), five_model(), uniform_hamming(4)}) {
    const std::vector<double> q(model.repro_size(), 1.0 / double(model.repro_size()));
    const double scale = std::max(1.0, model.max_distortion());
    CHECK(lambda_eval(model, q, -100.0 * scale).first_deriv ==
          Catch::Approx(d_min_q(model, q)).margin(1e-6));
  }
}

TEST_CASE("lambda_eval survives extreme slopes") {
  const auto model = five_model();
  const double lambda = -1e4 * model.max_distortion();
  const auto ev = lambda_eval(model, model.pmf(), lambda);
  CHECK(std::isfinite(ev.value));
  CHECK(ev.first_deriv == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("solve_lambda_for_d") {
  SECTION("Example 5: D near 0.4307 inverts to lambda near -1") {
    const auto model = five_model();
    const double lambda = solve_lambda_for_d(model, model.pmf(), 0.4307);
    CHECK(std::abs(lambda + 1.0) <= 1e-3);
  }
  SECTION("binary closed form") {
    const auto model = binary_hamming(0.5);
    const double lambda = solve_lambda_for_d(model, kHalf, 0.25);
    CHECK(lambda == Catch::Approx(std::log(1.0 / 3.0)).margin(1e-9));
  }
  SECTION("residual meets the tolerance") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 10; ++rep) {
      const auto model = oracle::random_model(rng, 3, 3);
      const auto q = oracle::random_pmf(rng, 3);
      const double lo = d_min_q(model, q), hi = d_max_q(model, q);
      const double d = lo + 0.37 * (hi - lo);
      const double lambda = solve_lambda_for_d(model, q, d);
      CHECK(lambda < 0.0);
      CHECK(std::abs(lambda_eval(model, q, lambda).first_deriv - d) <=
            1e-10 * std::max(1.0, d_max(model).value));
    }
  }
  SECTION("boundary targets are rejected with the interval") {
    const auto model = binary_hamming(0.5);
    const double hi = d_max_q(model, kHalf);
    try {
      solve_lambda_for_d(model, kHalf, hi);
      FAIL("expected DistortionRangeError");
    } catch (const DistortionRangeError& e) {
      CHECK(e.lower() == 0.0);
      CHECK(e.upper() == hi);
    }
    CHECK_THROWS_AS(solve_lambda_for_d(model, kHalf, 0.0), DistortionRangeError);
  }
}

TEST_CASE("legendre") {
  const auto model = binary_hamming(0.5);
  SECTION("beyond d_max_q the value is zero") {
    const auto ev = legendre(model, kHalf, 0.6);
    CHECK(ev.value_bits == 0.0);
    CHECK_FALSE(ev.lambda_star_exists);
  }
  SECTION("at or below d_min_q the supremum diverges") {
    CHECK(std::isinf(legendre(model, std::vector<double>{1.0, 0.0}, 0.2).value_nats));
  }
  SECTION("symmetric binary: 1 - h2(D) bits") {
    const auto ev = legendre(model, kHalf, 0.25);
    REQUIRE(ev.lambda_star_exists);
    CHECK(ev.value_bits == Catch::Approx(1.0 - binary_entropy(0.25)).margin(1e-9));
    CHECK(ev.value_nats ==
          Catch::Approx(ev.lambda_star * 0.25 - lambda_eval(model, kHalf, ev.lambda_star).value)
              .margin(1e-14));
  }
  SECTION("Example 5 with Q*: rate matches the certificate identity") {
    const auto five = five_model();
    const auto ev = legendre(five, five.pmf(), 0.4307);
    REQUIRE(ev.lambda_star_exists);
    const double expected =
        (-0.4307 - lambda_eval(five, five.pmf(), -1.0).value) / kLn2;
    CHECK(ev.value_bits == Catch::Approx(expected).margin(1e-3));
    CHECK(ev.value_bits == Catch::Approx(0.4336).margin(1e-3));
  }
  SECTION("nonnegative on random models") {
    std::mt19937_64 rng(83);
    for (int rep = 0; rep < 10; ++rep) {
      const auto m = oracle::random_model(rng, 3, 3);
      const auto q = oracle::random_pmf(rng, 3);
      const double hi = d_max_q(m, q);
      for (double frac : {0.2, 0.6, 1.1}) {
        const auto ev = legendre(m, q, frac * hi);
        CHECK(ev.value_nats >= -1e-12);
      }
    }
  }
  SECTION("convex and nonincreasing in D") {
    const auto skew = binary_hamming(0.3);
    const std::vector<double> q = {0.8, 0.2};
    std::vector<double> grid, values;
    for (double d = 0.05; d < 0.3; d += 0.025) grid.push_back(d);
    for (double d : grid) values.push_back(legendre(skew, q, d).value_bits);
    for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1] + 1e-12);
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
      CHECK(values[i] <= 0.5 * (values[i - 1] + values[i + 1]) + 1e-10);
  }
}
