#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "rdcrit/builtin.hpp"
#include "rdcrit/model.hpp"

using namespace rdcrit;

TEST_CASE("normalize_distortion shifts each row to a zero minimum") {
  SECTION("squared error at x=0 with reproduction points -1, +1") {
    auto [out, offsets] = normalize_distortion({{1.0, 1.0}});
    CHECK(out[0][0] == 0.0);
    CHECK(out[0][1] == 0.0);
    CHECK(offsets[0] == 1.0);
  }
  SECTION("absolute distance at x=0 with reproduction points 1, 3, 5") {
    auto [out, offsets] = normalize_distortion({{1.0, 3.0, 5.0}});
    CHECK(out[0] == std::vector<double>{0.0, 2.0, 4.0});
    CHECK(offsets[0] == 1.0);
  }
  SECTION("Hamming matrix is already normalized") {
    auto [out, offsets] = normalize_distortion(hamming_matrix(3));
    CHECK(out == hamming_matrix(3));
    for (double o : offsets) CHECK(o == 0.0);
  }
  SECTION("rejects negative and non-finite entries") {
    CHECK_THROWS_AS(normalize_distortion({{0.0, -1.0}}), InvalidModelError);
    CHECK_THROWS_AS(normalize_distortion({{0.0, std::nan("")}}), InvalidModelError);
  }
  SECTION("idempotent on random matrices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> entry(0.0, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
      Matrix raw(3, std::vector<double>(4));
      for (auto& row : raw)
        for (double& v : row) v = entry(rng);
      auto [once, off1] = normalize_distortion(raw);
      auto [twice, off2] = normalize_distortion(once);
      CHECK(once == twice);
      for (double o : off2) CHECK(o == 0.0);
    }
  }
}

TEST_CASE("model construction enforces the invariants") {
  CHECK_THROWS_AS(DiscreteModel({"a", "b"}, {1.0, 0.0}, {"a", "b"}, hamming_matrix(2)),
                  InvalidModelError);
  CHECK_THROWS_AS(DiscreteModel({"a", "b"}, {0.6, 0.5}, {"a", "b"}, hamming_matrix(2)),
                  InvalidModelError);
  CHECK_THROWS_AS(DiscreteModel({"a"}, {1.0}, {}, Matrix{{}}), InvalidModelError);

  const auto five = five_model();
  const double alpha = std::log(3.0 * std::exp(1.0) / (4.0 - std::exp(1.0)));
  CHECK(five.max_distortion() == alpha);
  for (const auto& row : five.rho())
    CHECK(*std::min_element(row.begin(), row.end()) == 0.0);
}

TEST_CASE("d_max") {
  SECTION("uniform binary Hamming") {
    CHECK(d_max(binary_hamming(0.5)).value == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("k-ary uniform Hamming") {
    for (std::size_t k : {3u, 5u, 7u})
      CHECK(d_max(uniform_hamming(k)).value ==
            Catch::Approx((double(k) - 1.0) / double(k)).margin(1e-14));
  }
  SECTION("Example-5 model: tied first two columns beat the third") {
    const auto model = five_model();
    const double alpha = std::log(3.0 * std::exp(1.0) / (4.0 - std::exp(1.0)));
    const auto result = d_max(model);
    CHECK(result.value == Catch::Approx((4.0 + 5.0 * alpha) / 13.0).margin(1e-14));
    CHECK(result.value == Catch::Approx(1.0194).margin(1e-4));
    CHECK(result.column == 0);  // tie between columns 0 and 1, lowest wins
    const double col3 = 8.0 * alpha / 13.0;
    CHECK(col3 == Catch::Approx(1.1388).margin(1e-4));
    CHECK(result.value < col3);
  }
  SECTION("0 <= d_max <= M on random models") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 25; ++rep) {
      const auto model = oracle::random_model(rng, 2 + rep % 3, 2 + rep % 4);
      const auto result = d_max(model);
      CHECK(result.value >= 0.0);
      CHECK(result.value <= model.max_distortion());
    }
  }
}

TEST_CASE("d_min_q and d_max_q") {
  const auto binary = binary_hamming(0.5);
  const std::vector<double> q_half = {0.5, 0.5};
  SECTION("full support over a normalized model gives d_min_q = 0") {
    CHECK(d_min_q(binary, q_half) == 0.0);
    CHECK(d_min_q(five_model(), std::vector<double>{0.2, 0.3, 0.5}) == 0.0);
  }
  SECTION("binary Hamming, uniform Q") {
    CHECK(d_max_q(binary, q_half) == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("degenerate Q collapses the interval") {
    const auto skewed = binary_hamming(0.3);
    const std::vector<double> q_point = {1.0, 0.0};
    CHECK(d_min_q(skewed, q_point) == Catch::Approx(0.3).margin(1e-15));
    CHECK(d_max_q(skewed, q_point) == Catch::Approx(0.3).margin(1e-15));
  }
  SECTION("rejects non-pmf Q") {
    CHECK_THROWS_AS(d_min_q(binary, std::vector<double>{0.4, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(d_max_q(binary, std::vector<double>{1.4, -0.4}), std::invalid_argument);
  }
  SECTION("d_min_q <= d_max_q for random models and Q") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 30; ++rep) {
      const auto model = oracle::random_model(rng, 2 + rep % 4, 2 + rep % 3);
      const auto q = oracle::random_pmf(rng, model.repro_size());
      CHECK(d_min_q(model, q) <= d_max_q(model, q) + 1e-15);
    }
  }
}

TEST_CASE("is_permutation_measure") {
  CHECK(is_permutation_measure(uniform_hamming(3)).is_permutation);
  SECTION("Example-5 matrix is not a permutation measure") {
    const auto check = is_permutation_measure(five_model());
    CHECK_FALSE(check.is_permutation);
    REQUIRE(check.witness.has_value());
  }
  SECTION("row multisets differ: (0,1,2),(1,0,2),(2,2,0)") {
    DiscreteModel m(index_labels(3), {1.0 / 3, 1.0 / 3, 1.0 / 3}, index_labels(3),
                    {{0, 1, 2}, {1, 0, 2}, {2, 2, 0}});
    const auto check = is_permutation_measure(m);
    CHECK_FALSE(check.is_permutation);
    REQUIRE(check.witness.has_value());
    CHECK(check.witness->second == 2);  // first failing pair is (0, 2)
  }
  SECTION("non-square matrix reports its reason") {
    DiscreteModel m(index_labels(2), {0.5, 0.5}, index_labels(3),
                    {{0, 1, 2}, {1, 0, 2}});
    const auto check = is_permutation_measure(m);
    CHECK_FALSE(check.is_permutation);
    CHECK(check.reason == "not square");
  }
  SECTION("invariant under simultaneous row/column relabeling") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t k = 3 + rep % 4;
      const auto model = oracle::random_permutation_model(rng, k);
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix relabeled(k, std::vector<double>(k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) relabeled[i][j] = model.rho()[perm[i]][perm[j]];
      DiscreteModel shuffled(index_labels(k), model.pmf(), index_labels(k), relabeled);
      CHECK(is_permutation_measure(shuffled).is_permutation);
    }
  }
}

TEST_CASE("is_uniform") {
  CHECK(is_uniform(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK_FALSE(is_uniform(five_model().pmf()));
  CHECK(is_uniform(std::vector<double>{0.5 + 1e-13, 0.5 - 1e-13}, 1e-9));
}

TEST_CASE("symmetry advisory") {
  const auto five = symmetry_advisory(five_model());
  CHECK(five.symmetric);
  CHECK(five.zero_diagonal_only);
  DiscreteModel asym(index_labels(2), {0.5, 0.5}, index_labels(2), {{0.0, 1.0}, {2.0, 0.0}});
  CHECK_FALSE(symmetry_advisory(asym).symmetric);
}
