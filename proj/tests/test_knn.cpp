#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "faceverify/knn.hpp"
#include "support/oracles.hpp"

using namespace faceverify;

TEST_CASE("nearest-neighbour fit validates its inputs", "[knn]") {
  CHECK_THROWS_AS(knn_fit({}, {}, 1), input_error);
  CHECK_THROWS_AS(knn_fit({{1.0}}, {1, -1}, 1), input_error);
  CHECK_THROWS_AS(knn_fit({{1.0}, {2.0}}, {1, -1}, 0), input_error);
  CHECK_THROWS_AS(knn_fit({{1.0}, {2.0}}, {1, -1}, 3), input_error);
  CHECK_THROWS_AS(knn_fit({{1.0}, {2.0}}, {1, 2}, 1), input_error);
  CHECK_THROWS_AS(knn_fit({{1.0}, {2.0, 3.0}}, {1, -1}, 1), input_error);

  const KnnModel m = knn_fit({{1.0}, {2.0}}, {1, -1}, 2);
  CHECK(m.dim == 1);
  CHECK(m.k == 2);
  CHECK_THROWS_AS(knn_decide(m, {1.0, 2.0}), input_error);
}

TEST_CASE("a gallery point is its own nearest neighbour", "[knn]") {
  const KnnModel m = knn_fit({{0.0, 0.0}, {5.0, 5.0}}, {1, -1}, 1);
  CHECK(knn_decide(m, {0.0, 0.0}) == 1);
  CHECK(knn_decide(m, {5.0, 5.0}) == -1);
}

TEST_CASE("k equal to the gallery size votes the global majority", "[knn]") {
  const KnnModel m =
      knn_fit({{0.0}, {10.0}, {20.0}, {30.0}, {40.0}}, {-1, 1, -1, -1, 1}, 5);
  // majority is -1 regardless of where the probe sits
  CHECK(knn_decide(m, {0.0}) == -1);
  CHECK(knn_decide(m, {40.0}) == -1);
}

TEST_CASE("three neighbours at distances one two three vote negative", "[knn]") {
  const KnnModel m = knn_fit({{1.0}, {2.0}, {3.0}}, {1, -1, -1}, 3);
  CHECK(knn_decide(m, {0.0}) == -1);
}

TEST_CASE("vote ties break on summed distance then the lower label", "[knn]") {
  // + neighbour closer: tie resolves positive
  const KnnModel closer = knn_fit({{1.0}, {-2.0}}, {1, -1}, 2);
  CHECK(knn_decide(closer, {0.0}) == 1);
  // equal distances: tie resolves to -1
  const KnnModel even = knn_fit({{-1.0}, {1.0}}, {1, -1}, 2);
  CHECK(knn_decide(even, {0.0}) == -1);
}

TEST_CASE("distance-weighted score on a hand example", "[knn]") {
  // neighbours at distance 1 (+1) and 2 (-1): weights 1/2 and 1/3,
  // score (1/2 - 1/3) / (1/2 + 1/3) = 0.2
  const KnnModel m = knn_fit({{1.0}, {2.0}}, {1, -1}, 2);
  CHECK(knn_score(m, {0.0}) == Catch::Approx(0.2).margin(1e-15));
}

TEST_CASE("score stays in the vote interval and tracks clear majorities", "[knn][prop]") {
  std::mt19937 rng(71);
  std::vector<Vec> samples;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    Vec v = oracles::random_vec(rng, 2, -1.0, 1.0);
    const int y = i % 2 == 0 ? 1 : -1;
    v[0] += y * 4.0;  // well-separated clusters around x = +-4
    samples.push_back(std::move(v));
    labels.push_back(y);
  }
  const KnnModel m = knn_fit(samples, labels, 3);
  for (int t = 0; t < 30; ++t) {
    const Vec probe = oracles::random_vec(rng, 2, -6.0, 6.0);
    const double s = knn_score(m, probe);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
  // deep inside a cluster every neighbour agrees, so the score saturates
  CHECK(knn_score(m, {4.0, 0.0}) == 1.0);
  CHECK(knn_score(m, {-4.0, 0.0}) == -1.0);
  CHECK(knn_decide(m, {4.0, 0.0}) == 1);
  CHECK(knn_decide(m, {-4.0, 0.0}) == -1);
}
