#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qrc/features.hpp"

using namespace qrc;

TEST_CASE("feature counts match the closed-form sizes", "[features]") {
  CHECK(feature_count(1, RegressionMode::linear) == 4);
  CHECK(feature_count(3, RegressionMode::linear) == 8);
  CHECK(feature_count(5, RegressionMode::linear) == 12);
  CHECK(feature_count(1, RegressionMode::polynomial) == 14);
  CHECK(feature_count(3, RegressionMode::polynomial) == 44);
  CHECK(feature_count(5, RegressionMode::polynomial) == 90);

  for (int n = 1; n <= 8; ++n) {
    int m = 2 * n + 2;
    // combinatorial enumeration: m linear + C(m,2) cross + m squares
    int quadratics = 0;
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) ++quadratics;
    }
    CHECK(feature_count(n, RegressionMode::linear) == m);
    CHECK(feature_count(n, RegressionMode::polynomial) == m + quadratics);
    CHECK(feature_count(n, RegressionMode::polynomial) ==
          2 * n * n + 7 * n + 5);
  }
}

TEST_CASE("linear features carry the bias and the sample in order",
          "[features]") {
  RealVector f = linear_features({0.5, -0.25, 2.0, 1.0});
  REQUIRE(f.size() == 5);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == 0.5);
  CHECK(f(2) == -0.25);
  CHECK(f(3) == 2.0);
  CHECK(f(4) == 1.0);

  RealVector zero = linear_features({0.0, 0.0, 0.0, 0.0});
  CHECK(zero(0) == 1.0);
  CHECK(zero.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("polynomial features enumerate all distinct quadratics",
          "[features]") {
  RealVector f = poly_features({1.0, 2.0});
  REQUIRE(f.size() == 6);
  CHECK(f(0) == 1.0);  // bias
  CHECK(f(1) == 1.0);  // v1
  CHECK(f(2) == 2.0);  // v2
  CHECK(f(3) == 1.0);  // v1*v1
  CHECK(f(4) == 2.0);  // v1*v2
  CHECK(f(5) == 4.0);  // v2*v2
}

TEST_CASE("polynomial features match brute-force pair enumeration",
          "[features]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    int m = 2 + static_cast<int>(rng() % 11);
    std::vector<double> v(m);
    for (double& x : v) x = u(rng);
    RealVector f = poly_features(v);
    REQUIRE(f.size() == 1 + m + m * (m + 1) / 2);
    int pos = 1 + m;
    for (int a = 0; a < m; ++a) {
      CHECK(f(1 + a) == v[a]);
      for (int b = a; b < m; ++b) CHECK(f(pos++) == v[a] * v[b]);
    }
  }
}

TEST_CASE("equal inputs produce identical feature vectors", "[features]") {
  std::vector<double> v{0.3, -0.7, 0.1, 0.9};
  CHECK(poly_features(v) == poly_features(v));
  CHECK(linear_features(v) == linear_features(v));
}

TEST_CASE("feature names align with the feature layout", "[features]") {
  std::vector<std::string> obs{"Q", "P", "sx1", "sy1"};
  auto lin = feature_names(obs, RegressionMode::linear);
  REQUIRE(static_cast<int>(lin.size()) ==
          feature_count(1, RegressionMode::linear) + 1);
  CHECK(lin[0] == "bias");
  CHECK(lin[1] == "Q");
  CHECK(lin[4] == "sy1");

  auto poly = feature_names(obs, RegressionMode::polynomial);
  REQUIRE(static_cast<int>(poly.size()) ==
          feature_count(1, RegressionMode::polynomial) + 1);
  CHECK(poly[5] == "Q*Q");
  CHECK(poly[6] == "Q*P");
  CHECK(poly.back() == "sy1*sy1");
}
