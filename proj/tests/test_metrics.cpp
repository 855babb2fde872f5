#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bwpred/metrics.hpp"
#include "bwpred/rng.hpp"

using namespace bwpred;

TEST_CASE("perfect predictions give all-zero metrics") {
  std::vector<double> v{0.1, 0.5, 0.9};
  Metrics m = compute_metrics(v, v);
  REQUIRE(m.bias == 0.0);
  REQUIRE(m.mae == 0.0);
  REQUIRE(m.mse == 0.0);
  REQUIRE(m.rmse == 0.0);
}

TEST_CASE("constant error shows up in every metric") {
  std::vector<double> actual{0.1, 0.2, 0.3};
  std::vector<double> pred{0.2, 0.3, 0.4};
  Metrics m = compute_metrics(pred, actual);
  REQUIRE(m.bias == Catch::Approx(0.1));
  REQUIRE(m.mae == Catch::Approx(0.1));
  REQUIRE(m.mse == Catch::Approx(0.01));
  REQUIRE(m.rmse == Catch::Approx(0.1));
}

TEST_CASE("metrics equal an independent brute-force recomputation") {
  RngStream rng(31);
  for (int rep = 0; rep < 1000; ++rep) {
    std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 100));
    std::vector<double> pred(n), actual(n);
    for (double& v : pred) v = rng.uniform(0, 1);
    for (double& v : actual) v = rng.uniform(0, 1);
    Metrics m = compute_metrics(pred, actual);

    double bias = 0, mae = 0, mse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = pred[i] - actual[i];
      bias += d;
      mae += std::fabs(d);
      mse += d * d;
    }
    bias /= static_cast<double>(n);
    mae /= static_cast<double>(n);
    mse /= static_cast<double>(n);
    REQUIRE(m.bias == Catch::Approx(bias).margin(1e-12));
    REQUIRE(m.mae == Catch::Approx(mae).margin(1e-12));
    REQUIRE(m.mse == Catch::Approx(mse).margin(1e-12));
    // structural identities: rmse is the correctly rounded sqrt of mse
    REQUIRE(m.rmse == std::sqrt(m.mse));
    REQUIRE(std::fabs(m.rmse * m.rmse - m.mse) <= 1e-15 * std::max(1.0, m.mse));
    REQUIRE(m.mae <= m.rmse + 1e-15);
    REQUIRE(m.mse >= m.bias * m.bias - 1e-15);
  }
}

TEST_CASE("adding a constant to predictions shifts bias by exactly that constant") {
  RngStream rng(8);
  std::vector<double> pred(50), actual(50);
  for (double& v : pred) v = rng.uniform(0, 1);
  for (double& v : actual) v = rng.uniform(0, 1);
  Metrics base = compute_metrics(pred, actual);
  double c = 0.125;  // exactly representable
  std::vector<double> shifted = pred;
  for (double& v : shifted) v += c;
  Metrics m = compute_metrics(shifted, actual);
  REQUIRE(m.bias == Catch::Approx(base.bias + c).margin(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  REQUIRE_THROWS(compute_metrics({}, {}));
  REQUIRE_THROWS(compute_metrics({0.1}, {0.1, 0.2}));
}
