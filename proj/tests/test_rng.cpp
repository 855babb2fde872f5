#include <catch2/catch_amalgamated.hpp>

#include "bwpred/rng.hpp"

using namespace bwpred;

TEST_CASE("rng streams are deterministic per seed") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  RngStream c(43);
  REQUIRE(RngStream(42).next_u64() != c.next_u64());
}

TEST_CASE("derived streams are independent of the parent") {
  RngStream base(7);
  RngStream d1 = base.derive("flowgen");
  RngStream d2 = base.derive("telemetry");
  REQUIRE(d1.next_u64() != d2.next_u64());
  // deriving twice gives the same stream
  RngStream d1b = RngStream(7).derive("flowgen");
  d1b.next_u64();
  RngStream d1c = RngStream(7).derive("flowgen");
  d1c.next_u64();
  REQUIRE(RngStream(7).derive("flowgen").next_u64() ==
          RngStream(7).derive("flowgen").next_u64());
}

TEST_CASE("uniform stays in range") {
  RngStream r(1);
  for (int i = 0; i < 10000; ++i) {
    double v = r.uniform(2.0, 5.0);
    REQUIRE(v >= 2.0);
    REQUIRE(v < 5.0);
  }
}

TEST_CASE("uniform_int covers the inclusive range") {
  RngStream r(1);
  bool lo = false, hi = false;
  for (int i = 0; i < 10000; ++i) {
    std::int64_t v = r.uniform_int(3, 7);
    REQUIRE(v >= 3);
    REQUIRE(v <= 7);
    lo = lo || v == 3;
    hi = hi || v == 7;
  }
  REQUIRE(lo);
  REQUIRE(hi);
}

TEST_CASE("normal has roughly the requested moments") {
  RngStream r(5);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal(10.0, 2.0);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  REQUIRE(mean == Catch::Approx(10.0).margin(0.05));
  REQUIRE(var == Catch::Approx(4.0).margin(0.1));
}
