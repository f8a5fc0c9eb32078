#include <catch2/catch_amalgamated.hpp>

#include <certrl/confidence.hpp>

#include <cmath>
#include <vector>

using namespace certrl;

TEST_CASE("iterated_log floors its argument at e") {
  CHECK(iterated_log(1.0) == 0.0);
  CHECK(iterated_log(0.0) == 0.0);
  CHECK(iterated_log(2.718281828459045) == 0.0);
  CHECK_THAT(iterated_log(10.0), Catch::Matchers::WithinAbs(0.834032445247956, 1e-15));
}

TEST_CASE("union_delta frozen example") {
  // S=A=H=1: 5+4+4 = 13 events, 0.13/13 = 0.01.
  CHECK_THAT(union_delta(1, 1, 1, 0.13, ConfidenceVariant::tight),
             Catch::Matchers::WithinAbs(0.01, 1e-18));
  // coarse: 5*1*1*(1+1+1) = 15 events.
  CHECK_THAT(union_delta(1, 1, 1, 0.13, ConfidenceVariant::coarse),
             Catch::Matchers::WithinAbs(0.13 / 15.0, 1e-18));
  CHECK_THROWS_AS(union_delta(1, 1, 1, 0.0, ConfidenceVariant::tight), std::invalid_argument);
  CHECK_THROWS_AS(union_delta(0, 1, 1, 0.1, ConfidenceVariant::tight), std::invalid_argument);
}

TEST_CASE("confidence_scale frozen values") {
  CHECK(confidence_scale(0, 1, 1, 1, 0.13, ConfidenceVariant::tight) == 1.0);
  // At n=1 the raw value exceeds 1 and is clipped.
  CHECK(confidence_scale(1, 1, 1, 1, 0.13, ConfidenceVariant::tight) == 1.0);
  CHECK_THAT(confidence_scale(1000000, 1, 1, 1, 0.13, ConfidenceVariant::tight),
             Catch::Matchers::WithinAbs(0.002280176692115295, 1e-15));
  CHECK_THAT(confidence_scale(1000, 5, 3, 4, 0.1, ConfidenceVariant::tight),
             Catch::Matchers::WithinAbs(0.08310950494915866, 1e-15));
  CHECK_THAT(confidence_scale(1000, 5, 3, 4, 0.1, ConfidenceVariant::coarse),
             Catch::Matchers::WithinAbs(0.08309061419528095, 1e-15));
  CHECK_THROWS_AS(confidence_scale(-1, 1, 1, 1, 0.1, ConfidenceVariant::tight),
                  std::invalid_argument);
}

TEST_CASE("confidence_scale is in [0,1] and nonincreasing") {
  for (auto variant : {ConfidenceVariant::tight, ConfidenceVariant::coarse})
    for (double delta : {0.01, 0.1, 0.5}) {
      double prev = 1.0;
      for (std::int64_t n = 0; n <= 1 << 21; n = n == 0 ? 1 : n * 2) {
        const double v = confidence_scale(n, 6, 4, 7, delta, variant);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        REQUIRE(v <= prev + 1e-15);
        prev = v;
      }
    }
}

TEST_CASE("weighted_stddev hand values and moment identity") {
  const std::vector<double> half{0.5, 0.5}, f01{0.0, 1.0};
  CHECK_THAT(weighted_stddev(half, f01), Catch::Matchers::WithinAbs(0.5, 1e-15));
  const std::vector<double> point{1.0, 0.0}, f{3.0, 7.0};
  CHECK(weighted_stddev(point, f) == 0.0);

  const std::vector<double> q{0.2, 0.3, 0.5}, v{1.8, 0.6, 1.2};
  CHECK_THAT(weighted_stddev(q, v), Catch::Matchers::WithinAbs(0.42, 1e-12));
  // Cross-check against the second-moment form E[v^2] - (E v)^2.
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    m1 += q[i] * v[i];
    m2 += q[i] * v[i] * v[i];
  }
  CHECK_THAT(weighted_stddev(q, v) * weighted_stddev(q, v),
             Catch::Matchers::WithinAbs(m2 - m1 * m1, 1e-12));
  CHECK_THROWS_AS(weighted_stddev(half, v), std::invalid_argument);
}
