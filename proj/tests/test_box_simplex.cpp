#include <catch2/catch_amalgamated.hpp>

#include <certrl/box_simplex.hpp>
#include <certrl/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

using namespace certrl;

namespace {

// Independent oracle: the feasible set is a box intersected with the simplex
// hyperplane, so every extreme point has at most one coordinate strictly
// between its bounds. Enumerate all bound assignments with one free slot.
std::optional<double> vertex_lp_max(const std::vector<double>& p_hat, double w,
                                    const std::vector<double>& v) {
  const std::size_t n = p_hat.size();
  std::vector<double> lo(n), hi(n);
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::max(p_hat[i] - w, 0.0);
    hi[i] = std::min(p_hat[i] + w, 1.0);
    lo_sum += lo[i];
    hi_sum += hi[i];
  }
  if (lo_sum > 1.0 + 1e-12 || hi_sum < 1.0 - 1e-12) return std::nullopt;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t free = 0; free < n; ++free) {
    const std::size_t others = n - 1;
    for (std::size_t mask = 0; mask < (std::size_t{1} << others); ++mask) {
      double sum = 0.0, value = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        const double b = (mask >> bit & 1) ? hi[i] : lo[i];
        sum += b;
        value += b * v[i];
        ++bit;
      }
      const double p_free = 1.0 - sum;
      if (p_free < lo[free] - 1e-12 || p_free > hi[free] + 1e-12) continue;
      best = std::max(best, value + p_free * v[free]);
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

} // namespace

TEST_CASE("constrained expectation handles hand-worked cases") {
  std::vector<double> arg;

  CHECK_THAT(box_simplex_max(std::vector<double>{0.5, 0.5}, 0.2, std::vector<double>{1.0, 0.0}),
             Catch::Matchers::WithinAbs(0.7, 1e-12));
  // Wide enough to put all mass on the best coordinate.
  CHECK_THAT(box_simplex_max(std::vector<double>{0.5, 0.5}, 0.6, std::vector<double>{1.0, 0.0}),
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(box_simplex_min(std::vector<double>{0.5, 0.5}, 0.2, std::vector<double>{1.0, 0.0}),
             Catch::Matchers::WithinAbs(0.3, 1e-12));

  // Equal values break toward the lower coordinate index.
  auto got = box_simplex_try_max(std::vector<double>{0.2, 0.2, 0.6}, 0.3,
                                 std::vector<double>{1.0, 1.0, 0.0}, &arg);
  REQUIRE(got.has_value());
  CHECK_THAT(*got, Catch::Matchers::WithinAbs(0.7, 1e-12));
  CHECK_THAT(arg[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(arg[1], Catch::Matchers::WithinAbs(0.2, 1e-12));
  CHECK_THAT(arg[2], Catch::Matchers::WithinAbs(0.3, 1e-12));

  // Zero width pins the distribution.
  CHECK_THAT(box_simplex_max(std::vector<double>{0.25, 0.75}, 0.0, std::vector<double>{2.0, -1.0}),
             Catch::Matchers::WithinAbs(-0.25, 1e-12));
}

TEST_CASE("infeasible boxes are reported") {
  CHECK_FALSE(box_simplex_feasible(std::vector<double>{0.9, 0.9}, 0.05));
  CHECK_FALSE(box_simplex_feasible(std::vector<double>{0.1, 0.1}, 0.05));
  CHECK(box_simplex_feasible(std::vector<double>{0.5, 0.5}, 0.05));
  CHECK_FALSE(
      box_simplex_try_max(std::vector<double>{0.9, 0.9}, 0.05, std::vector<double>{1.0, 0.0})
          .has_value());
  CHECK_THROWS_AS(
      box_simplex_max(std::vector<double>{0.1, 0.1}, 0.05, std::vector<double>{1.0, 0.0}),
      infeasible_set);
}

TEST_CASE("greedy solution matches vertex enumeration") {
  Rng rng(41, Stream::aux);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int it = 0; it < 400; ++it) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 5.0);
    std::vector<double> p_hat(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    // Mix proper distributions with clipped (sub-stochastic) estimates so both
    // feasibility outcomes occur.
    if (rng.uniform01() < 0.5) {
      const auto d = rng.dirichlet(std::vector<double>(static_cast<std::size_t>(n), 0.4));
      std::copy(d.begin(), d.end(), p_hat.begin());
    } else {
      for (auto& x : p_hat) x = rng.uniform01();
    }
    for (auto& x : v) x = 4.0 * rng.uniform01() - 2.0;
    const double w = rng.uniform01() < 0.3 ? 0.0 : 0.5 * rng.uniform01();

    std::vector<double> arg;
    const auto got = box_simplex_try_max(p_hat, w, v, &arg);
    const auto want = vertex_lp_max(p_hat, w, v);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) {
      ++infeasible_seen;
      continue;
    }
    ++feasible_seen;
    REQUIRE_THAT(*got, Catch::Matchers::WithinAbs(*want, 1e-9));

    // The maximizer is a member of the constraint set and attains the value.
    double sum = 0.0, attained = 0.0, l1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      REQUIRE(arg[idx] >= std::max(p_hat[idx] - w, 0.0) - 1e-12);
      REQUIRE(arg[idx] <= std::min(p_hat[idx] + w, 1.0) + 1e-12);
      sum += arg[idx];
      attained += arg[idx] * v[idx];
      l1 += std::abs(v[idx]);
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-11));
    REQUIRE_THAT(attained, Catch::Matchers::WithinAbs(*got, 1e-11));

    // Width contract: the spread around the point estimate is bounded.
    const double mn = box_simplex_min(p_hat, w, v);
    REQUIRE(*got >= mn - 1e-11);
    REQUIRE(*got - mn <= 2.0 * w * l1 + 1e-9);
  }
  CHECK(feasible_seen > 150);
  CHECK(infeasible_seen > 20);
}
