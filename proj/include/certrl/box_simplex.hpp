// Extreme expectations over a box-constrained probability simplex.
//
// The feasible set for a row estimate p_hat with per-coordinate slack w is
//   P = { p : sum p = 1, 0 <= p_i <= 1, |p_i - p_hat_i| <= w }.
// box_simplex_max computes max_{p in P} <p, v> by a greedy argument: start
// every coordinate at its lower bound max(p_hat_i - w, 0), then pour the
// remaining mass into coordinates in order of decreasing v (ties to the
// lower index) up to each upper bound min(p_hat_i + w, 1). The result is
// exact: the objective is linear and P is a polytope whose optima have this
// water-filling structure.
//
// Minima come from negation: min <p, v> = -max <p, -v>.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace certrl {

struct infeasible_set : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Feasibility slack: bound sums within this of 1 count as attaining it, so a
// zero-width box around a float-summed probability row stays feasible.
inline constexpr double kBoxMassTol = 1e-12;

// P is nonempty iff the lower bounds fit under 1 and the upper bounds reach 1.
inline bool box_simplex_feasible(std::span<const double> p_hat, double width) {
  if (!(width >= 0.0)) return false;
  double lo = 0.0, hi = 0.0;
  for (double p : p_hat) {
    lo += std::max(p - width, 0.0);
    hi += std::min(p + width, 1.0);
  }
  return lo <= 1.0 + kBoxMassTol && hi >= 1.0 - kBoxMassTol;
}

inline std::optional<double> box_simplex_try_max(std::span<const double> p_hat, double width,
                                                 std::span<const double> v,
                                                 std::vector<double>* maximizer = nullptr) {
  const std::size_t n = p_hat.size();
  if (v.size() != n) throw std::invalid_argument("box_simplex_try_max: size mismatch");
  if (n == 0 || !(width >= 0.0)) return std::nullopt;

  std::vector<double> p(n);
  double mass = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::max(p_hat[i] - width, 0.0);
    mass -= p[i];
  }
  if (mass < -kBoxMassTol) return std::nullopt; // lower bounds alone exceed total mass
  mass = std::max(mass, 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });

  for (std::size_t k = 0; k < n && mass > 0.0; ++k) {
    const std::size_t i = order[k];
    const double room = std::min(p_hat[i] + width, 1.0) - p[i];
    const double add = std::min(room, mass);
    if (add > 0.0) {
      p[i] += add;
      mass -= add;
    }
  }
  // Rounding can leave a residual of a few ulps; anything larger means the
  // upper bounds cannot absorb the mass and the set is empty.
  if (mass > kBoxMassTol) return std::nullopt;

  double val = 0.0;
  for (std::size_t i = 0; i < n; ++i) val += p[i] * v[i];
  if (maximizer) *maximizer = std::move(p);
  return val;
}

inline double box_simplex_max(std::span<const double> p_hat, double width,
                              std::span<const double> v,
                              std::vector<double>* maximizer = nullptr) {
  auto r = box_simplex_try_max(p_hat, width, v, maximizer);
  if (!r) throw infeasible_set("box_simplex_max: empty feasible set");
  return *r;
}

inline double box_simplex_min(std::span<const double> p_hat, double width,
                              std::span<const double> v,
                              std::vector<double>* minimizer = nullptr) {
  std::vector<double> neg(v.begin(), v.end());
  for (double& x : neg) x = -x;
  return -box_simplex_max(p_hat, width, neg, minimizer);
}

} // namespace certrl
