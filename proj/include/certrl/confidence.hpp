// Confidence scales for empirical model estimates.
//
// confidence_scale(n, ...) is the per-(s,a) scalar that all count-based
// exploration bonuses multiply. It is 1 at n = 0 (nothing known), strictly
// positive, nonincreasing in n, and decays like sqrt(log log n / n). Two
// variants differ only in the union-bound bookkeeping: "tight" spreads the
// failure probability over fewer events and is the default; "coarse" uses
// the simpler count and yields slightly wider intervals. Both keep every
// downstream guarantee.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace certrl {

enum class ConfidenceVariant { tight, coarse };
enum class BonusKind { simple, refined };

inline const char* to_string(ConfidenceVariant v) {
  return v == ConfidenceVariant::tight ? "tight" : "coarse";
}
inline const char* to_string(BonusKind b) {
  return b == BonusKind::simple ? "simple" : "refined";
}

// ln(ln(x)) floored so the argument never drops below e.
inline double iterated_log(double x) {
  return std::log(std::log(std::max(x, 2.718281828459045235360287471353)));
}

// Per-event failure probability after splitting delta across all
// simultaneously-held estimates (reward and transition rows, plus the
// value-range terms that scale with S).
inline double union_delta(int S, int A, int H, double delta, ConfidenceVariant variant) {
  if (S <= 0 || A <= 0 || H <= 0) throw std::invalid_argument("union_delta: bad dims");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("union_delta: delta in (0,1)");
  const double s = S, a = A, h = H;
  const double events = variant == ConfidenceVariant::tight
                            ? 5.0 * s * a * h + 4.0 * s * a + 4.0 * s * s * a
                            : 5.0 * s * a * (h + 1.0 + s);
  return delta / events;
}

inline double confidence_scale(std::int64_t n, int S, int A, int H, double delta,
                               ConfidenceVariant variant) {
  if (n < 0) throw std::invalid_argument("confidence_scale: negative count");
  if (n == 0) return 1.0;
  const double dp = union_delta(S, A, H, delta, variant);
  const double nn = static_cast<double>(n);
  const double loglog =
      variant == ConfidenceVariant::tight ? iterated_log(2.0 * nn) : iterated_log(nn);
  const double val = std::sqrt((0.52 / nn) * (1.4 * loglog + std::log(5.2 / dp)));
  return std::min(1.0, val);
}

// Standard deviation of f under weights q: sqrt(sum_i q_i (f_i - qf)^2).
// q is a probability row; no normalization is applied.
inline double weighted_stddev(std::span<const double> q, std::span<const double> f) {
  if (q.size() != f.size()) throw std::invalid_argument("weighted_stddev: size mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mean += q[i] * f[i];
  double var = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = f[i] - mean;
    var += q[i] * d * d;
  }
  return std::sqrt(std::max(var, 0.0));
}

} // namespace certrl
