// Optimistic tabular RL with per-episode certificates.
//
// Each episode: plan upper and lower value bounds from the empirical model
// widened by count-based confidence bonuses, play greedily with respect to
// the upper bounds, report [lower, upper] at the initial state as the
// certificate, then fold the observed transitions/rewards into the stats.
//
// Two bonus families are provided. The "simple" one uses a single width on
// both sides. The "refined" one (default) takes a minimum over several
// upper-bound expressions for each side; every expression is individually
// valid, so the minimum is, and the certificates shrink much faster. All
// constants here are load-bearing for the high-probability guarantees; do
// not tune them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bounds.hpp"
#include "confidence.hpp"
#include "mdp.hpp"
#include "rng.hpp"

namespace certrl {

// Running empirical model: visit counts, mean rewards, transition
// frequencies. Means are maintained incrementally (Welford-style), which
// keeps each row an exact convex combination summing to 1. Unvisited pairs
// hold a uniform placeholder row; the n = 1 update overwrites it exactly.
class VisitStats {
public:
  VisitStats() = default;
  VisitStats(int S, int A, int H)
      : S_(S), A_(A), H_(H), count_(static_cast<std::size_t>(S) * A, 0),
        mean_reward_(static_cast<std::size_t>(S) * A, 0.0),
        freq_(static_cast<std::size_t>(S) * A * S, 1.0 / S) {
    if (S <= 0 || A <= 0 || H <= 0) throw std::invalid_argument("VisitStats: bad dims");
  }

  int num_states() const { return S_; }
  int num_actions() const { return A_; }
  int horizon() const { return H_; }

  std::int64_t count(int s, int a) const { return count_[idx(s, a)]; }
  double mean_reward(int s, int a) const { return mean_reward_[idx(s, a)]; }
  std::span<const double> transition_row(int s, int a) const {
    return {freq_.data() + idx(s, a) * S_, static_cast<std::size_t>(S_)};
  }

  void record(int s, int a, double reward, int next_state) {
    const std::size_t i = idx(s, a);
    const double n = static_cast<double>(++count_[i]);
    mean_reward_[i] += (reward - mean_reward_[i]) / n;
    double* row = freq_.data() + i * S_;
    for (int s2 = 0; s2 < S_; ++s2) {
      const double e = s2 == next_state ? 1.0 : 0.0;
      row[s2] += (e - row[s2]) / n;
    }
  }

  void record_episode(const EpisodeTrace& tr) {
    for (const auto& st : tr.steps) record(st.state, st.action, st.reward, st.next_state);
  }

  // Raw table access for serialization.
  std::span<const std::int64_t> counts() const { return count_; }
  std::span<const double> mean_rewards() const { return mean_reward_; }
  std::span<const double> frequencies() const { return freq_; }
  void load(std::vector<std::int64_t> counts, std::vector<double> means,
            std::vector<double> freqs) {
    if (counts.size() != count_.size() || means.size() != mean_reward_.size() ||
        freqs.size() != freq_.size())
      throw std::invalid_argument("VisitStats::load: size mismatch");
    count_ = std::move(counts);
    mean_reward_ = std::move(means);
    freq_ = std::move(freqs);
  }

private:
  std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * A_ + a; }

  int S_ = 0, A_ = 0, H_ = 0;
  std::vector<std::int64_t> count_;
  std::vector<double> mean_reward_;
  std::vector<double> freq_;
};

struct OrlcParams {
  double delta = 0.1;
  ConfidenceVariant variant = ConfidenceVariant::tight;
  BonusKind bonus = BonusKind::refined;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Per-(s,a) inputs shared by the bonus expressions at one (h, s, a):
//   row        empirical transition row
//   sqrt_row   elementwise square root of the row
//   vu, vl     upper/lower value tables for step h+1
//   dv         vu - vl (componentwise, nonnegative)
struct BonusInput {
  std::span<const double> row;
  std::span<const double> sqrt_row;
  std::span<const double> vu;
  std::span<const double> vl;
  std::span<const double> dv;
  double scale;     // confidence scale for this (s,a)
  double vmax_next; // value cap at step h+1
  int horizon;
  int num_states;
};

// One width on both sides: scale times (1 + spread of the upper values),
// plus a second-order term and a fraction of the model's own uncertainty
// about the next step.
inline double bonus_simple(const BonusInput& in) {
  const double sigma = weighted_stddev(in.row, in.vu);
  const double drift = dot(in.row, in.dv);
  const double S = in.num_states, H = in.horizon;
  return (1.0 + std::sqrt(12.0) * sigma) * in.scale + 45.0 * S * H * H * in.scale * in.scale +
         drift / H;
}

// Refined upper-bound width: minimum of three valid expressions. The first
// is the coarse range bound; the others trade variance terms against
// second-order corrections.
inline double bonus_refined_upper(const BonusInput& in) {
  const double phi = in.scale;
  const double phi2 = phi * phi;
  const double H = in.horizon;
  const double sigma_u = weighted_stddev(in.row, in.vu);
  double var_mix = sigma_u * sigma_u; // sigma^2 + E[(vu - vl)^2]
  double drift = 0.0;                 // E[vu - vl]
  double dv_l1 = 0.0;
  for (std::size_t i = 0; i < in.row.size(); ++i) {
    var_mix += in.row[i] * in.dv[i] * in.dv[i];
    drift += in.row[i] * in.dv[i];
    dv_l1 += in.dv[i];
  }
  const double root12 = std::sqrt(12.0);
  const double b1 = (in.vmax_next + 1.0) * phi;
  const double b2 =
      (1.0 + root12 * std::sqrt(var_mix)) * phi + 8.13 * in.vmax_next * phi2;
  const double b3 = (1.0 + root12 * sigma_u) * phi + drift / H + 20.13 * H * dv_l1 * phi2;
  return std::min({b1, b2, b3});
}

// Refined lower-bound width: minimum of four valid expressions. These must
// hold even though the lower values being backed up are themselves
// pessimistic, hence the extra sqrt-row correction terms.
inline double bonus_refined_lower(const BonusInput& in) {
  const double phi = in.scale;
  const double phi2 = phi * phi;
  const double S = in.num_states, H = in.horizon;
  const double sigma_u = weighted_stddev(in.row, in.vu);
  double var_mix = sigma_u * sigma_u;
  double drift = 0.0;
  double dv_l1 = 0.0;
  double sqrt_dot = 0.0; // <sqrt(row), vu - vl>
  for (std::size_t i = 0; i < in.row.size(); ++i) {
    var_mix += in.row[i] * in.dv[i] * in.dv[i];
    drift += in.row[i] * in.dv[i];
    dv_l1 += in.dv[i];
    sqrt_dot += in.sqrt_row[i] * in.dv[i];
  }
  const double root12 = std::sqrt(12.0);
  const double b1 = (2.0 * std::sqrt(S) * in.vmax_next + 1.0) * phi;
  const double b2 = (in.vmax_next + 1.0 + 2.0 * sqrt_dot) * phi + 4.66 * dv_l1 * phi2;
  const double b3 = (root12 * std::sqrt(var_mix) + 1.0 + 2.0 * sqrt_dot) * phi +
                    (8.13 * in.vmax_next + 4.66 * dv_l1) * phi2;
  const double b4 = (1.0 + root12 * sigma_u) * phi + drift / H +
                    (8.13 * in.vmax_next + (32.0 * H + 4.66) * dv_l1) * phi2;
  return std::min({b1, b2, b3, b4});
}

} // namespace detail

// Confidence-widened backward induction over the empirical model. The
// returned policy is greedy in the upper Q values (lowest index on ties);
// both value tables are clipped into [0, H - h] at every step, which keeps
// 0 <= q_lower <= q_upper <= vmax invariant regardless of the stats fed in.
inline ValueBounds plan_optimistic(const VisitStats& stats, const OrlcParams& params) {
  const int S = stats.num_states(), A = stats.num_actions(), H = stats.horizon();
  ValueBounds out(S, A, H);

  // Per-(s,a) quantities that do not depend on h.
  std::vector<double> scale(static_cast<std::size_t>(S) * A);
  std::vector<double> sqrt_rows(static_cast<std::size_t>(S) * A * S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const std::size_t i = static_cast<std::size_t>(s) * A + a;
      scale[i] =
          confidence_scale(stats.count(s, a), S, A, H, params.delta, params.variant);
      const auto row = stats.transition_row(s, a);
      for (int s2 = 0; s2 < S; ++s2) sqrt_rows[i * S + s2] = std::sqrt(row[s2]);
    }

  std::vector<double> dv(static_cast<std::size_t>(S));
  for (int h = H - 1; h >= 0; --h) {
    const double cap = static_cast<double>(H - h);
    const double vmax_next = cap - 1.0;
    const std::span<const double> vu{out.v_upper.data() + static_cast<std::size_t>(h + 1) * S,
                                     static_cast<std::size_t>(S)};
    const std::span<const double> vl{out.v_lower.data() + static_cast<std::size_t>(h + 1) * S,
                                     static_cast<std::size_t>(S)};
    for (int s2 = 0; s2 < S; ++s2) dv[s2] = vu[s2] - vl[s2];
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        const auto row = stats.transition_row(s, a);
        detail::BonusInput in{row,
                              {sqrt_rows.data() + i * S, static_cast<std::size_t>(S)},
                              vu,
                              vl,
                              dv,
                              scale[i],
                              vmax_next,
                              H,
                              S};
        double width_up, width_lo;
        if (params.bonus == BonusKind::simple) {
          width_up = detail::bonus_simple(in);
          width_lo = width_up;
        } else {
          width_up = detail::bonus_refined_upper(in);
          width_lo = detail::bonus_refined_lower(in);
        }
        const double rhat = stats.mean_reward(s, a);
        const double qu =
            std::min(std::max(rhat + detail::dot(row, vu) + width_up, 0.0), cap);
        const double ql =
            std::min(std::max(rhat + detail::dot(row, vl) - width_lo, 0.0), cap);
        out.q_upper[(static_cast<std::size_t>(h) * S + s) * A + a] = qu;
        out.q_lower[(static_cast<std::size_t>(h) * S + s) * A + a] = ql;
        if (qu > best) {
          best = qu;
          best_a = a;
        }
      }
      out.policy.at(h, s) = best_a;
      out.v_upper[static_cast<std::size_t>(h) * S + s] = best;
      out.v_lower[static_cast<std::size_t>(h) * S + s] =
          out.q_lower[(static_cast<std::size_t>(h) * S + s) * A + best_a];
    }
  }
  return out;
}

// One full interaction loop against a fixed environment.
class OrlcRunner {
public:
  struct Outcome {
    ValueBounds bounds;
    Certificate certificate;
    EpisodeTrace trace;
  };

  OrlcRunner(TabularMdp env, OrlcParams params, std::uint64_t root_seed)
      : env_(std::move(env)), params_(params),
        stats_(env_.num_states, env_.num_actions, env_.horizon),
        transition_rng_(root_seed, Stream::transition), reward_rng_(root_seed, Stream::reward) {
    require_valid(env_);
  }

  const TabularMdp& env() const { return env_; }
  const VisitStats& stats() const { return stats_; }
  std::int64_t episodes_done() const { return episode_; }

  // Resume support: replace the empirical model (e.g. from a checkpoint).
  void restore_stats(VisitStats stats, std::int64_t episodes_done) {
    stats_ = std::move(stats);
    episode_ = episodes_done;
  }

  Outcome step() {
    ++episode_;
    Outcome out;
    out.bounds = plan_optimistic(stats_, params_);
    out.certificate = out.bounds.certificate(env_.initial_state);
    out.trace = sample_episode(env_, out.bounds.policy, episode_, transition_rng_, reward_rng_);
    stats_.record_episode(out.trace);
    return out;
  }

private:
  TabularMdp env_;
  OrlcParams params_;
  VisitStats stats_;
  Rng transition_rng_, reward_rng_;
  std::int64_t episode_ = 0;
};

} // namespace certrl
