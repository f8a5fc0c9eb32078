// Certificate audit harness.
//
// The audit has ground-truth access to the environment an episode was
// played in, so it can evaluate the played policy and the optimum exactly
// and check each certificate against both requirements:
//   * the certified width covers the true optimality gap
//   * the interval contains the played policy's expected return
// Checks are exact up to kAuditSlack, which exists only to absorb
// floating-point noise; it is not a statistical allowance.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bounds.hpp"
#include "mdp.hpp"

namespace certrl {

constexpr double kAuditSlack = 1e-9;

struct RunRecord {
  std::int64_t episode = 0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  double width = 0.0;
  double policy_value = 0.0;  // exact expected return of the played policy
  double optimal_value = 0.0; // exact optimal return
  double gap = 0.0;           // optimal_value - policy_value
  double realized_reward = 0.0;
  int context_segment = -1;
  bool gap_violation = false;
  bool interval_violation = false;

  bool violation() const { return gap_violation || interval_violation; }
};

inline RunRecord audit_episode(const TabularMdp& env, const Policy& pi, const Certificate& cert,
                               const EpisodeTrace& trace, int context_segment = -1) {
  RunRecord rec;
  rec.episode = trace.episode;
  rec.interval_low = cert.lower;
  rec.interval_high = cert.upper;
  rec.width = cert.width();
  rec.policy_value = policy_return(env, pi);
  rec.optimal_value = solve_exact(env).optimal_return(env);
  rec.gap = rec.optimal_value - rec.policy_value;
  rec.realized_reward = trace.total_reward();
  rec.context_segment = context_segment;
  rec.gap_violation = rec.gap > rec.width + kAuditSlack;
  rec.interval_violation =
      rec.policy_value < cert.lower - kAuditSlack || rec.policy_value > cert.upper + kAuditSlack;
  return rec;
}

struct MistakeCount {
  double threshold = 0.0;
  std::int64_t count = 0; // episodes whose width exceeded the threshold
};

struct PacResult {
  double level = 0.0;
  std::int64_t episode = -1; // first episode with width <= level; -1 if none
};

struct IpocReport {
  std::int64_t episodes = 0;
  std::int64_t gap_violations = 0;
  std::int64_t interval_violations = 0;
  double cumulative_width = 0.0;
  double cumulative_gap = 0.0; // regret of the whole run
  std::vector<MistakeCount> mistakes;
  double correlation = 0.0; // Pearson correlation between width and gap
  bool correlation_defined = false;
  std::vector<PacResult> pac;
};

// Streaming aggregation so multi-million-episode runs never buffer records.
// Correlation uses single-pass co-moment updates (numerically stable).
class RunAggregator {
public:
  RunAggregator(std::span<const double> mistake_thresholds, std::span<const double> pac_levels) {
    report_.mistakes.reserve(mistake_thresholds.size());
    for (double t : mistake_thresholds) report_.mistakes.push_back({t, 0});
    report_.pac.reserve(pac_levels.size());
    for (double l : pac_levels) report_.pac.push_back({l, -1});
  }

  void add(const RunRecord& rec) {
    ++report_.episodes;
    if (rec.gap_violation) ++report_.gap_violations;
    if (rec.interval_violation) ++report_.interval_violations;
    report_.cumulative_width += rec.width;
    report_.cumulative_gap += rec.gap;
    for (auto& m : report_.mistakes)
      if (rec.width > m.threshold) ++m.count;
    for (auto& p : report_.pac)
      if (p.episode < 0 && rec.width <= p.level) p.episode = rec.episode;

    const double n = static_cast<double>(report_.episodes);
    const double dx = rec.width - mean_w_;
    const double dy = rec.gap - mean_g_;
    mean_w_ += dx / n;
    mean_g_ += dy / n;
    comoment_ += dx * (rec.gap - mean_g_);
    var_w_ += dx * (rec.width - mean_w_);
    var_g_ += dy * (rec.gap - mean_g_);
  }

  IpocReport finish() const {
    IpocReport out = report_;
    if (out.episodes >= 2 && var_w_ > 0.0 && var_g_ > 0.0) {
      out.correlation = comoment_ / std::sqrt(var_w_ * var_g_);
      out.correlation_defined = true;
    }
    return out;
  }

private:
  IpocReport report_;
  double mean_w_ = 0.0, mean_g_ = 0.0;
  double comoment_ = 0.0, var_w_ = 0.0, var_g_ = 0.0;
};

inline IpocReport aggregate(std::span<const RunRecord> records,
                            std::span<const double> mistake_thresholds,
                            std::span<const double> pac_levels) {
  RunAggregator agg(mistake_thresholds, pac_levels);
  for (const auto& r : records) agg.add(r);
  return agg.finish();
}

// First episode at which a policy could be certified as level-optimal.
inline std::int64_t pac_extraction(std::span<const RunRecord> records, double level) {
  for (const auto& r : records)
    if (r.width <= level) return r.episode;
  return -1;
}

inline double pearson_correlation(std::span<const RunRecord> records, bool* defined = nullptr) {
  std::vector<double> none;
  auto rep = aggregate(records, none, none);
  if (defined) *defined = rep.correlation_defined;
  return rep.correlation;
}

} // namespace certrl
