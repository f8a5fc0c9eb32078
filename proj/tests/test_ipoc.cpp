#include <catch2/catch_amalgamated.hpp>

#include <certrl/ipoc.hpp>
#include <certrl/rng.hpp>

#include <cmath>
#include <vector>

using namespace certrl;

namespace {

// Deterministic 2-state machine: action 0 moves toward / stays at the
// rewarding state, action 1 idles at the start. Optimal return over H=2 is
// 0.1 + 1.0.
TabularMdp hand_env() {
  TabularMdp m(2, 2, 2);
  m.initial_state = 0;
  m.noise = RewardNoise::deterministic;
  m.r(0, 0) = 0.1;
  m.p(0, 0, 1) = 1.0;
  m.r(0, 1) = 0.0;
  m.p(0, 1, 0) = 1.0;
  m.r(1, 0) = 1.0;
  m.p(1, 0, 1) = 1.0;
  m.r(1, 1) = 0.0;
  m.p(1, 1, 0) = 1.0;
  return m;
}

Policy const_policy(int H, int S, int a) {
  Policy pi(H, S);
  for (auto& x : pi.action) x = a;
  return pi;
}

RunRecord synthetic(std::int64_t episode, double width, double gap) {
  RunRecord r;
  r.episode = episode;
  r.width = width;
  r.gap = gap;
  r.interval_high = width;
  return r;
}

} // namespace

TEST_CASE("episode audit evaluates policies exactly") {
  const auto env = hand_env();
  EpisodeTrace tr;
  tr.episode = 42;
  tr.steps = {{0, 1, 0.0, 0}, {0, 1, 0.0, 0}};

  const auto idle = const_policy(2, 2, 1);
  const auto rec = audit_episode(env, idle, Certificate{0.0, 2.0}, tr, 3);
  CHECK(rec.episode == 42);
  CHECK(rec.context_segment == 3);
  CHECK_THAT(rec.policy_value, Catch::Matchers::WithinAbs(0.0, 1e-15));
  CHECK_THAT(rec.optimal_value, Catch::Matchers::WithinAbs(1.1, 1e-12));
  CHECK_THAT(rec.gap, Catch::Matchers::WithinAbs(1.1, 1e-12));
  CHECK(rec.realized_reward == 0.0);
  CHECK_FALSE(rec.violation());

  // Width below the true gap is flagged; the interval misses the policy too.
  const auto bad = audit_episode(env, idle, Certificate{0.5, 1.0}, tr);
  CHECK(bad.gap_violation);
  CHECK(bad.interval_violation);
  CHECK(bad.violation());
  CHECK(bad.context_segment == -1);
}

TEST_CASE("audit slack absorbs float noise but nothing larger") {
  const auto env = hand_env();
  const auto idle = const_policy(2, 2, 1);
  EpisodeTrace tr;
  tr.steps = {{0, 1, 0.0, 0}, {0, 1, 0.0, 0}};
  const double gap = solve_exact(env).optimal_return(env); // idle policy earns 0

  CHECK_FALSE(audit_episode(env, idle, {0.0, gap - 5e-10}, tr).gap_violation);
  CHECK(audit_episode(env, idle, {0.0, gap - 2e-9}, tr).gap_violation);

  const auto move = const_policy(2, 2, 0);
  const double pv = policy_return(env, move);
  EpisodeTrace tr2;
  tr2.steps = {{0, 0, 0.1, 1}, {1, 0, 1.0, 1}};
  CHECK_FALSE(audit_episode(env, move, {pv + 5e-10, pv + 1.0}, tr2).interval_violation);
  CHECK(audit_episode(env, move, {pv + 2e-9, pv + 1.0}, tr2).interval_violation);
  CHECK_FALSE(audit_episode(env, move, {pv - 1.0, pv - 5e-10}, tr2).interval_violation);
  CHECK(audit_episode(env, move, {pv - 1.0, pv - 2e-9}, tr2).interval_violation);
  CHECK_THAT(audit_episode(env, move, {0.0, 2.0}, tr2).realized_reward,
             Catch::Matchers::WithinAbs(1.1, 1e-12));
}

TEST_CASE("streaming aggregation matches a two-pass reference") {
  Rng rng(3, Stream::aux);
  std::vector<RunRecord> recs;
  for (int k = 1; k <= 500; ++k) {
    const double width = 3.0 * rng.uniform01();
    const double gap = 0.6 * width + 0.2 * rng.uniform01();
    auto r = synthetic(k, width, gap);
    r.gap_violation = k % 97 == 0;
    r.interval_violation = k % 151 == 0;
    recs.push_back(r);
  }
  const std::vector<double> thresholds{0.5, 1.5, 2.5};
  const std::vector<double> levels{1.0, 0.05};
  const auto rep = aggregate(recs, thresholds, levels);

  REQUIRE(rep.episodes == 500);
  // Two-pass reference for every aggregate.
  double sw = 0.0, sg = 0.0;
  std::int64_t gv = 0, iv = 0;
  for (const auto& r : recs) {
    sw += r.width;
    sg += r.gap;
    gv += r.gap_violation ? 1 : 0;
    iv += r.interval_violation ? 1 : 0;
  }
  CHECK(rep.gap_violations == gv);
  CHECK(rep.interval_violations == iv);
  CHECK_THAT(rep.cumulative_width, Catch::Matchers::WithinAbs(sw, 1e-9));
  CHECK_THAT(rep.cumulative_gap, Catch::Matchers::WithinAbs(sg, 1e-9));

  const double mw = sw / 500.0, mg = sg / 500.0;
  double cov = 0.0, vw = 0.0, vg = 0.0;
  for (const auto& r : recs) {
    cov += (r.width - mw) * (r.gap - mg);
    vw += (r.width - mw) * (r.width - mw);
    vg += (r.gap - mg) * (r.gap - mg);
  }
  REQUIRE(rep.correlation_defined);
  CHECK_THAT(rep.correlation, Catch::Matchers::WithinAbs(cov / std::sqrt(vw * vg), 1e-12));
  CHECK(rep.correlation > 0.8); // widths drive the synthetic gaps

  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::int64_t want = 0;
    for (const auto& r : recs)
      if (r.width > thresholds[t]) ++want;
    CHECK(rep.mistakes[t].threshold == thresholds[t]);
    CHECK(rep.mistakes[t].count == want);
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::int64_t want = -1;
    for (const auto& r : recs)
      if (r.width <= levels[l]) {
        want = r.episode;
        break;
      }
    CHECK(rep.pac[l].level == levels[l]);
    CHECK(rep.pac[l].episode == want);
    CHECK(rep.pac[l].episode == pac_extraction(recs, levels[l]));
  }
}

TEST_CASE("correlation is undefined for degenerate runs") {
  std::vector<RunRecord> recs;
  recs.push_back(synthetic(1, 2.0, 0.5));
  bool defined = true;
  CHECK(pearson_correlation(recs, &defined) == 0.0);
  CHECK_FALSE(defined); // one point

  recs.clear();
  for (int k = 1; k <= 10; ++k) recs.push_back(synthetic(k, 1.0, 0.1 * k));
  CHECK(pearson_correlation(recs, &defined) == 0.0);
  CHECK_FALSE(defined); // constant widths

  recs.clear();
  for (int k = 1; k <= 10; ++k) recs.push_back(synthetic(k, 0.1 * k, 0.0));
  CHECK(pearson_correlation(recs, &defined) == 0.0);
  CHECK_FALSE(defined); // constant gaps

  recs.clear();
  for (int k = 1; k <= 10; ++k) recs.push_back(synthetic(k, 0.1 * k, 0.05 * k));
  CHECK(pearson_correlation(recs, &defined) > 0.999999);
  CHECK(defined);
}

TEST_CASE("first certified episode scans in order") {
  std::vector<RunRecord> recs;
  const double widths[] = {3.0, 2.5, 0.9, 1.1, 0.4};
  for (int k = 0; k < 5; ++k) recs.push_back(synthetic(k + 1, widths[k], 0.0));
  CHECK(pac_extraction(recs, 1.0) == 3);
  CHECK(pac_extraction(recs, 0.4) == 5);
  CHECK(pac_extraction(recs, 0.3) == -1);
  CHECK(pac_extraction(recs, 10.0) == 1);
}
