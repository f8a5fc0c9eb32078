// Random instance generators.
//
// Every generator consumes a single dedicated substream of the given root
// seed, so the same seed always yields the same instance regardless of what
// else the caller samples. Reward means are sparse (zero with probability
// 0.85, otherwise uniform) to create instances with meaningful action gaps;
// transition rows are Dirichlet draws with small concentration so rows are
// skewed rather than near-uniform.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "contextual.hpp"
#include "mdp.hpp"
#include "rng.hpp"

namespace certrl {

inline constexpr double kSparseRewardZeroProb = 0.85;
inline constexpr double kTabularDirichletAlpha = 0.1;
inline constexpr double kContextualDirichletAlpha = 0.3;

inline TabularMdp gen_random_tabular(int S, int A, int H, std::uint64_t seed) {
  if (S <= 0 || A <= 0 || H <= 0) throw std::invalid_argument("gen_random_tabular: bad dims");
  Rng rng(seed, Stream::instance);
  TabularMdp m(S, A, H);
  m.initial_state = 0;
  m.noise = RewardNoise::bernoulli;
  m.generator_name = "random_tabular";
  m.generator_seed = seed;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      m.r(s, a) = rng.bernoulli(kSparseRewardZeroProb) ? 0.0 : rng.uniform01();
  const std::vector<double> alpha(static_cast<std::size_t>(S), kTabularDirichletAlpha);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      auto row = rng.dirichlet(alpha);
      for (int s2 = 0; s2 < S; ++s2) m.p(s, a, s2) = row[s2];
    }
  require_valid(m);
  return m;
}

// Contextual instance: rewards linear in a dR-dimensional stochastic
// context, transitions context-independent (dP = 1 with constant context 1).
// Reward parameters are zero half the time so context coordinates matter
// differently per (s,a); transition rows are Dirichlet. Any simplex context
// then realizes rewards in [0,1] and exact probability rows.
inline ContextualLinearMdp gen_random_contextual(int S, int A, int H, int dR,
                                                 std::vector<ContextSchedulePoint> reward_schedule,
                                                 std::uint64_t seed) {
  if (S <= 0 || A <= 0 || H <= 0 || dR <= 0)
    throw std::invalid_argument("gen_random_contextual: bad dims");
  Rng rng(seed, Stream::instance);
  ContextualLinearMdp m(S, A, H, dR, 1);
  m.initial_state = 0;
  m.noise = RewardNoise::bernoulli;
  m.generator_name = "random_contextual";
  m.generator_seed = seed;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      auto tr = m.theta_r(s, a);
      for (int i = 0; i < dR; ++i) tr[i] = rng.bernoulli(0.5) ? rng.uniform01() : 0.0;
    }
  const std::vector<double> alpha(static_cast<std::size_t>(S), kContextualDirichletAlpha);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      auto row = rng.dirichlet(alpha);
      for (int s2 = 0; s2 < S; ++s2) m.theta_p(s, a, s2)[0] = row[s2];
    }
  m.context_reward_dist = ContextSampler::dirichlet(std::move(reward_schedule));
  m.context_transition_dist = ContextSampler::constant({1.0});
  if (m.context_reward_dist.dim() != dR)
    throw std::invalid_argument("gen_random_contextual: schedule dimension != dR");
  // theta_r rows live in [0,1]^dR, theta_p rows on the simplex.
  m.xi_theta_reward = std::sqrt(static_cast<double>(dR));
  m.xi_theta_transition = 1.0;
  auto viol = validate_contextual(m);
  if (!viol.empty()) throw std::runtime_error("gen_random_contextual: " + viol.front());
  return m;
}

// Dirichlet concentration for bandit reward contexts: a handful of frequent
// coordinates and a tail of rare ones, so some arms' means are revealed
// slowly. Coordinates 0..6 are frequent; everything after is rare.
inline std::vector<double> bandit_context_alpha(int dR) {
  std::vector<double> alpha(static_cast<std::size_t>(dR));
  for (int i = 0; i < dR; ++i) alpha[static_cast<std::size_t>(i)] = i < 7 ? 0.7 : 0.01;
  return alpha;
}

// Contextual bandit: single state, horizon 1, A arms, linear rewards with
// dense-ish parameters (zero with probability 0.1 per coordinate).
inline ContextualLinearMdp gen_contextual_bandit(int A, int dR, std::uint64_t seed) {
  if (A <= 0 || dR <= 0) throw std::invalid_argument("gen_contextual_bandit: bad dims");
  Rng rng(seed, Stream::instance);
  ContextualLinearMdp m(1, A, 1, dR, 1);
  m.initial_state = 0;
  m.noise = RewardNoise::bernoulli;
  m.generator_name = "contextual_bandit";
  m.generator_seed = seed;
  for (int a = 0; a < A; ++a) {
    auto tr = m.theta_r(0, a);
    for (int i = 0; i < dR; ++i) tr[i] = rng.bernoulli(0.9) ? rng.uniform01() : 0.0;
  }
  for (int a = 0; a < A; ++a) m.theta_p(0, a, 0)[0] = 1.0;
  m.context_reward_dist =
      ContextSampler::dirichlet({ContextSchedulePoint{1, bandit_context_alpha(dR)}});
  m.context_transition_dist = ContextSampler::constant({1.0});
  m.xi_theta_reward = std::sqrt(static_cast<double>(dR));
  m.xi_theta_transition = 1.0;
  auto viol = validate_contextual(m);
  if (!viol.empty()) throw std::runtime_error("gen_contextual_bandit: " + viol.front());
  return m;
}

// Plain multi-armed bandit as a tabular MDP: S = H = 1, sparse arm means.
inline TabularMdp gen_bandit(int A, std::uint64_t seed) {
  if (A <= 0) throw std::invalid_argument("gen_bandit: bad dims");
  Rng rng(seed, Stream::instance);
  TabularMdp m(1, A, 1);
  m.initial_state = 0;
  m.noise = RewardNoise::bernoulli;
  m.generator_name = "bandit";
  m.generator_seed = seed;
  for (int a = 0; a < A; ++a) {
    m.r(0, a) = rng.bernoulli(kSparseRewardZeroProb) ? 0.0 : rng.uniform01();
    m.p(0, a, 0) = 1.0;
  }
  require_valid(m);
  return m;
}

} // namespace certrl
