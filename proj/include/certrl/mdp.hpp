// Finite-horizon tabular MDPs.
//
// Conventions used throughout the library:
//   * episodes have fixed horizon H; step indices h are 0-based, 0 <= h < H
//   * values are indexed by (h, s) with an extra terminal row V[H][.] = 0
//   * the per-step value cap at step h is vmax(h) = H - h (rewards in [0,1])
//   * policies are deterministic and time-dependent: one action per (h, s)
//   * argmax ties resolve to the lowest action index, everywhere

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace certrl {

constexpr double kRowSumTol = 1e-9;

enum class RewardNoise {
  bernoulli,    // sample in {0,1} with the given mean
  deterministic // always emit the mean
};

inline const char* to_string(RewardNoise n) {
  return n == RewardNoise::bernoulli ? "bernoulli" : "deterministic";
}

struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int initial_state = 0;
  RewardNoise noise = RewardNoise::bernoulli;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward_mean; // [s][a]

  // Provenance of generated instances; informational only.
  std::string generator_name;
  std::uint64_t generator_seed = 0;

  TabularMdp() = default;
  TabularMdp(int S, int A, int H)
      : num_states(S), num_actions(A), horizon(H),
        transition(static_cast<std::size_t>(S) * A * S, 0.0),
        reward_mean(static_cast<std::size_t>(S) * A, 0.0) {}

  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  std::span<const double> row(int s, int a) const {
    return {transition.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states,
            static_cast<std::size_t>(num_states)};
  }
  double& r(int s, int a) { return reward_mean[static_cast<std::size_t>(s) * num_actions + a]; }
  double r(int s, int a) const { return reward_mean[static_cast<std::size_t>(s) * num_actions + a]; }
};

// Deterministic time-dependent policy: action(h, s).
struct Policy {
  int horizon = 0;
  int num_states = 0;
  std::vector<int> action; // [h][s]

  Policy() = default;
  Policy(int H, int S) : horizon(H), num_states(S), action(static_cast<std::size_t>(H) * S, 0) {}

  int& at(int h, int s) { return action[static_cast<std::size_t>(h) * num_states + s]; }
  int at(int h, int s) const { return action[static_cast<std::size_t>(h) * num_states + s]; }
};

// Human-readable structural violations; empty means the instance is usable.
inline std::vector<std::string> validate_mdp(const TabularMdp& m) {
  std::vector<std::string> out;
  if (m.num_states <= 0 || m.num_actions <= 0 || m.horizon <= 0) {
    out.push_back("dimensions must be positive");
    return out;
  }
  const std::size_t S = m.num_states, A = m.num_actions;
  if (m.transition.size() != S * A * S) out.push_back("transition table size mismatch");
  if (m.reward_mean.size() != S * A) out.push_back("reward table size mismatch");
  if (!out.empty()) return out;
  if (m.initial_state < 0 || m.initial_state >= m.num_states)
    out.push_back("initial state out of range");
  for (int s = 0; s < m.num_states; ++s)
    for (int a = 0; a < m.num_actions; ++a) {
      // All range checks share the kRowSumTol slack so realized contextual
      // instances are not rejected over last-ulp rounding.
      double sum = 0.0;
      bool neg = false;
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        const double p = m.p(s, a, s2);
        if (!(p >= -kRowSumTol)) neg = true; // catches NaN as well
        sum += p;
      }
      if (neg)
        out.push_back("negative transition probability at (s=" + std::to_string(s) +
                      ",a=" + std::to_string(a) + ")");
      if (!(std::abs(sum - 1.0) <= kRowSumTol))
        out.push_back("transition row sum off by " + std::to_string(sum - 1.0) + " at (s=" +
                      std::to_string(s) + ",a=" + std::to_string(a) + ")");
      const double r = m.r(s, a);
      if (!(r >= -kRowSumTol && r <= 1.0 + kRowSumTol))
        out.push_back("reward mean outside [0,1] at (s=" + std::to_string(s) +
                      ",a=" + std::to_string(a) + ")");
    }
  return out;
}

inline void require_valid(const TabularMdp& m) {
  auto v = validate_mdp(m);
  if (!v.empty()) throw std::invalid_argument("invalid MDP: " + v.front());
}

struct PlanningResult {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> v; // [h][s], h in [0, H]; v[H][.] == 0
  std::vector<double> q; // [h][s][a], h in [0, H)
  Policy policy;

  double value(int h, int s) const { return v[static_cast<std::size_t>(h) * num_states + s]; }
  double qvalue(int h, int s, int a) const {
    return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double optimal_return(const TabularMdp& m) const { return value(0, m.initial_state); }
};

// Exact finite-horizon optimal control by backward induction.
inline PlanningResult solve_exact(const TabularMdp& m) {
  require_valid(m);
  const int S = m.num_states, A = m.num_actions, H = m.horizon;
  PlanningResult res;
  res.num_states = S;
  res.num_actions = A;
  res.horizon = H;
  res.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
  res.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  res.policy = Policy(H, S);
  for (int h = H - 1; h >= 0; --h) {
    const double* vnext = res.v.data() + static_cast<std::size_t>(h + 1) * S;
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        const auto row = m.row(s, a);
        for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * vnext[s2];
        const double qv = m.r(s, a) + ev;
        res.q[(static_cast<std::size_t>(h) * S + s) * A + a] = qv;
        if (qv > best) {
          best = qv;
          best_a = a;
        }
      }
      res.v[static_cast<std::size_t>(h) * S + s] = best;
      res.policy.at(h, s) = best_a;
    }
  }
  return res;
}

// Expected return of a fixed policy from the initial state.
inline double policy_return(const TabularMdp& m, const Policy& pi) {
  require_valid(m);
  const int S = m.num_states, A = m.num_actions, H = m.horizon;
  if (pi.horizon != H || pi.num_states != S ||
      pi.action.size() != static_cast<std::size_t>(H) * S)
    throw std::invalid_argument("policy_return: policy shape mismatch");
  for (int x : pi.action)
    if (x < 0 || x >= A) throw std::invalid_argument("policy_return: action out of range");
  std::vector<double> v(S, 0.0), vnew(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      const int a = pi.at(h, s);
      double ev = 0.0;
      const auto row = m.row(s, a);
      for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * v[s2];
      vnew[s] = m.r(s, a) + ev;
    }
    std::swap(v, vnew);
  }
  return v[m.initial_state];
}

struct EpisodeStep {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
};

struct EpisodeTrace {
  std::int64_t episode = 0; // 1-based index within a run; 0 when standalone
  std::vector<double> context_reward;     // empty for plain tabular runs
  std::vector<double> context_transition; // empty for plain tabular runs
  std::vector<EpisodeStep> steps;         // length == horizon

  double total_reward() const {
    double t = 0.0;
    for (const auto& st : steps) t += st.reward;
    return t;
  }
};

// Roll out one episode. Transition draws and reward noise come from
// separate engines so the two sample streams stay independent.
inline EpisodeTrace sample_episode(const TabularMdp& m, const Policy& pi, std::int64_t episode,
                                   Rng& transition_rng, Rng& reward_rng) {
  const int H = m.horizon;
  if (pi.horizon != H || pi.num_states != m.num_states)
    throw std::invalid_argument("sample_episode: policy shape mismatch");
  EpisodeTrace tr;
  tr.episode = episode;
  tr.steps.resize(H);
  int s = m.initial_state;
  for (int h = 0; h < H; ++h) {
    const int a = pi.at(h, s);
    const double mean = m.r(s, a);
    const double rew = m.noise == RewardNoise::bernoulli
                           ? (reward_rng.bernoulli(mean) ? 1.0 : 0.0)
                           : mean;
    const int s2 = transition_rng.categorical(m.row(s, a));
    tr.steps[h] = {s, a, rew, s2};
    s = s2;
  }
  return tr;
}

} // namespace certrl
