// MDPs with linear side information.
//
// An environment draws per-episode context vectors x_r (dim dR) and x_p
// (dim dP); the episode then plays out in the tabular MDP with
//   R(s,a)    = <x_r, theta_r(s,a)>
//   P(s'|s,a) = <x_p, theta_p(s,a,s')>
// The parameter tensors must be chosen so every realized instance is a
// valid MDP; realize_context verifies and refuses, it never repairs.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdp.hpp"
#include "rng.hpp"

namespace certrl {

// Piecewise-constant Dirichlet schedule: entry i applies from from_episode
// (1-based, inclusive) until the next entry takes over.
struct ContextSchedulePoint {
  std::int64_t from_episode = 1;
  std::vector<double> alpha;
};

struct ContextSampler {
  enum class Kind { constant, dirichlet };
  Kind kind = Kind::constant;
  std::vector<double> constant_value{1.0};
  std::vector<ContextSchedulePoint> schedule;

  static ContextSampler constant(std::vector<double> value) {
    ContextSampler cs;
    cs.kind = Kind::constant;
    cs.constant_value = std::move(value);
    return cs;
  }

  static ContextSampler dirichlet(std::vector<ContextSchedulePoint> sched) {
    if (sched.empty()) throw std::invalid_argument("context schedule must be nonempty");
    if (sched.front().from_episode > 1)
      throw std::invalid_argument("context schedule must start at episode 1");
    const std::size_t d = sched.front().alpha.size();
    for (std::size_t i = 0; i < sched.size(); ++i) {
      if (sched[i].alpha.size() != d)
        throw std::invalid_argument("context schedule entries disagree on dimension");
      for (double a : sched[i].alpha)
        if (!(a > 0.0)) throw std::invalid_argument("context schedule alpha must be positive");
      if (i > 0 && sched[i].from_episode <= sched[i - 1].from_episode)
        throw std::invalid_argument("context schedule must be strictly increasing");
    }
    ContextSampler cs;
    cs.kind = Kind::dirichlet;
    cs.schedule = std::move(sched);
    return cs;
  }

  int dim() const {
    return kind == Kind::constant ? static_cast<int>(constant_value.size())
                                  : static_cast<int>(schedule.front().alpha.size());
  }

  // Index of the schedule segment active at the given episode (-1 when the
  // sampler is constant). Used to tag records around distribution shifts.
  int segment_at(std::int64_t episode) const {
    if (kind == Kind::constant) return -1;
    int seg = 0;
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (episode >= schedule[i].from_episode) seg = static_cast<int>(i);
    return seg;
  }

  std::vector<double> sample(std::int64_t episode, Rng& rng) const {
    if (kind == Kind::constant) return constant_value;
    const int seg = segment_at(episode);
    return rng.dirichlet(schedule[static_cast<std::size_t>(seg)].alpha);
  }
};

struct ContextualLinearMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int dim_reward = 0;     // dR
  int dim_transition = 0; // dP
  int initial_state = 0;
  RewardNoise noise = RewardNoise::bernoulli;

  std::vector<double> theta_reward;     // [s][a][i], S*A*dR
  std::vector<double> theta_transition; // [s][a][s'][j], S*A*S*dP

  ContextSampler context_reward_dist;
  ContextSampler context_transition_dist;

  // Prior bounds on parameter norms, ||theta||_2 <= xi; used by planners.
  double xi_theta_reward = 0.0;
  double xi_theta_transition = 0.0;

  std::string generator_name;
  std::uint64_t generator_seed = 0;

  ContextualLinearMdp() = default;
  ContextualLinearMdp(int S, int A, int H, int dR, int dP)
      : num_states(S), num_actions(A), horizon(H), dim_reward(dR), dim_transition(dP),
        theta_reward(static_cast<std::size_t>(S) * A * dR, 0.0),
        theta_transition(static_cast<std::size_t>(S) * A * S * dP, 0.0) {}

  std::span<const double> theta_r(int s, int a) const {
    return {theta_reward.data() + (static_cast<std::size_t>(s) * num_actions + a) * dim_reward,
            static_cast<std::size_t>(dim_reward)};
  }
  std::span<double> theta_r(int s, int a) {
    return {theta_reward.data() + (static_cast<std::size_t>(s) * num_actions + a) * dim_reward,
            static_cast<std::size_t>(dim_reward)};
  }
  std::span<const double> theta_p(int s, int a, int s2) const {
    return {theta_transition.data() +
                ((static_cast<std::size_t>(s) * num_actions + a) * num_states + s2) *
                    dim_transition,
            static_cast<std::size_t>(dim_transition)};
  }
  std::span<double> theta_p(int s, int a, int s2) {
    return {theta_transition.data() +
                ((static_cast<std::size_t>(s) * num_actions + a) * num_states + s2) *
                    dim_transition,
            static_cast<std::size_t>(dim_transition)};
  }
};

inline std::vector<std::string> validate_contextual(const ContextualLinearMdp& m) {
  std::vector<std::string> out;
  if (m.num_states <= 0 || m.num_actions <= 0 || m.horizon <= 0 || m.dim_reward <= 0 ||
      m.dim_transition <= 0) {
    out.push_back("dimensions must be positive");
    return out;
  }
  const std::size_t S = m.num_states, A = m.num_actions;
  if (m.theta_reward.size() != S * A * static_cast<std::size_t>(m.dim_reward))
    out.push_back("reward parameter tensor size mismatch");
  if (m.theta_transition.size() != S * A * S * static_cast<std::size_t>(m.dim_transition))
    out.push_back("transition parameter tensor size mismatch");
  if (m.initial_state < 0 || m.initial_state >= m.num_states)
    out.push_back("initial state out of range");
  if (m.context_reward_dist.dim() != m.dim_reward)
    out.push_back("reward context sampler dimension mismatch");
  if (m.context_transition_dist.dim() != m.dim_transition)
    out.push_back("transition context sampler dimension mismatch");
  if (!(m.xi_theta_reward > 0.0) || !(m.xi_theta_transition > 0.0))
    out.push_back("parameter norm bounds must be positive");
  return out;
}

// Instantiate the tabular MDP for one context pair. Throws if the realized
// tables fail validation: that indicates a generator bug, and silently
// repairing rows here would mask it.
inline TabularMdp realize_context(const ContextualLinearMdp& m, std::span<const double> x_r,
                                  std::span<const double> x_p) {
  if (static_cast<int>(x_r.size()) != m.dim_reward ||
      static_cast<int>(x_p.size()) != m.dim_transition)
    throw std::invalid_argument("realize_context: context dimension mismatch");
  TabularMdp out(m.num_states, m.num_actions, m.horizon);
  out.initial_state = m.initial_state;
  out.noise = m.noise;
  for (int s = 0; s < m.num_states; ++s)
    for (int a = 0; a < m.num_actions; ++a) {
      const auto tr = m.theta_r(s, a);
      double rv = 0.0;
      for (int i = 0; i < m.dim_reward; ++i) rv += x_r[i] * tr[i];
      out.r(s, a) = rv;
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        const auto tp = m.theta_p(s, a, s2);
        double pv = 0.0;
        for (int j = 0; j < m.dim_transition; ++j) pv += x_p[j] * tp[j];
        out.p(s, a, s2) = pv;
      }
    }
  auto viol = validate_mdp(out);
  if (!viol.empty())
    throw std::domain_error("realize_context produced an invalid MDP: " + viol.front());
  return out;
}

} // namespace certrl
