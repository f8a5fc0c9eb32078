// Output of confidence-widened planning: two-sided value bounds and the
// per-episode certificate derived from them.

#pragma once

#include <cstddef>
#include <vector>

#include "mdp.hpp"

namespace certrl {

// Interval guaranteed (with high probability) to contain the expected
// return of the policy played this episode, with the optimum below the
// upper end. width() is the certified suboptimality budget.
struct Certificate {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

// Upper/lower Q and V tables plus the greedy policy with respect to the
// upper bounds. Indexing matches PlanningResult: v has a terminal row of
// zeros at h == horizon.
struct ValueBounds {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> q_upper, q_lower; // [h][s][a]
  std::vector<double> v_upper, v_lower; // [h][s]
  Policy policy;

  ValueBounds() = default;
  ValueBounds(int S, int A, int H)
      : num_states(S), num_actions(A), horizon(H),
        q_upper(static_cast<std::size_t>(H) * S * A, 0.0),
        q_lower(static_cast<std::size_t>(H) * S * A, 0.0),
        v_upper(static_cast<std::size_t>(H + 1) * S, 0.0),
        v_lower(static_cast<std::size_t>(H + 1) * S, 0.0), policy(H, S) {}

  double vu(int h, int s) const { return v_upper[static_cast<std::size_t>(h) * num_states + s]; }
  double vl(int h, int s) const { return v_lower[static_cast<std::size_t>(h) * num_states + s]; }
  double qu(int h, int s, int a) const {
    return q_upper[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double ql(int h, int s, int a) const {
    return q_lower[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  Certificate certificate(int initial_state) const {
    return Certificate{vl(0, initial_state), vu(0, initial_state)};
  }
};

} // namespace certrl
