// Optimistic RL with linear side information.
//
// Rewards and transition rows are linear in per-episode context vectors;
// the algorithm keeps ridge-regression estimates per (s,a) and plans with
// ellipsoid confidence widths around them. Two planners:
//   * holder: widens Q by ||v_next||_1 * width_p + width_r on both sides
//   * mass_constrained (default): optimizes the next-step expectation over
//     all probability rows within width_p of the estimate, paying only the
//     reward width on top; falls back to the holder widening at any (s,a,h)
//     where that constraint set is empty
//
// Estimated rows are clipped per coordinate into [0,1] but never
// renormalized: the confidence set is centered at the raw estimate, and
// renormalizing would silently move its center.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bounds.hpp"
#include "box_simplex.hpp"
#include "contextual.hpp"
#include "mdp.hpp"
#include "rng.hpp"

namespace certrl {

enum class PlannerKind { holder, mass_constrained };

inline const char* to_string(PlannerKind p) {
  return p == PlannerKind::holder ? "holder" : "massConstrained";
}

struct SiParams {
  double delta = 0.1;
  double lambda = 1.0;
  PlannerKind planner = PlannerKind::mass_constrained;
  // <= 0 means "use the environment's parameter norm bound".
  double xi_reward = 0.0;
  double xi_transition = 0.0;
};

// Ridge-regression sufficient statistics per (s,a): Gram matrices and
// moment vectors for the reward scalar and for each successor indicator.
class LsqStats {
public:
  LsqStats() = default;
  LsqStats(int S, int A, int dR, int dP, double lambda)
      : S_(S), A_(A), dR_(dR), dP_(dP), lambda_(lambda) {
    if (S <= 0 || A <= 0 || dR <= 0 || dP <= 0)
      throw std::invalid_argument("LsqStats: bad dims");
    if (!(lambda > 0.0)) throw std::invalid_argument("LsqStats: lambda must be positive");
    const std::size_t SA = static_cast<std::size_t>(S) * A;
    gram_r_.assign(SA, lambda * Eigen::MatrixXd::Identity(dR, dR));
    gram_p_.assign(SA, lambda * Eigen::MatrixXd::Identity(dP, dP));
    mom_r_.assign(SA, Eigen::VectorXd::Zero(dR));
    mom_p_.assign(SA, Eigen::MatrixXd::Zero(dP, S));
    visits_.assign(SA, 0);
  }

  int num_states() const { return S_; }
  int num_actions() const { return A_; }
  int dim_reward() const { return dR_; }
  int dim_transition() const { return dP_; }
  double lambda() const { return lambda_; }
  std::int64_t visits(int s, int a) const { return visits_[idx(s, a)]; }

  const Eigen::MatrixXd& gram_reward(int s, int a) const { return gram_r_[idx(s, a)]; }
  const Eigen::MatrixXd& gram_transition(int s, int a) const { return gram_p_[idx(s, a)]; }
  const Eigen::VectorXd& moment_reward(int s, int a) const { return mom_r_[idx(s, a)]; }
  // Columns indexed by successor state.
  const Eigen::MatrixXd& moment_transition(int s, int a) const { return mom_p_[idx(s, a)]; }

  void record(int s, int a, double reward, int next_state, const Eigen::VectorXd& x_r,
              const Eigen::VectorXd& x_p) {
    const std::size_t i = idx(s, a);
    gram_r_[i].noalias() += x_r * x_r.transpose();
    mom_r_[i].noalias() += x_r * reward;
    gram_p_[i].noalias() += x_p * x_p.transpose();
    mom_p_[i].col(next_state).noalias() += x_p;
    ++visits_[i];
  }

  void record_episode(const EpisodeTrace& tr) {
    if (static_cast<int>(tr.context_reward.size()) != dR_ ||
        static_cast<int>(tr.context_transition.size()) != dP_)
      throw std::invalid_argument("LsqStats::record_episode: trace has no matching contexts");
    const Eigen::Map<const Eigen::VectorXd> x_r(tr.context_reward.data(), dR_);
    const Eigen::Map<const Eigen::VectorXd> x_p(tr.context_transition.data(), dP_);
    for (const auto& st : tr.steps) record(st.state, st.action, st.reward, st.next_state, x_r, x_p);
  }

  void load(int s, int a, const Eigen::MatrixXd& gram_r, const Eigen::VectorXd& mom_r,
            const Eigen::MatrixXd& gram_p, const Eigen::MatrixXd& mom_p, std::int64_t visits) {
    const std::size_t i = idx(s, a);
    if (gram_r.rows() != dR_ || gram_r.cols() != dR_ || mom_r.size() != dR_ ||
        gram_p.rows() != dP_ || gram_p.cols() != dP_ || mom_p.rows() != dP_ || mom_p.cols() != S_)
      throw std::invalid_argument("LsqStats::load: shape mismatch");
    gram_r_[i] = gram_r;
    mom_r_[i] = mom_r;
    gram_p_[i] = gram_p;
    mom_p_[i] = mom_p;
    visits_[i] = visits;
  }

private:
  std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * A_ + a; }

  int S_ = 0, A_ = 0, dR_ = 0, dP_ = 0;
  double lambda_ = 1.0;
  std::vector<Eigen::MatrixXd> gram_r_, gram_p_;
  std::vector<Eigen::VectorXd> mom_r_;
  std::vector<Eigen::MatrixXd> mom_p_;
  std::vector<std::int64_t> visits_;
};

// Confidence width for <x, theta> under a ridge estimate with Gram matrix
// N = lambda I + sum x x^T:
//   (sqrt(lambda) xi + sqrt(0.5 ln(1/delta_event) + 0.25 ln(det N / lambda^d)))
//     * ||x||_{N^{-1}}.
// delta_event is the failure probability allotted to this single estimate.
inline double ellipsoid_width(const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det,
                              const Eigen::VectorXd& x, double xi, double lambda,
                              double delta_event) {
  const int d = static_cast<int>(x.size());
  const double norm2 = x.dot(llt.solve(x));
  const double log_det_ratio = log_det - d * std::log(lambda);
  const double root =
      std::sqrt(0.5 * std::log(1.0 / delta_event) + 0.25 * std::max(log_det_ratio, 0.0));
  return (std::sqrt(lambda) * xi + root) * std::sqrt(std::max(norm2, 0.0));
}

inline double ellipsoid_width(const Eigen::MatrixXd& gram, const Eigen::VectorXd& x, double xi,
                              double lambda, double delta_event) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ellipsoid_width: Gram matrix not positive definite");
  double log_det = 0.0;
  const auto& L = llt.matrixLLT();
  for (int i = 0; i < gram.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
  return ellipsoid_width(llt, log_det, x, xi, lambda, delta_event);
}

// Failure probability is split across every simultaneously-held estimate:
// S*A transition rows with S coordinates each, S*A reward estimates, and a
// per-step slack that scales with H.
inline double si_union_delta(int S, int A, int H, double delta) {
  return delta / (static_cast<double>(S) * (static_cast<double>(S) * A + A + H));
}

// Point estimates and widths for one episode's contexts, all (s,a) pairs.
struct SaModel {
  double mean_reward = 0.0;         // clipped to [0,1]
  double width_reward = 0.0;
  std::vector<double> row;          // clipped to [0,1] per coordinate, not renormalized
  double width_transition = 0.0;    // one width shared by every coordinate of the row
};

inline std::vector<SaModel> evaluate_models(const LsqStats& stats, std::span<const double> x_r,
                                            std::span<const double> x_p, const SiParams& params,
                                            int H) {
  const int S = stats.num_states(), A = stats.num_actions();
  const int dR = stats.dim_reward(), dP = stats.dim_transition();
  if (static_cast<int>(x_r.size()) != dR || static_cast<int>(x_p.size()) != dP)
    throw std::invalid_argument("evaluate_models: context dimension mismatch");
  if (!(params.xi_reward > 0.0) || !(params.xi_transition > 0.0))
    throw std::invalid_argument("evaluate_models: xi bounds must be resolved and positive");
  const double delta_event = si_union_delta(S, A, H, params.delta);
  const Eigen::Map<const Eigen::VectorXd> xr(x_r.data(), dR);
  const Eigen::Map<const Eigen::VectorXd> xp(x_p.data(), dP);

  std::vector<SaModel> out(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      SaModel& m = out[static_cast<std::size_t>(s) * A + a];
      // One factorization per Gram matrix, reused for the point estimate,
      // the width norm, and the log-determinant.
      Eigen::LLT<Eigen::MatrixXd> llt_r(stats.gram_reward(s, a));
      Eigen::LLT<Eigen::MatrixXd> llt_p(stats.gram_transition(s, a));
      if (llt_r.info() != Eigen::Success || llt_p.info() != Eigen::Success)
        throw std::runtime_error("evaluate_models: Gram matrix not positive definite");
      double log_det_r = 0.0, log_det_p = 0.0;
      for (int i = 0; i < dR; ++i) log_det_r += 2.0 * std::log(llt_r.matrixLLT()(i, i));
      for (int i = 0; i < dP; ++i) log_det_p += 2.0 * std::log(llt_p.matrixLLT()(i, i));

      const Eigen::VectorXd theta_r = llt_r.solve(stats.moment_reward(s, a));
      m.mean_reward = std::min(std::max(xr.dot(theta_r), 0.0), 1.0);
      m.width_reward =
          ellipsoid_width(llt_r, log_det_r, xr, params.xi_reward, params.lambda, delta_event);

      const Eigen::MatrixXd theta_p = llt_p.solve(stats.moment_transition(s, a)); // dP x S
      m.row.resize(static_cast<std::size_t>(S));
      for (int s2 = 0; s2 < S; ++s2)
        m.row[static_cast<std::size_t>(s2)] = std::min(std::max(xp.dot(theta_p.col(s2)), 0.0), 1.0);
      m.width_transition =
          ellipsoid_width(llt_p, log_det_p, xp, params.xi_transition, params.lambda, delta_event);
    }
  return out;
}

// Confidence-widened backward induction over per-context linear estimates.
inline ValueBounds plan_optimistic_si(const LsqStats& stats, std::span<const double> x_r,
                                      std::span<const double> x_p, const SiParams& params,
                                      int H) {
  const int S = stats.num_states(), A = stats.num_actions();
  const auto models = evaluate_models(stats, x_r, x_p, params, H);
  ValueBounds out(S, A, H);
  std::vector<double> neg_vl(static_cast<std::size_t>(S));
  for (int h = H - 1; h >= 0; --h) {
    const double cap = static_cast<double>(H - h);
    const std::span<const double> vu{out.v_upper.data() + static_cast<std::size_t>(h + 1) * S,
                                     static_cast<std::size_t>(S)};
    const std::span<const double> vl{out.v_lower.data() + static_cast<std::size_t>(h + 1) * S,
                                     static_cast<std::size_t>(S)};
    double vu_l1 = 0.0;
    for (int s2 = 0; s2 < S; ++s2) {
      vu_l1 += std::abs(vu[s2]);
      neg_vl[s2] = -vl[s2];
    }
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const SaModel& m = models[static_cast<std::size_t>(s) * A + a];
        double qu = 0.0, ql = 0.0;
        bool holder = params.planner == PlannerKind::holder;
        if (!holder) {
          const auto up = box_simplex_try_max(m.row, m.width_transition, vu);
          const auto neg_low = box_simplex_try_max(m.row, m.width_transition, neg_vl);
          if (up && neg_low) {
            qu = m.mean_reward + *up + m.width_reward;
            ql = m.mean_reward - *neg_low - m.width_reward;
          } else {
            holder = true; // empty constraint set: fall back for this (s,a,h)
          }
        }
        if (holder) {
          const double psi = vu_l1 * m.width_transition + m.width_reward;
          double eu = 0.0, el = 0.0;
          for (int s2 = 0; s2 < S; ++s2) {
            eu += m.row[static_cast<std::size_t>(s2)] * vu[s2];
            el += m.row[static_cast<std::size_t>(s2)] * vl[s2];
          }
          qu = m.mean_reward + eu + psi;
          ql = m.mean_reward + el - psi;
        }
        qu = std::min(std::max(qu, 0.0), cap);
        ql = std::min(std::max(ql, 0.0), cap);
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

class OrlcSiRunner {
public:
  struct Outcome {
    ValueBounds bounds;
    Certificate certificate;
    EpisodeTrace trace;
    TabularMdp realized;     // the tabular MDP this episode actually played in
    int context_segment = -1;
  };

  OrlcSiRunner(ContextualLinearMdp env, SiParams params, std::uint64_t root_seed)
      : env_(std::move(env)), params_(params),
        stats_(env_.num_states, env_.num_actions, env_.dim_reward, env_.dim_transition,
               params.lambda),
        ctx_r_rng_(root_seed, Stream::context_reward),
        ctx_p_rng_(root_seed, Stream::context_transition),
        transition_rng_(root_seed, Stream::transition), reward_rng_(root_seed, Stream::reward) {
    auto viol = validate_contextual(env_);
    if (!viol.empty()) throw std::invalid_argument("OrlcSiRunner: " + viol.front());
    if (!(params_.xi_reward > 0.0)) params_.xi_reward = env_.xi_theta_reward;
    if (!(params_.xi_transition > 0.0)) params_.xi_transition = env_.xi_theta_transition;
  }

  const ContextualLinearMdp& env() const { return env_; }
  const LsqStats& stats() const { return stats_; }
  const SiParams& params() const { return params_; }
  std::int64_t episodes_done() const { return episode_; }

  void restore_stats(LsqStats stats, std::int64_t episodes_done) {
    stats_ = std::move(stats);
    episode_ = episodes_done;
  }

  Outcome step() {
    ++episode_;
    Outcome out;
    out.context_segment = env_.context_reward_dist.segment_at(episode_);
    const auto x_r = env_.context_reward_dist.sample(episode_, ctx_r_rng_);
    const auto x_p = env_.context_transition_dist.sample(episode_, ctx_p_rng_);
    out.realized = realize_context(env_, x_r, x_p);
    out.bounds = plan_optimistic_si(stats_, x_r, x_p, params_, env_.horizon);
    out.certificate = out.bounds.certificate(env_.initial_state);
    out.trace =
        sample_episode(out.realized, out.bounds.policy, episode_, transition_rng_, reward_rng_);
    out.trace.context_reward = x_r;
    out.trace.context_transition = x_p;
    stats_.record_episode(out.trace);
    return out;
  }

private:
  ContextualLinearMdp env_;
  SiParams params_;
  LsqStats stats_;
  Rng ctx_r_rng_, ctx_p_rng_, transition_rng_, reward_rng_;
  std::int64_t episode_ = 0;
};

} // namespace certrl
