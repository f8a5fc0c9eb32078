// JSON (de)serialization.
//
// Documents carry schemaVersion and kind fields; readers reject unknown
// versions rather than guessing. ordered_json keeps field order stable so
// identical runs produce byte-identical files. nlohmann prints doubles as
// the shortest string that round-trips, so serialization is lossless.

#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "contextual.hpp"
#include "ipoc.hpp"
#include "mdp.hpp"
#include "orlc.hpp"
#include "orlc_si.hpp"

namespace certrl {

using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline void check_schema(const ojson& j, const char* kind) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  if (j.value("schemaVersion", -1) != kSchemaVersion)
    throw std::invalid_argument("unsupported schemaVersion");
  if (j.value("kind", std::string{}) != kind)
    throw std::invalid_argument(std::string("expected kind '") + kind + "'");
}

inline RewardNoise reward_noise_from_string(const std::string& s) {
  if (s == "bernoulli") return RewardNoise::bernoulli;
  if (s == "deterministic") return RewardNoise::deterministic;
  throw std::invalid_argument("unknown reward noise '" + s + "'");
}

// ---- tabular instances ----

inline ojson to_json(const TabularMdp& m) {
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "tabularMdp";
  j["states"] = m.num_states;
  j["actions"] = m.num_actions;
  j["horizon"] = m.horizon;
  j["initialState"] = m.initial_state;
  j["rewardNoise"] = to_string(m.noise);
  j["rewardMean"] = m.reward_mean;
  j["transition"] = m.transition;
  j["generator"] = {{"name", m.generator_name}, {"seed", m.generator_seed}};
  return j;
}

inline TabularMdp tabular_from_json(const ojson& j) {
  check_schema(j, "tabularMdp");
  TabularMdp m(j.at("states").get<int>(), j.at("actions").get<int>(), j.at("horizon").get<int>());
  m.initial_state = j.at("initialState").get<int>();
  m.noise = reward_noise_from_string(j.at("rewardNoise").get<std::string>());
  m.reward_mean = j.at("rewardMean").get<std::vector<double>>();
  m.transition = j.at("transition").get<std::vector<double>>();
  if (j.contains("generator")) {
    m.generator_name = j["generator"].value("name", std::string{});
    m.generator_seed = j["generator"].value("seed", std::uint64_t{0});
  }
  require_valid(m);
  return m;
}

// ---- contextual instances ----

inline ojson to_json(const ContextSampler& cs) {
  ojson j;
  if (cs.kind == ContextSampler::Kind::constant) {
    j["kind"] = "constant";
    j["value"] = cs.constant_value;
  } else {
    j["kind"] = "dirichlet";
    ojson sched = ojson::array();
    for (const auto& pt : cs.schedule)
      sched.push_back({{"fromEpisode", pt.from_episode}, {"alpha", pt.alpha}});
    j["schedule"] = std::move(sched);
  }
  return j;
}

inline ContextSampler context_sampler_from_json(const ojson& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ContextSampler::constant(j.at("value").get<std::vector<double>>());
  if (kind == "dirichlet") {
    std::vector<ContextSchedulePoint> sched;
    for (const auto& pt : j.at("schedule"))
      sched.push_back({pt.at("fromEpisode").get<std::int64_t>(),
                       pt.at("alpha").get<std::vector<double>>()});
    return ContextSampler::dirichlet(std::move(sched));
  }
  throw std::invalid_argument("unknown context sampler kind '" + kind + "'");
}

inline ojson to_json(const ContextualLinearMdp& m) {
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "contextualLinearMdp";
  j["states"] = m.num_states;
  j["actions"] = m.num_actions;
  j["horizon"] = m.horizon;
  j["dimReward"] = m.dim_reward;
  j["dimTransition"] = m.dim_transition;
  j["initialState"] = m.initial_state;
  j["rewardNoise"] = to_string(m.noise);
  j["thetaReward"] = m.theta_reward;
  j["thetaTransition"] = m.theta_transition;
  j["contextReward"] = to_json(m.context_reward_dist);
  j["contextTransition"] = to_json(m.context_transition_dist);
  j["xiThetaReward"] = m.xi_theta_reward;
  j["xiThetaTransition"] = m.xi_theta_transition;
  j["generator"] = {{"name", m.generator_name}, {"seed", m.generator_seed}};
  return j;
}

inline ContextualLinearMdp contextual_from_json(const ojson& j) {
  check_schema(j, "contextualLinearMdp");
  ContextualLinearMdp m(j.at("states").get<int>(), j.at("actions").get<int>(),
                        j.at("horizon").get<int>(), j.at("dimReward").get<int>(),
                        j.at("dimTransition").get<int>());
  m.initial_state = j.at("initialState").get<int>();
  m.noise = reward_noise_from_string(j.at("rewardNoise").get<std::string>());
  m.theta_reward = j.at("thetaReward").get<std::vector<double>>();
  m.theta_transition = j.at("thetaTransition").get<std::vector<double>>();
  m.context_reward_dist = context_sampler_from_json(j.at("contextReward"));
  m.context_transition_dist = context_sampler_from_json(j.at("contextTransition"));
  m.xi_theta_reward = j.at("xiThetaReward").get<double>();
  m.xi_theta_transition = j.at("xiThetaTransition").get<double>();
  if (j.contains("generator")) {
    m.generator_name = j["generator"].value("name", std::string{});
    m.generator_seed = j["generator"].value("seed", std::uint64_t{0});
  }
  auto viol = validate_contextual(m);
  if (!viol.empty()) throw std::invalid_argument("contextual_from_json: " + viol.front());
  return m;
}

// ---- stats checkpoints ----

inline ojson to_json(const VisitStats& st) {
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "visitStats";
  j["states"] = st.num_states();
  j["actions"] = st.num_actions();
  j["horizon"] = st.horizon();
  j["counts"] = std::vector<std::int64_t>(st.counts().begin(), st.counts().end());
  j["meanRewards"] = std::vector<double>(st.mean_rewards().begin(), st.mean_rewards().end());
  j["frequencies"] = std::vector<double>(st.frequencies().begin(), st.frequencies().end());
  return j;
}

inline VisitStats visit_stats_from_json(const ojson& j) {
  check_schema(j, "visitStats");
  VisitStats st(j.at("states").get<int>(), j.at("actions").get<int>(), j.at("horizon").get<int>());
  st.load(j.at("counts").get<std::vector<std::int64_t>>(),
          j.at("meanRewards").get<std::vector<double>>(),
          j.at("frequencies").get<std::vector<double>>());
  return st;
}

namespace detail {
inline std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()) * m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r) * m.cols() + c] = m(r, c);
  return out;
}
inline Eigen::MatrixXd unflatten(const std::vector<double>& v, int rows, int cols) {
  if (v.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("matrix payload size mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r) * cols + c];
  return m;
}
} // namespace detail

inline ojson to_json(const LsqStats& st) {
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "lsqStats";
  j["states"] = st.num_states();
  j["actions"] = st.num_actions();
  j["dimReward"] = st.dim_reward();
  j["dimTransition"] = st.dim_transition();
  j["lambda"] = st.lambda();
  ojson pairs = ojson::array();
  for (int s = 0; s < st.num_states(); ++s)
    for (int a = 0; a < st.num_actions(); ++a) {
      ojson e;
      e["visits"] = st.visits(s, a);
      e["gramReward"] = detail::flatten(st.gram_reward(s, a));
      e["momentReward"] = std::vector<double>(
          st.moment_reward(s, a).data(),
          st.moment_reward(s, a).data() + st.moment_reward(s, a).size());
      e["gramTransition"] = detail::flatten(st.gram_transition(s, a));
      e["momentTransition"] = detail::flatten(st.moment_transition(s, a));
      pairs.push_back(std::move(e));
    }
  j["pairs"] = std::move(pairs);
  return j;
}

inline LsqStats lsq_stats_from_json(const ojson& j) {
  check_schema(j, "lsqStats");
  const int S = j.at("states").get<int>(), A = j.at("actions").get<int>();
  const int dR = j.at("dimReward").get<int>(), dP = j.at("dimTransition").get<int>();
  LsqStats st(S, A, dR, dP, j.at("lambda").get<double>());
  const auto& pairs = j.at("pairs");
  if (static_cast<int>(pairs.size()) != S * A)
    throw std::invalid_argument("lsq_stats_from_json: pair count mismatch");
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const auto& e = pairs[static_cast<std::size_t>(s) * A + a];
      const auto mr = e.at("momentReward").get<std::vector<double>>();
      if (static_cast<int>(mr.size()) != dR)
        throw std::invalid_argument("lsq_stats_from_json: moment size mismatch");
      st.load(s, a, detail::unflatten(e.at("gramReward").get<std::vector<double>>(), dR, dR),
              Eigen::Map<const Eigen::VectorXd>(mr.data(), dR),
              detail::unflatten(e.at("gramTransition").get<std::vector<double>>(), dP, dP),
              detail::unflatten(e.at("momentTransition").get<std::vector<double>>(), dP, S),
              e.at("visits").get<std::int64_t>());
    }
  return st;
}

// ---- run records and reports ----

inline ojson to_json(const RunRecord& r) {
  ojson j;
  j["episode"] = r.episode;
  j["low"] = r.interval_low;
  j["high"] = r.interval_high;
  j["width"] = r.width;
  j["policyValue"] = r.policy_value;
  j["optimalValue"] = r.optimal_value;
  j["gap"] = r.gap;
  j["realizedReward"] = r.realized_reward;
  j["contextSegment"] = r.context_segment;
  j["gapViolation"] = r.gap_violation;
  j["intervalViolation"] = r.interval_violation;
  return j;
}

inline RunRecord run_record_from_json(const ojson& j) {
  RunRecord r;
  r.episode = j.at("episode").get<std::int64_t>();
  r.interval_low = j.at("low").get<double>();
  r.interval_high = j.at("high").get<double>();
  r.width = j.at("width").get<double>();
  r.policy_value = j.at("policyValue").get<double>();
  r.optimal_value = j.at("optimalValue").get<double>();
  r.gap = j.at("gap").get<double>();
  r.realized_reward = j.at("realizedReward").get<double>();
  r.context_segment = j.at("contextSegment").get<int>();
  r.gap_violation = j.at("gapViolation").get<bool>();
  r.interval_violation = j.at("intervalViolation").get<bool>();
  return r;
}

inline ojson to_json(const IpocReport& rep) {
  ojson j;
  j["episodes"] = rep.episodes;
  j["gapViolations"] = rep.gap_violations;
  j["intervalViolations"] = rep.interval_violations;
  j["cumulativeWidth"] = rep.cumulative_width;
  j["regret"] = rep.cumulative_gap;
  ojson mist = ojson::array();
  for (const auto& m : rep.mistakes)
    mist.push_back({{"threshold", m.threshold}, {"count", m.count}});
  j["mistakes"] = std::move(mist);
  j["correlationDefined"] = rep.correlation_defined;
  j["correlation"] = rep.correlation;
  ojson pac = ojson::array();
  for (const auto& p : rep.pac) {
    ojson e;
    e["level"] = p.level;
    if (p.episode >= 0)
      e["episode"] = p.episode;
    else
      e["episode"] = nullptr;
    pac.push_back(std::move(e));
  }
  j["pac"] = std::move(pac);
  return j;
}

inline IpocReport ipoc_report_from_json(const ojson& j) {
  IpocReport rep;
  rep.episodes = j.at("episodes").get<std::int64_t>();
  rep.gap_violations = j.at("gapViolations").get<std::int64_t>();
  rep.interval_violations = j.at("intervalViolations").get<std::int64_t>();
  rep.cumulative_width = j.at("cumulativeWidth").get<double>();
  rep.cumulative_gap = j.at("regret").get<double>();
  for (const auto& m : j.at("mistakes"))
    rep.mistakes.push_back({m.at("threshold").get<double>(), m.at("count").get<std::int64_t>()});
  rep.correlation_defined = j.at("correlationDefined").get<bool>();
  rep.correlation = j.at("correlation").get<double>();
  for (const auto& p : j.at("pac")) {
    PacResult pr;
    pr.level = p.at("level").get<double>();
    pr.episode = p.at("episode").is_null() ? -1 : p.at("episode").get<std::int64_t>();
    rep.pac.push_back(pr);
  }
  return rep;
}

} // namespace certrl
