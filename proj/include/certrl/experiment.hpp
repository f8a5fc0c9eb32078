// Config-driven experiment runner.
//
// An experiment = environment spec + algorithm + audit settings + seeds.
// Each seed runs independently and deterministically: the instance, the
// contexts, and all noise derive from that seed alone, so rerunning a
// config produces byte-identical record files. Per seed the runner writes
//   <outDir>/<name>/seed<seed>.records.jsonl   audited episode records
//   <outDir>/<name>/seed<seed>.report.json     aggregate audit report
//   <outDir>/<name>/seed<seed>.instance.json   the generated instance
// Records are strided to keep files small, but the first and last 1000
// episodes and every violation are always written.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "generators.hpp"
#include "ipoc.hpp"
#include "orlc.hpp"
#include "orlc_si.hpp"
#include "serialize.hpp"

namespace certrl {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvKind { random_tabular, random_contextual, contextual_bandit, bandit, file };
enum class AlgorithmKind { orlc, orlc_si };

inline const char* to_string(EnvKind k) {
  switch (k) {
    case EnvKind::random_tabular: return "randomTabular";
    case EnvKind::random_contextual: return "randomContextual";
    case EnvKind::contextual_bandit: return "contextualBandit";
    case EnvKind::bandit: return "bandit";
    case EnvKind::file: return "file";
  }
  return "?";
}
inline const char* to_string(AlgorithmKind k) {
  return k == AlgorithmKind::orlc ? "orlc" : "orlcSi";
}

struct EnvironmentSpec {
  EnvKind kind = EnvKind::random_tabular;
  int states = 5;
  int actions = 3;
  int horizon = 4;
  int dim_reward = 4;
  std::vector<ContextSchedulePoint> schedule; // contextual kinds; empty -> single all-0.7
  std::string path;                           // kind == file
};

struct ExperimentConfig {
  std::string name = "run";
  AlgorithmKind algorithm = AlgorithmKind::orlc;
  EnvironmentSpec env;
  std::int64_t episodes = 20000;
  double delta = 0.1;
  BonusKind bonus = BonusKind::refined;                          // orlc
  ConfidenceVariant variant = ConfidenceVariant::tight;          // orlc
  double lambda = 1.0;                                           // orlcSi
  PlannerKind planner = PlannerKind::mass_constrained;           // orlcSi
  std::optional<double> xi_reward, xi_transition;                // orlcSi overrides
  std::vector<std::uint64_t> seeds{1};
  std::int64_t stride = 100;
  std::vector<double> mistake_thresholds; // empty -> {H/2, H/10, H/100}
  std::vector<double> pac_levels;         // empty -> {H/2, H/4, H/10}
  std::string out_dir;                    // empty -> $CERTRL_OUT_DIR or "runs"
  bool save_instance = true;
  bool zero_certificates = false; // fault injection: report empty certificates
  int jobs = 1;

  OrlcParams orlc_params() const { return {delta, variant, bonus}; }
  SiParams si_params() const {
    return {delta, lambda, planner, xi_reward.value_or(0.0), xi_transition.value_or(0.0)};
  }
};

inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> out;
  if (c.name.empty()) out.push_back("name must be nonempty");
  if (c.name.find('/') != std::string::npos || c.name.find('\\') != std::string::npos)
    out.push_back("name must not contain path separators");
  if (c.episodes < 1) out.push_back("episodes must be >= 1");
  if (!(c.delta > 0.0 && c.delta < 1.0)) out.push_back("delta must be in (0,1)");
  if (!(c.lambda > 0.0)) out.push_back("lambda must be > 0");
  if (c.stride < 1) out.push_back("stride must be >= 1");
  if (c.seeds.empty()) out.push_back("seeds must be nonempty");
  if (c.jobs < 1) out.push_back("jobs must be >= 1");
  if (c.xi_reward && !(*c.xi_reward > 0.0)) out.push_back("xiReward must be > 0");
  if (c.xi_transition && !(*c.xi_transition > 0.0)) out.push_back("xiTransition must be > 0");
  for (double t : c.mistake_thresholds)
    if (!(t >= 0.0)) out.push_back("mistake thresholds must be >= 0");
  for (double l : c.pac_levels)
    if (!(l > 0.0)) out.push_back("pac levels must be > 0");

  const bool contextual_kind =
      c.env.kind == EnvKind::random_contextual || c.env.kind == EnvKind::contextual_bandit;
  if (c.env.kind == EnvKind::file) {
    if (c.env.path.empty()) out.push_back("environment.path required for kind=file");
  } else {
    if (c.env.actions <= 0) out.push_back("environment.actions must be > 0");
    if (c.env.kind == EnvKind::random_tabular || c.env.kind == EnvKind::random_contextual) {
      if (c.env.states <= 0) out.push_back("environment.states must be > 0");
      if (c.env.horizon <= 0) out.push_back("environment.horizon must be > 0");
    }
    if (contextual_kind && c.env.dim_reward <= 0)
      out.push_back("environment.dimReward must be > 0");
  }
  if (c.algorithm == AlgorithmKind::orlc && contextual_kind)
    out.push_back("algorithm orlc requires a tabular environment");
  if (c.algorithm == AlgorithmKind::orlc_si && !contextual_kind && c.env.kind != EnvKind::file)
    out.push_back("algorithm orlcSi requires a contextual environment");
  if (!c.env.schedule.empty()) {
    try {
      ContextSampler::dirichlet(c.env.schedule);
    } catch (const std::exception& e) {
      out.push_back(std::string("environment.schedule: ") + e.what());
    }
    if (contextual_kind && !c.env.schedule.empty() &&
        static_cast<int>(c.env.schedule.front().alpha.size()) != c.env.dim_reward)
      out.push_back("environment.schedule alpha dimension must equal dimReward");
  }
  return out;
}

// ---- config JSON ----

inline AlgorithmKind algorithm_from_string(const std::string& s) {
  if (s == "orlc") return AlgorithmKind::orlc;
  if (s == "orlcSi") return AlgorithmKind::orlc_si;
  throw config_error("unknown algorithm '" + s + "'");
}
inline EnvKind env_kind_from_string(const std::string& s) {
  if (s == "randomTabular") return EnvKind::random_tabular;
  if (s == "randomContextual") return EnvKind::random_contextual;
  if (s == "contextualBandit") return EnvKind::contextual_bandit;
  if (s == "bandit") return EnvKind::bandit;
  if (s == "file") return EnvKind::file;
  throw config_error("unknown environment kind '" + s + "'");
}
inline BonusKind bonus_from_string(const std::string& s) {
  if (s == "simple") return BonusKind::simple;
  if (s == "refined") return BonusKind::refined;
  throw config_error("unknown bonus '" + s + "'");
}
inline ConfidenceVariant variant_from_string(const std::string& s) {
  if (s == "tight") return ConfidenceVariant::tight;
  if (s == "coarse") return ConfidenceVariant::coarse;
  throw config_error("unknown confidence variant '" + s + "'");
}
inline PlannerKind planner_from_string(const std::string& s) {
  if (s == "holder") return PlannerKind::holder;
  if (s == "massConstrained") return PlannerKind::mass_constrained;
  throw config_error("unknown planner '" + s + "'");
}

inline ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "experimentConfig";
  j["name"] = c.name;
  j["algorithm"] = to_string(c.algorithm);
  ojson env;
  env["kind"] = to_string(c.env.kind);
  if (c.env.kind == EnvKind::file) {
    env["path"] = c.env.path;
  } else {
    env["actions"] = c.env.actions;
    if (c.env.kind == EnvKind::random_tabular || c.env.kind == EnvKind::random_contextual) {
      env["states"] = c.env.states;
      env["horizon"] = c.env.horizon;
    }
    if (c.env.kind == EnvKind::random_contextual || c.env.kind == EnvKind::contextual_bandit)
      env["dimReward"] = c.env.dim_reward;
  }
  if (!c.env.schedule.empty()) {
    ojson sched = ojson::array();
    for (const auto& pt : c.env.schedule)
      sched.push_back({{"fromEpisode", pt.from_episode}, {"alpha", pt.alpha}});
    env["schedule"] = std::move(sched);
  }
  j["environment"] = std::move(env);
  j["episodes"] = c.episodes;
  j["delta"] = c.delta;
  j["bonus"] = to_string(c.bonus);
  j["confidenceVariant"] = to_string(c.variant);
  j["lambda"] = c.lambda;
  j["planner"] = to_string(c.planner);
  j["xiReward"] = c.xi_reward ? ojson(*c.xi_reward) : ojson(nullptr);
  j["xiTransition"] = c.xi_transition ? ojson(*c.xi_transition) : ojson(nullptr);
  j["seeds"] = c.seeds;
  j["stride"] = c.stride;
  j["mistakeThresholds"] = c.mistake_thresholds;
  j["pacLevels"] = c.pac_levels;
  j["outDir"] = c.out_dir.empty() ? ojson(nullptr) : ojson(c.out_dir);
  j["saveInstance"] = c.save_instance;
  j["zeroCertificates"] = c.zero_certificates;
  j["jobs"] = c.jobs;
  return j;
}

inline ExperimentConfig config_from_json(const ojson& j) {
  try {
    check_schema(j, "experimentConfig");
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
  static const std::vector<std::string> known = {
      "schemaVersion", "kind",    "name",    "algorithm",         "environment",
      "episodes",      "delta",   "bonus",   "confidenceVariant", "lambda",
      "planner",       "xiReward", "xiTransition", "seeds",       "stride",
      "mistakeThresholds", "pacLevels", "outDir", "saveInstance", "zeroCertificates",
      "jobs"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw config_error("unknown config field '" + it.key() + "'");
  ExperimentConfig c;
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j["algorithm"]);
    if (j.contains("environment")) {
      const auto& env = j["environment"];
      static const std::vector<std::string> env_known = {
          "kind", "states", "actions", "horizon", "dimReward", "schedule", "path"};
      for (auto it = env.begin(); it != env.end(); ++it)
        if (std::find(env_known.begin(), env_known.end(), it.key()) == env_known.end())
          throw config_error("unknown environment field '" + it.key() + "'");
      c.env.kind = env_kind_from_string(env.at("kind"));
      if (env.contains("states")) c.env.states = env["states"].get<int>();
      if (env.contains("actions")) c.env.actions = env["actions"].get<int>();
      if (env.contains("horizon")) c.env.horizon = env["horizon"].get<int>();
      if (env.contains("dimReward")) c.env.dim_reward = env["dimReward"].get<int>();
      if (env.contains("path")) c.env.path = env["path"].get<std::string>();
      if (env.contains("schedule"))
        for (const auto& pt : env["schedule"])
          c.env.schedule.push_back({pt.at("fromEpisode").get<std::int64_t>(),
                                    pt.at("alpha").get<std::vector<double>>()});
    }
    if (j.contains("episodes")) c.episodes = j["episodes"].get<std::int64_t>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("bonus")) c.bonus = bonus_from_string(j["bonus"]);
    if (j.contains("confidenceVariant")) c.variant = variant_from_string(j["confidenceVariant"]);
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("planner")) c.planner = planner_from_string(j["planner"]);
    if (j.contains("xiReward") && !j["xiReward"].is_null())
      c.xi_reward = j["xiReward"].get<double>();
    if (j.contains("xiTransition") && !j["xiTransition"].is_null())
      c.xi_transition = j["xiTransition"].get<double>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("stride")) c.stride = j["stride"].get<std::int64_t>();
    if (j.contains("mistakeThresholds") && !j["mistakeThresholds"].is_null())
      c.mistake_thresholds = j["mistakeThresholds"].get<std::vector<double>>();
    if (j.contains("pacLevels") && !j["pacLevels"].is_null())
      c.pac_levels = j["pacLevels"].get<std::vector<double>>();
    if (j.contains("outDir") && !j["outDir"].is_null())
      c.out_dir = j["outDir"].get<std::string>();
    if (j.contains("saveInstance")) c.save_instance = j["saveInstance"].get<bool>();
    if (j.contains("zeroCertificates")) c.zero_certificates = j["zeroCertificates"].get<bool>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }
  auto viol = validate_config(c);
  if (!viol.empty()) throw config_error("invalid config: " + viol.front());
  return c;
}

// ---- presets ----

inline std::vector<ContextSchedulePoint> shift_schedule(int d, int rare, std::int64_t shift_at) {
  std::vector<double> pre(static_cast<std::size_t>(d), 0.7);
  for (int i = 0; i < rare && i < d; ++i) pre[static_cast<std::size_t>(i)] = 0.01;
  std::vector<double> post(static_cast<std::size_t>(d), 0.7);
  return {{1, std::move(pre)}, {shift_at, std::move(post)}};
}

inline std::vector<std::pair<std::string, std::string>> list_presets() {
  return {
      {"tabular-desk", "small random tabular MDPs, quick check (S=5 A=3 H=4, 20k episodes)"},
      {"tabular-paper", "larger random tabular MDP (S=20 A=4 H=10, 200k episodes)"},
      {"contextual-desk", "small contextual MDP, stationary contexts (20k episodes)"},
      {"shift-desk", "contextual MDP with a context-distribution shift at episode 50000"},
      {"shift-paper", "full-size contextual MDP, shift after 2M of 4M episodes"},
      {"bandit-desk", "20-arm bandit, 50k episodes"},
      {"bandit-paper", "100-arm bandit, 500k episodes"},
      {"contextual-bandit-desk", "10-arm contextual bandit (dR=10), 50k episodes"},
      {"contextual-bandit-paper", "40-arm contextual bandit (dR=10), 8M episodes"},
  };
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "tabular-desk") {
    c.algorithm = AlgorithmKind::orlc;
    c.env = {EnvKind::random_tabular, 5, 3, 4, 0, {}, {}};
    c.episodes = 20000;
    c.seeds = {1, 2, 3};
  } else if (name == "tabular-paper") {
    c.algorithm = AlgorithmKind::orlc;
    c.env = {EnvKind::random_tabular, 20, 4, 10, 0, {}, {}};
    c.episodes = 200000;
    c.seeds = {1};
  } else if (name == "contextual-desk") {
    c.algorithm = AlgorithmKind::orlc_si;
    c.env = {EnvKind::random_contextual, 4, 5, 3, 4, {{1, {0.7, 0.7, 0.7, 0.7}}}, {}};
    c.episodes = 20000;
    c.seeds = {1, 2, 3};
  } else if (name == "shift-desk") {
    c.algorithm = AlgorithmKind::orlc_si;
    c.env = {EnvKind::random_contextual, 5, 8, 3, 10, shift_schedule(10, 4, 50000), {}};
    c.episodes = 100000;
    c.seeds = {1};
  } else if (name == "shift-paper") {
    c.algorithm = AlgorithmKind::orlc_si;
    c.env = {EnvKind::random_contextual, 10, 40, 5, 10, shift_schedule(10, 4, 2000001), {}};
    c.episodes = 4000000;
    c.seeds = {1};
  } else if (name == "bandit-desk") {
    c.algorithm = AlgorithmKind::orlc;
    c.env = {EnvKind::bandit, 1, 20, 1, 0, {}, {}};
    c.episodes = 50000;
    c.seeds = {1};
  } else if (name == "bandit-paper") {
    c.algorithm = AlgorithmKind::orlc;
    c.env = {EnvKind::bandit, 1, 100, 1, 0, {}, {}};
    c.episodes = 500000;
    c.seeds = {1};
  } else if (name == "contextual-bandit-desk") {
    c.algorithm = AlgorithmKind::orlc_si;
    c.env = {EnvKind::contextual_bandit, 1, 10, 1, 10, {}, {}};
    c.episodes = 50000;
    c.seeds = {1};
  } else if (name == "contextual-bandit-paper") {
    c.algorithm = AlgorithmKind::orlc_si;
    c.env = {EnvKind::contextual_bandit, 1, 40, 1, 10, {}, {}};
    c.episodes = 8000000;
    c.seeds = {1};
  } else {
    throw config_error("unknown preset '" + name + "'");
  }
  return c;
}

// ---- running ----

struct SeedRunResult {
  std::uint64_t seed = 0;
  IpocReport report;
  std::int64_t recorded_lines = 0;
  std::string records_path, report_path, instance_path;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRunResult> seeds;

  bool any_violation() const {
    for (const auto& s : seeds)
      if (s.report.gap_violations > 0 || s.report.interval_violations > 0) return true;
    return false;
  }
};

inline std::string resolve_out_dir(const ExperimentConfig& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("CERTRL_OUT_DIR"); env && *env) return env;
  return "runs";
}

namespace detail {

inline bool record_this_episode(std::int64_t k, std::int64_t total, std::int64_t stride,
                                bool violation) {
  return violation || k <= 1000 || k > total - 1000 || (k - 1) % stride == 0;
}

inline std::vector<double> default_mistake_thresholds(int H) {
  const double h = static_cast<double>(H);
  return {h / 2.0, h / 10.0, h / 100.0};
}
inline std::vector<double> default_pac_levels(int H) {
  const double h = static_cast<double>(H);
  return {h / 2.0, h / 4.0, h / 10.0};
}

struct EnvHolder {
  // Exactly one is engaged, matching the algorithm that will run.
  std::optional<TabularMdp> tabular;
  std::optional<ContextualLinearMdp> contextual;
  int horizon() const {
    return tabular ? tabular->horizon : contextual->horizon;
  }
};

inline ojson load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  ojson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

inline EnvHolder build_env(const ExperimentConfig& c, std::uint64_t seed) {
  EnvHolder env;
  const auto& e = c.env;
  switch (e.kind) {
    case EnvKind::random_tabular:
      env.tabular = gen_random_tabular(e.states, e.actions, e.horizon, seed);
      break;
    case EnvKind::bandit:
      env.tabular = gen_bandit(e.actions, seed);
      break;
    case EnvKind::random_contextual: {
      auto sched = e.schedule;
      if (sched.empty())
        sched = {{1, std::vector<double>(static_cast<std::size_t>(e.dim_reward), 0.7)}};
      env.contextual = gen_random_contextual(e.states, e.actions, e.horizon, e.dim_reward,
                                             std::move(sched), seed);
      break;
    }
    case EnvKind::contextual_bandit:
      env.contextual = gen_contextual_bandit(e.actions, e.dim_reward, seed);
      break;
    case EnvKind::file: {
      const ojson j = load_json_file(e.path);
      const auto kind = j.value("kind", std::string{});
      try {
        if (kind == "tabularMdp")
          env.tabular = tabular_from_json(j);
        else if (kind == "contextualLinearMdp")
          env.contextual = contextual_from_json(j);
        else
          throw config_error("'" + e.path + "' is not an instance file");
      } catch (const config_error&) {
        throw;
      } catch (const std::exception& ex) {
        throw config_error("bad instance file '" + e.path + "': " + ex.what());
      }
      break;
    }
  }
  if (c.algorithm == AlgorithmKind::orlc && !env.tabular)
    throw config_error("algorithm orlc requires a tabular instance");
  if (c.algorithm == AlgorithmKind::orlc_si && !env.contextual)
    throw config_error("algorithm orlcSi requires a contextual instance");
  return env;
}

inline SeedRunResult run_one_seed(const ExperimentConfig& c, std::uint64_t seed,
                                  const std::filesystem::path& dir) {
  EnvHolder env = build_env(c, seed);
  const int H = env.horizon();
  const auto thresholds =
      c.mistake_thresholds.empty() ? default_mistake_thresholds(H) : c.mistake_thresholds;
  const auto pac_levels = c.pac_levels.empty() ? default_pac_levels(H) : c.pac_levels;

  SeedRunResult out;
  out.seed = seed;
  const std::string stem = "seed" + std::to_string(seed);
  const auto records_path = dir / (stem + ".records.jsonl");
  const auto report_path = dir / (stem + ".report.json");

  std::ofstream records(records_path, std::ios::binary);
  if (!records) throw io_error("cannot write '" + records_path.string() + "'");

  RunAggregator agg(thresholds, pac_levels);
  auto handle = [&](RunRecord rec) {
    agg.add(rec);
    if (record_this_episode(rec.episode, c.episodes, c.stride, rec.violation())) {
      records << to_json(rec).dump() << '\n';
      ++out.recorded_lines;
    }
  };

  if (c.algorithm == AlgorithmKind::orlc) {
    OrlcRunner runner(*env.tabular, c.orlc_params(), seed);
    if (c.save_instance) {
      const auto inst_path = dir / (stem + ".instance.json");
      std::ofstream inst(inst_path, std::ios::binary);
      if (!inst) throw io_error("cannot write '" + inst_path.string() + "'");
      inst << to_json(*env.tabular).dump(2) << '\n';
      out.instance_path = inst_path.string();
    }
    for (std::int64_t k = 1; k <= c.episodes; ++k) {
      auto step = runner.step();
      if (c.zero_certificates) step.certificate = Certificate{0.0, 0.0};
      handle(audit_episode(*env.tabular, step.bounds.policy, step.certificate, step.trace));
    }
  } else {
    OrlcSiRunner runner(*env.contextual, c.si_params(), seed);
    if (c.save_instance) {
      const auto inst_path = dir / (stem + ".instance.json");
      std::ofstream inst(inst_path, std::ios::binary);
      if (!inst) throw io_error("cannot write '" + inst_path.string() + "'");
      inst << to_json(*env.contextual).dump(2) << '\n';
      out.instance_path = inst_path.string();
    }
    for (std::int64_t k = 1; k <= c.episodes; ++k) {
      auto step = runner.step();
      if (c.zero_certificates) step.certificate = Certificate{0.0, 0.0};
      handle(audit_episode(step.realized, step.bounds.policy, step.certificate, step.trace,
                           step.context_segment));
    }
  }
  records.flush();
  if (!records) throw io_error("failed writing '" + records_path.string() + "'");
  records.close();

  out.report = agg.finish();
  out.records_path = records_path.string();
  out.report_path = report_path.string();

  ojson rj;
  rj["schemaVersion"] = kSchemaVersion;
  rj["kind"] = "report";
  rj["name"] = c.name;
  rj["seed"] = seed;
  rj["config"] = to_json(c);
  rj["recordsFile"] = records_path.filename().string();
  rj["recordedLines"] = out.recorded_lines;
  if (!out.instance_path.empty())
    rj["instanceFile"] = std::filesystem::path(out.instance_path).filename().string();
  rj["audit"] = to_json(out.report);
  std::ofstream rep(report_path, std::ios::binary);
  if (!rep) throw io_error("cannot write '" + report_path.string() + "'");
  rep << rj.dump(2) << '\n';
  if (!rep) throw io_error("failed writing '" + report_path.string() + "'");
  return out;
}

} // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  auto viol = validate_config(cfg);
  if (!viol.empty()) throw config_error("invalid config: " + viol.front());

  const std::filesystem::path dir = std::filesystem::path(resolve_out_dir(cfg)) / cfg.name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output dir '" + dir.string() + "': " + ec.message());

  ExperimentResult result;
  result.config = cfg;
  result.seeds.resize(cfg.seeds.size());

  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(cfg.seeds.size()));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      result.seeds[i] = detail::run_one_seed(cfg, cfg.seeds[i], dir);
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfg.seeds.size()) return;
        try {
          result.seeds[i] = detail::run_one_seed(cfg, cfg.seeds[i], dir);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

// ---- summaries and CSV export ----

// Combines per-seed report documents (all from the same schema) into one
// summary with per-seed rows and cross-seed means. Throws config_error on
// mixed or malformed inputs.
inline ojson summarize_reports(const std::vector<ojson>& reports) {
  if (reports.empty()) throw config_error("no reports to summarize");
  ojson rows = ojson::array();
  double mean_regret = 0.0, mean_cumwidth = 0.0;
  std::int64_t violations = 0;
  for (const auto& r : reports) {
    try {
      check_schema(r, "report");
    } catch (const std::exception& e) {
      throw config_error(std::string("bad report: ") + e.what());
    }
    const auto& a = r.at("audit");
    ojson row;
    row["name"] = r.value("name", std::string{});
    row["seed"] = r.value("seed", std::uint64_t{0});
    row["episodes"] = a.at("episodes");
    row["gapViolations"] = a.at("gapViolations");
    row["intervalViolations"] = a.at("intervalViolations");
    row["regret"] = a.at("regret");
    row["cumulativeWidth"] = a.at("cumulativeWidth");
    row["correlation"] = a.at("correlation");
    row["pac"] = a.at("pac");
    rows.push_back(std::move(row));
    mean_regret += a.at("regret").get<double>();
    mean_cumwidth += a.at("cumulativeWidth").get<double>();
    violations += a.at("gapViolations").get<std::int64_t>() +
                  a.at("intervalViolations").get<std::int64_t>();
  }
  ojson j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "summary";
  j["runs"] = static_cast<std::int64_t>(reports.size());
  j["totalViolations"] = violations;
  j["meanRegret"] = mean_regret / static_cast<double>(reports.size());
  j["meanCumulativeWidth"] = mean_cumwidth / static_cast<double>(reports.size());
  j["rows"] = std::move(rows);
  return j;
}

// Record JSONL -> CSV with a fixed column order.
inline void export_records_csv(std::istream& in, std::ostream& out) {
  out << "episode,low,high,width,policyValue,optimalValue,gap,realizedReward,"
         "contextSegment,gapViolation,intervalViolation\n";
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const std::exception& e) {
      throw config_error("records line " + std::to_string(lineno) + ": " + e.what());
    }
    const RunRecord r = run_record_from_json(j);
    out << r.episode << ',' << ojson(r.interval_low).dump() << ',' << ojson(r.interval_high).dump()
        << ',' << ojson(r.width).dump() << ',' << ojson(r.policy_value).dump() << ','
        << ojson(r.optimal_value).dump() << ',' << ojson(r.gap).dump() << ','
        << ojson(r.realized_reward).dump() << ',' << r.context_segment << ','
        << (r.gap_violation ? "true" : "false") << ','
        << (r.interval_violation ? "true" : "false") << '\n';
  }
}

} // namespace certrl
