#include <catch2/catch_amalgamated.hpp>

#include <certrl/experiment.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace certrl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::path("certrl-test-out") / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_tabular(const std::string& name, const fs::path& out) {
  ExperimentConfig c;
  c.name = name;
  c.algorithm = AlgorithmKind::orlc;
  c.env = {EnvKind::random_tabular, 3, 2, 2, 0, {}, {}};
  c.episodes = 5000;
  c.stride = 100;
  c.seeds = {4, 5};
  c.out_dir = out.string();
  return c;
}

std::int64_t count_lines(const std::string& text) {
  std::int64_t n = 0;
  for (char ch : text)
    if (ch == '\n') ++n;
  return n;
}

} // namespace

TEST_CASE("presets are valid and round-trip through JSON") {
  for (const auto& [name, blurb] : list_presets()) {
    INFO(name);
    const auto c = preset(name);
    CHECK(validate_config(c).empty());
    CHECK_FALSE(blurb.empty());
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
  }
  CHECK_THROWS_AS(preset("no-such-preset"), config_error);
}

TEST_CASE("config validation catches bad values") {
  auto base = preset("tabular-desk");
  CHECK(validate_config(base).empty());

  auto c = base;
  c.episodes = 0;
  CHECK_FALSE(validate_config(c).empty());
  c = base;
  c.delta = 1.0;
  CHECK_FALSE(validate_config(c).empty());
  c = base;
  c.stride = 0;
  CHECK_FALSE(validate_config(c).empty());
  c = base;
  c.seeds.clear();
  CHECK_FALSE(validate_config(c).empty());
  c = base;
  c.name = "has/slash";
  CHECK_FALSE(validate_config(c).empty());
  c = base;
  c.env.kind = EnvKind::random_contextual; // orlc on a contextual environment
  CHECK_FALSE(validate_config(c).empty());
  c = preset("contextual-desk");
  c.env.schedule = {{1, {0.7, 0.7}}}; // dimension 2 != dimReward 4
  CHECK_FALSE(validate_config(c).empty());
  c = preset("contextual-desk");
  c.algorithm = AlgorithmKind::orlc_si;
  c.env.kind = EnvKind::bandit;
  CHECK_FALSE(validate_config(c).empty());
}

TEST_CASE("config parsing rejects unknown fields and bad enums") {
  auto j = to_json(preset("tabular-desk"));
  auto bad = j;
  bad["stridee"] = 5;
  CHECK_THROWS_AS(config_from_json(bad), config_error);
  bad = j;
  bad["environment"]["statez"] = 4;
  CHECK_THROWS_AS(config_from_json(bad), config_error);
  bad = j;
  bad["bonus"] = "extra-fancy";
  CHECK_THROWS_AS(config_from_json(bad), config_error);
  bad = j;
  bad["kind"] = "report";
  CHECK_THROWS_AS(config_from_json(bad), config_error);
  bad = j;
  bad["episodes"] = "many";
  CHECK_THROWS_AS(config_from_json(bad), config_error);

  // Optional overrides survive a round trip.
  auto c = preset("contextual-desk");
  c.xi_reward = 2.5;
  c.xi_transition = 1.25;
  const auto back = config_from_json(to_json(c));
  REQUIRE(back.xi_reward.has_value());
  CHECK(*back.xi_reward == 2.5);
  REQUIRE(back.xi_transition.has_value());
  CHECK(*back.xi_transition == 1.25);
}

TEST_CASE("output directory resolution order") {
  ExperimentConfig c;
  c.out_dir = "explicit";
  CHECK(resolve_out_dir(c) == "explicit");
  c.out_dir.clear();
  ::setenv("CERTRL_OUT_DIR", "from-env", 1);
  CHECK(resolve_out_dir(c) == "from-env");
  ::unsetenv("CERTRL_OUT_DIR");
  CHECK(resolve_out_dir(c) == "runs");
}

TEST_CASE("a small run writes records, reports, and instances") {
  const auto out = fresh_dir("small-run");
  const auto cfg = tiny_tabular("small", out);
  const auto result = run_experiment(cfg);

  REQUIRE(result.seeds.size() == 2);
  CHECK_FALSE(result.any_violation());
  for (const auto& seed_run : result.seeds) {
    CHECK(seed_run.report.episodes == 5000);
    CHECK(seed_run.report.gap_violations == 0);
    CHECK(seed_run.report.interval_violations == 0);

    // Striding: first and last 1000 episodes plus every 100th in between.
    CHECK(seed_run.recorded_lines == 2030);
    const auto text = slurp(seed_run.records_path);
    CHECK(count_lines(text) == seed_run.recorded_lines);

    // Every line is a parseable record with sane interval fields.
    std::istringstream lines(text);
    std::string line;
    std::int64_t prev_episode = 0;
    while (std::getline(lines, line)) {
      const auto rec = run_record_from_json(ojson::parse(line));
      CHECK(rec.episode > prev_episode);
      prev_episode = rec.episode;
      CHECK(rec.interval_low <= rec.policy_value + 1e-9);
      CHECK(rec.policy_value <= rec.interval_high + 1e-9);
    }
    CHECK(prev_episode == 5000);

    const auto rep = ojson::parse(slurp(seed_run.report_path));
    CHECK(rep.at("kind") == "report");
    CHECK(rep.at("recordedLines") == seed_run.recorded_lines);
    CHECK(rep.at("audit").at("episodes") == 5000);
    CHECK(rep.at("config").at("name") == "small");

    const auto inst = ojson::parse(slurp(seed_run.instance_path));
    CHECK(inst.at("kind") == "tabularMdp");
    CHECK_NOTHROW(tabular_from_json(inst));
  }
}

TEST_CASE("reruns and parallel runs are byte-identical per seed") {
  const auto out_a = fresh_dir("det-a");
  const auto out_b = fresh_dir("det-b");
  auto cfg_a = tiny_tabular("det", out_a);
  cfg_a.episodes = 1500;
  cfg_a.seeds = {7, 8, 9};
  auto cfg_b = cfg_a;
  cfg_b.out_dir = out_b.string();
  cfg_b.jobs = 3;

  const auto ra = run_experiment(cfg_a);
  const auto rb = run_experiment(cfg_b);
  REQUIRE(ra.seeds.size() == 3);
  REQUIRE(rb.seeds.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ra.seeds[i].seed == rb.seeds[i].seed);
    CHECK(slurp(ra.seeds[i].records_path) == slurp(rb.seeds[i].records_path));
    CHECK(slurp(ra.seeds[i].instance_path) == slurp(rb.seeds[i].instance_path));
    CHECK(to_json(ra.seeds[i].report).dump() == to_json(rb.seeds[i].report).dump());
  }
}

TEST_CASE("instance files run under kind=file and broken certificates are caught") {
  const auto out = fresh_dir("file-env");

  // Deterministic machine whose optimum is 1.1: reporting empty certificates
  // must trip the audit on every policy.
  TabularMdp m(2, 2, 2);
  m.initial_state = 0;
  m.noise = RewardNoise::deterministic;
  m.r(0, 0) = 0.1;
  m.p(0, 0, 1) = 1.0;
  m.p(0, 1, 0) = 1.0;
  m.r(1, 0) = 1.0;
  m.p(1, 0, 1) = 1.0;
  m.p(1, 1, 0) = 1.0;
  const auto inst_path = out / "machine.json";
  {
    std::ofstream f(inst_path);
    f << to_json(m).dump(2) << '\n';
  }

  ExperimentConfig c;
  c.name = "file-run";
  c.algorithm = AlgorithmKind::orlc;
  c.env.kind = EnvKind::file;
  c.env.path = inst_path.string();
  c.episodes = 300;
  c.seeds = {1};
  c.out_dir = out.string();
  c.save_instance = false;

  const auto clean = run_experiment(c);
  CHECK_FALSE(clean.any_violation());
  CHECK(clean.seeds[0].instance_path.empty());

  c.name = "file-run-zeroed";
  c.zero_certificates = true;
  const auto broken = run_experiment(c);
  CHECK(broken.any_violation());
  // Every episode trips at least one check (some trip both).
  CHECK(broken.seeds[0].report.gap_violations + broken.seeds[0].report.interval_violations >= 300);
  CHECK(broken.seeds[0].recorded_lines == 300); // violations are always recorded

  // Contextual instances dispatch on their kind field the same way.
  const auto ctx_path = out / "ctx.json";
  {
    std::ofstream f(ctx_path);
    f << to_json(gen_contextual_bandit(3, 8, 2)).dump(2) << '\n';
  }
  ExperimentConfig cc;
  cc.name = "file-ctx";
  cc.algorithm = AlgorithmKind::orlc_si;
  cc.env.kind = EnvKind::file;
  cc.env.path = ctx_path.string();
  cc.episodes = 50;
  cc.seeds = {1};
  cc.out_dir = out.string();
  const auto ctx_run = run_experiment(cc);
  CHECK(ctx_run.seeds[0].report.episodes == 50);
  CHECK_FALSE(ctx_run.any_violation());

  // Missing and non-instance files fail with the right error types.
  c.env.path = (out / "nope.json").string();
  CHECK_THROWS_AS(run_experiment(c), io_error);
  c.env.path = clean.seeds[0].report_path; // a report is not an instance
  CHECK_THROWS_AS(run_experiment(c), config_error);
}

TEST_CASE("csv export emits a fixed header and full-precision values") {
  RunRecord r1;
  r1.episode = 1;
  r1.interval_low = 0.0;
  r1.interval_high = 2.0;
  r1.width = 2.0;
  r1.policy_value = 1.1;
  r1.optimal_value = 1.1;
  r1.gap = 0.0;
  r1.realized_reward = 1.0;
  RunRecord r2;
  r2.episode = 2;
  r2.interval_low = 0.25;
  r2.interval_high = 0.5;
  r2.width = 0.25;
  r2.policy_value = 0.125;
  r2.optimal_value = 0.5;
  r2.gap = 0.375;
  r2.realized_reward = 0.0;
  r2.context_segment = 1;
  r2.gap_violation = true;

  std::stringstream in;
  in << to_json(r1).dump() << '\n' << to_json(r2).dump() << '\n';
  std::ostringstream out;
  export_records_csv(in, out);
  CHECK(out.str() ==
        "episode,low,high,width,policyValue,optimalValue,gap,realizedReward,"
        "contextSegment,gapViolation,intervalViolation\n"
        "1,0.0,2.0,2.0,1.1,1.1,0.0,1.0,-1,false,false\n"
        "2,0.25,0.5,0.25,0.125,0.5,0.375,0.0,1,true,false\n");

  std::stringstream bad("not json\n");
  std::ostringstream sink;
  CHECK_THROWS_AS(export_records_csv(bad, sink), config_error);
}

TEST_CASE("summaries combine per-seed reports") {
  auto make_report = [](std::uint64_t seed, double regret, double cumwidth, std::int64_t gv) {
    ojson audit;
    audit["episodes"] = 100;
    audit["gapViolations"] = gv;
    audit["intervalViolations"] = 0;
    audit["cumulativeWidth"] = cumwidth;
    audit["regret"] = regret;
    audit["mistakes"] = ojson::array();
    audit["correlationDefined"] = false;
    audit["correlation"] = 0.0;
    audit["pac"] = ojson::array();
    ojson r;
    r["schemaVersion"] = kSchemaVersion;
    r["kind"] = "report";
    r["name"] = "x";
    r["seed"] = seed;
    r["audit"] = std::move(audit);
    return r;
  };

  const auto summary =
      summarize_reports({make_report(1, 10.0, 200.0, 0), make_report(2, 14.0, 100.0, 2)});
  CHECK(summary.at("kind") == "summary");
  CHECK(summary.at("runs") == 2);
  CHECK(summary.at("totalViolations") == 2);
  CHECK(summary.at("meanRegret") == 12.0);
  CHECK(summary.at("meanCumulativeWidth") == 150.0);
  REQUIRE(summary.at("rows").size() == 2);
  CHECK(summary.at("rows")[1].at("seed") == 2);

  CHECK_THROWS_AS(summarize_reports({}), config_error);
  auto not_report = make_report(1, 0.0, 0.0, 0);
  not_report["kind"] = "summary";
  CHECK_THROWS_AS(summarize_reports({not_report}), config_error);
}
