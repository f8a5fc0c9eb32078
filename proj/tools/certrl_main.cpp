// Command-line front end.
//
// Exit codes: 0 success, 1 at least one certificate audit violation,
// 2 configuration/usage error, 3 I/O error.

#include <CLI11.hpp>

#include <certrl/certrl.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using certrl::ojson;

namespace {

ojson load_json_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw certrl::io_error("cannot open '" + path + "'");
  ojson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw certrl::config_error("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

void print_seed_row(const certrl::SeedRunResult& s) {
  const auto& r = s.report;
  std::cout << "  seed " << std::setw(6) << std::left << s.seed << " episodes " << std::setw(9)
            << r.episodes << " violations " << std::setw(4)
            << (r.gap_violations + r.interval_violations) << " regret " << std::setw(12)
            << std::setprecision(6) << r.cumulative_gap << " cumWidth " << std::setw(12)
            << r.cumulative_width << " corr ";
  if (r.correlation_defined)
    std::cout << std::setprecision(4) << r.correlation;
  else
    std::cout << "n/a";
  std::cout << '\n';
}

struct RunOptions {
  std::string preset_name;
  std::string config_path;
  std::optional<std::int64_t> episodes;
  std::vector<std::uint64_t> seeds;
  std::optional<double> delta;
  std::optional<std::int64_t> stride;
  std::string out_dir;
  std::optional<int> jobs;
  std::string name;
  std::string bonus;
  std::string variant;
  std::string planner;
  std::optional<double> lambda;
  std::optional<bool> save_instance;
  bool zero_certificates = false;
};

int do_run(const RunOptions& opt) {
  certrl::ExperimentConfig cfg;
  if (!opt.preset_name.empty() && !opt.config_path.empty())
    throw certrl::config_error("give either --preset or --config, not both");
  if (!opt.preset_name.empty())
    cfg = certrl::preset(opt.preset_name);
  else if (!opt.config_path.empty())
    cfg = certrl::config_from_json(load_json_or_throw(opt.config_path));
  else
    throw certrl::config_error("one of --preset or --config is required");

  if (opt.episodes) cfg.episodes = *opt.episodes;
  if (!opt.seeds.empty()) cfg.seeds = opt.seeds;
  if (opt.delta) cfg.delta = *opt.delta;
  if (opt.stride) cfg.stride = *opt.stride;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.jobs) cfg.jobs = *opt.jobs;
  if (!opt.name.empty()) cfg.name = opt.name;
  if (!opt.bonus.empty()) cfg.bonus = certrl::bonus_from_string(opt.bonus);
  if (!opt.variant.empty()) cfg.variant = certrl::variant_from_string(opt.variant);
  if (!opt.planner.empty()) cfg.planner = certrl::planner_from_string(opt.planner);
  if (opt.lambda) cfg.lambda = *opt.lambda;
  if (opt.save_instance) cfg.save_instance = *opt.save_instance;
  if (opt.zero_certificates) cfg.zero_certificates = true;

  auto viol = certrl::validate_config(cfg);
  if (!viol.empty()) throw certrl::config_error("invalid config: " + viol.front());

  const auto result = certrl::run_experiment(cfg);
  std::cout << cfg.name << " (" << certrl::to_string(cfg.algorithm) << ", "
            << certrl::to_string(cfg.env.kind) << ")\n";
  for (const auto& s : result.seeds) print_seed_row(s);
  const fs::path dir = fs::path(certrl::resolve_out_dir(cfg)) / cfg.name;
  std::cout << "wrote " << result.seeds.size() << " seed run(s) to " << dir.string() << '\n';
  if (result.any_violation()) {
    std::cerr << "certificate audit FAILED: at least one violation recorded\n";
    return 1;
  }
  return 0;
}

int do_summarize(std::vector<std::string> paths, const std::string& dir,
                 const std::string& out_path) {
  if (!dir.empty()) {
    if (!fs::is_directory(dir)) throw certrl::io_error("'" + dir + "' is not a directory");
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().string().ends_with(".report.json"))
        paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw certrl::config_error("no report files given");
  std::vector<ojson> reports;
  reports.reserve(paths.size());
  for (const auto& p : paths) reports.push_back(load_json_or_throw(p));
  const ojson summary = certrl::summarize_reports(reports);

  std::cout << std::left << std::setw(24) << "name" << std::setw(8) << "seed" << std::setw(10)
            << "episodes" << std::setw(11) << "violations" << std::setw(14) << "regret"
            << std::setw(14) << "cumWidth" << "corr\n";
  for (const auto& row : summary.at("rows")) {
    const std::int64_t v = row.at("gapViolations").get<std::int64_t>() +
                           row.at("intervalViolations").get<std::int64_t>();
    std::cout << std::left << std::setw(24) << row.at("name").get<std::string>() << std::setw(8)
              << row.at("seed").get<std::uint64_t>() << std::setw(10)
              << row.at("episodes").get<std::int64_t>() << std::setw(11) << v << std::setw(14)
              << std::setprecision(6) << row.at("regret").get<double>() << std::setw(14)
              << row.at("cumulativeWidth").get<double>() << std::setprecision(4)
              << row.at("correlation").get<double>() << '\n';
  }
  std::cout << "runs " << summary.at("runs") << ", total violations "
            << summary.at("totalViolations") << ", mean regret " << std::setprecision(6)
            << summary.at("meanRegret").get<double>() << '\n';

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw certrl::io_error("cannot write '" + out_path + "'");
    out << summary.dump(2) << '\n';
    if (!out) throw certrl::io_error("failed writing '" + out_path + "'");
  }
  return 0;
}

int do_export_csv(const std::string& records_path, const std::string& out_path) {
  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw certrl::io_error("cannot open '" + records_path + "'");
  if (out_path.empty()) {
    certrl::export_records_csv(in, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw certrl::io_error("cannot write '" + out_path + "'");
    certrl::export_records_csv(in, out);
    if (!out) throw certrl::io_error("failed writing '" + out_path + "'");
  }
  return 0;
}

int do_validate(const std::string& config_path) {
  const auto cfg = certrl::config_from_json(load_json_or_throw(config_path));
  std::cout << certrl::to_json(cfg).dump(2) << '\n';
  std::cerr << "config ok\n";
  return 0;
}

int do_list_presets() {
  for (const auto& [name, desc] : certrl::list_presets())
    std::cout << std::left << std::setw(26) << name << desc << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"episodic RL with per-episode policy certificates"};
  app.require_subcommand(1);

  std::function<int()> action;

  auto* run = app.add_subcommand("run", "run an experiment and audit its certificates");
  auto run_opt = std::make_shared<RunOptions>();
  run->add_option("--preset", run_opt->preset_name, "preset name (see list-presets)");
  run->add_option("--config", run_opt->config_path, "experiment config JSON file");
  run->add_option("--episodes", run_opt->episodes, "override episode count");
  run->add_option("--seed", run_opt->seeds, "override seeds (repeatable)");
  run->add_option("--delta", run_opt->delta, "override confidence level delta");
  run->add_option("--stride", run_opt->stride, "override record stride");
  run->add_option("--out-dir", run_opt->out_dir, "output directory (default $CERTRL_OUT_DIR or ./runs)");
  run->add_option("--jobs", run_opt->jobs, "run seeds in parallel");
  run->add_option("--name", run_opt->name, "override run name");
  run->add_option("--bonus", run_opt->bonus, "orlc bonus kind: simple|refined");
  run->add_option("--confidence-variant", run_opt->variant, "orlc confidence variant: tight|coarse");
  run->add_option("--planner", run_opt->planner, "orlcSi planner: holder|massConstrained");
  run->add_option("--lambda", run_opt->lambda, "orlcSi ridge regularizer");
  run->add_flag("--save-instance,!--no-save-instance", run_opt->save_instance,
                "write the generated instance next to the records");
  run->add_flag("--zero-certificates", run_opt->zero_certificates,
                "fault injection: report empty certificates (audit must flag this)");
  run->callback([&action, run_opt] { action = [run_opt] { return do_run(*run_opt); }; });

  auto* summ = app.add_subcommand("summarize", "combine report files into one summary");
  auto summ_paths = std::make_shared<std::vector<std::string>>();
  auto summ_dir = std::make_shared<std::string>();
  auto summ_out = std::make_shared<std::string>();
  summ->add_option("reports", *summ_paths, "report JSON files");
  summ->add_option("--dir", *summ_dir, "directory to scan for *.report.json");
  summ->add_option("--out", *summ_out, "also write the summary JSON here");
  summ->callback([&action, summ_paths, summ_dir, summ_out] {
    action = [=] { return do_summarize(*summ_paths, *summ_dir, *summ_out); };
  });

  auto* csv = app.add_subcommand("export-csv", "convert a records JSONL file to CSV");
  auto csv_in = std::make_shared<std::string>();
  auto csv_out = std::make_shared<std::string>();
  csv->add_option("records", *csv_in, "records JSONL file")->required();
  csv->add_option("--out", *csv_out, "output CSV path (default stdout)");
  csv->callback(
      [&action, csv_in, csv_out] { action = [=] { return do_export_csv(*csv_in, *csv_out); }; });

  auto* val = app.add_subcommand("validate-config", "check a config file and print it normalized");
  auto val_path = std::make_shared<std::string>();
  val->add_option("config", *val_path, "experiment config JSON file")->required();
  val->callback([&action, val_path] { action = [=] { return do_validate(*val_path); }; });

  auto* lp = app.add_subcommand("list-presets", "list built-in experiment presets");
  lp->callback([&action] { action = [] { return do_list_presets(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const certrl::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const certrl::io_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
