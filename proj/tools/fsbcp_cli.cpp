// fsbcp: change-point tests for functional time series with sieve-bootstrap
// critical values, plus the Monte Carlo study driver.
//
//   fsbcp simulate     --dgp far1-bridge:0.245 --n 100 --seed 7 --out data.csv
//   fsbcp test         --data data.csv --method fsb --alpha 0.05 --out result/
//   fsbcp size-study   --config study.cfg --out size/
//   fsbcp power-study  --config study.cfg --jumps 0,0.15,0.3 --out power/
//   fsbcp report       --table size/table.csv
//
// Exit codes: 0 success, 2 input error, 3 fit failure, 4 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "fsbcp/fsbcp.hpp"
#include "fsbcp/studio/config.hpp"
#include "fsbcp/studio/report.hpp"
#include "fsbcp/studio/study.hpp"

namespace {

using fsbcp::studio::StudyConfig;

/// Flags shared by every subcommand that builds a StudyConfig: --config, one
/// flag per configuration key, and --paper-scale.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool paper_scale = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value configuration file");
    app->add_flag("--paper-scale", paper_scale, "use R=2000 replications and B=1000 bootstrap samples");
    for (const auto& key : fsbcp::studio::config_keys())
      app->add_option("--" + key, values[key], "override configuration key '" + key + "'");
  }

  [[nodiscard]] bool given(const std::string& key) const {
    auto it = values.find(key);
    return it != values.end() && !it->second.empty();
  }

  /// Defaults, then the file, then --paper-scale, then explicit flags.
  [[nodiscard]] StudyConfig resolve(StudyConfig cfg) const {
    if (!config_path.empty()) fsbcp::studio::load_file(cfg, config_path);
    if (paper_scale) cfg.paper_scale();
    for (const auto& [key, value] : values)
      if (!value.empty()) fsbcp::studio::set(cfg, key, value);
    return cfg;
  }
};

void print_table(const std::vector<fsbcp::studio::StudyRow>& rows) {
  std::cout << std::left << std::setw(22) << "dgp" << std::setw(12) << "method" << std::setw(8) << "alpha"
            << std::setw(8) << "jump" << std::setw(11) << "frequency" << std::setw(9) << "mc_se" << "excluded\n";
  for (const auto& r : rows) {
    char freq[32], se[32];
    std::snprintf(freq, sizeof freq, "%.3f", r.frequency);
    std::snprintf(se, sizeof se, "%.4f", r.mc_se);
    std::cout << std::left << std::setw(22) << r.dgp << std::setw(12) << fsbcp::to_string(r.method) << std::setw(8)
              << r.alpha << std::setw(8) << r.jump << std::setw(11) << freq << std::setw(9) << se << r.excluded
              << '\n';
  }
}

int run_study(const StudyConfig& cfg) {
  const auto result = cfg.kind == fsbcp::studio::StudyKind::power ? fsbcp::studio::run_power_study(cfg)
                                                                  : fsbcp::studio::run_size_study(cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  fsbcp::studio::emit_report(result, cfg.out);
  print_table(result.rows);
  std::cerr << "wrote " << cfg.out << "/table.csv in " << std::fixed << std::setprecision(1) << result.wall_seconds
            << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point detection in functional time series with sieve-bootstrap critical values"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "write a simulated series as curve CSV");
  ConfigFlags sim_flags;
  sim_flags.attach(simulate);
  double sim_jump = 0.0;
  simulate->add_option("--jump", sim_jump, "constant mean change after k_star (scaled by n^-r)");

  // test
  auto* test = app.add_subcommand("test", "apply one test to curve CSV data");
  ConfigFlags test_flags;
  test_flags.attach(test);
  std::string data_path, grid_path, method_name = "fsb";
  double alpha = 0.05;
  test->add_option("--data", data_path, "curve CSV, one row per curve")->required();
  test->add_option("--grid", grid_path, "single-row CSV of grid abscissae");
  test->add_option("--method", method_name, "fsb, nbb or asymptotic");
  test->add_option("--alpha", alpha, "nominal level");

  auto* size = app.add_subcommand("size-study", "empirical size under the null");
  ConfigFlags size_flags;
  size_flags.attach(size);

  auto* power = app.add_subcommand("power-study", "size-corrected power under mean changes");
  ConfigFlags power_flags;
  power_flags.attach(power);

  auto* report = app.add_subcommand("report", "summarize a table.csv and redraw its power curve");
  std::string table_path, report_out;
  double report_alpha = 0.05;
  report->add_option("--table", table_path, "table.csv written by a study")->required();
  report->add_option("--out", report_out, "directory for power_curve.svg");
  report->add_option("--alpha", report_alpha, "level shown in the power curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      StudyConfig cfg = sim_flags.resolve(StudyConfig{});
      if (!sim_flags.given("out")) cfg.out = "-";
      fsbcp::DgpSpec spec = cfg.dgp_spec(cfg.dgps.front());
      if (sim_jump != 0.0) spec.change = fsbcp::ChangeSpec{cfg.change_point(), sim_jump, cfg.r};
      fsbcp::RngStream rng = fsbcp::RngStream(cfg.seed).child("simulate");
      const fsbcp::FunctionSeries series = fsbcp::simulate(spec, rng);
      if (cfg.out == "-") {
        fsbcp::write_series_csv(std::cout, series);
      } else {
        fsbcp::write_series_file(cfg.out, series);
      }
      return 0;
    }

    if (test->parsed()) {
      StudyConfig cfg = test_flags.resolve(StudyConfig{});
      cfg.kind = fsbcp::studio::StudyKind::single_test;
      cfg.methods = {fsbcp::parse_method(method_name)};
      cfg.alphas = {alpha};
      const fsbcp::FunctionSeries series =
          fsbcp::read_series_file(data_path, grid_path.empty() ? std::nullopt : std::optional<std::string>(grid_path));
      const fsbcp::TestOutcome outcome = fsbcp::studio::run_single_test(cfg, series);
      for (const auto& d : outcome.diagnostics) std::cerr << "note: " << d << '\n';
      std::cout << fsbcp::outcome_record(outcome).dump(2) << '\n';
      if (test_flags.given("out")) fsbcp::studio::emit_test_report(outcome, fsbcp::cusum(series), cfg.out);
      return 0;
    }

    if (size->parsed()) {
      StudyConfig cfg = size_flags.resolve(StudyConfig{});
      cfg.kind = fsbcp::studio::StudyKind::size;
      return run_study(cfg);
    }

    if (power->parsed()) {
      StudyConfig base;
      base.kind = fsbcp::studio::StudyKind::power;
      base.n = 200;
      base.k_star = 100;
      StudyConfig cfg = power_flags.resolve(base);
      cfg.kind = fsbcp::studio::StudyKind::power;
      return run_study(cfg);
    }

    if (report->parsed()) {
      std::ifstream in(table_path);
      if (!in) throw fsbcp::IoError("cannot open table", table_path);
      const auto rows = fsbcp::studio::read_table_csv(in);
      print_table(rows);
      if (!report_out.empty()) {
        std::filesystem::create_directories(report_out);
        const auto path = std::filesystem::path(report_out) / "power_curve.svg";
        std::ofstream out(path);
        if (!out) throw fsbcp::IoError("cannot open for writing", path.string());
        out << fsbcp::studio::power_curve_svg(rows, report_alpha);
      }
      return 0;
    }
  } catch (const fsbcp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fsbcp::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
