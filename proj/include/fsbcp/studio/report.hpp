#pragma once

// Report files: table.csv, config.snapshot, power_curve.svg for studies;
// outcome.json, replicates.csv, cusum_profile.csv/.svg for single tests.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fsbcp/cusum.hpp"
#include "fsbcp/errors.hpp"
#include "fsbcp/outcome_io.hpp"
#include "fsbcp/studio/config.hpp"
#include "fsbcp/studio/study.hpp"
#include "fsbcp/studio/svg.hpp"

namespace fsbcp::studio {

inline constexpr const char* kTableHeader = "dgp,method,alpha,jump,frequency,mc_se,excluded,m_median,p_median";

inline void write_table_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  using detail::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << kTableHeader << '\n';
  for (const auto& r : rows) {
    out << r.dgp << ',' << to_string(r.method) << ',' << format_double(r.alpha) << ',' << format_double(r.jump) << ','
        << format_double(r.frequency) << ',' << format_double(r.mc_se) << ',' << r.excluded << ',' << opt(r.m_median)
        << ',' << opt(r.p_median) << '\n';
  }
}

/// Parses a table written by write_table_csv. effective is not stored and
/// stays zero.
[[nodiscard]] inline std::vector<StudyRow> read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTableHeader) throw InputError("unexpected table header", 1);
  std::vector<StudyRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_list(line);
    if (fields.size() != 9) throw InputError("expected 9 fields", line_no);
    StudyRow row;
    try {
      row.dgp = std::string(fields[0]);
      row.method = parse_method(fields[1]);
      row.alpha = detail::parse_number<double>("alpha", fields[2]);
      row.jump = detail::parse_number<double>("jump", fields[3]);
      row.frequency = detail::parse_number<double>("frequency", fields[4]);
      row.mc_se = detail::parse_number<double>("mc_se", fields[5]);
      row.excluded = detail::parse_number<std::size_t>("excluded", fields[6]);
      if (fields[7] != "NA") row.m_median = detail::parse_number<double>("m_median", fields[7]);
      if (fields[8] != "NA") row.p_median = detail::parse_number<double>("p_median", fields[8]);
    } catch (const Error& e) {
      throw InputError(e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Rejection frequency against jump size, one curve per (dgp, method) at
/// the given level.
[[nodiscard]] inline std::string power_curve_svg(const std::vector<StudyRow>& rows, double alpha) {
  PlotSpec plot;
  plot.title = "Size-corrected power, alpha = " + detail::format_double(alpha);
  plot.x_label = "jump size";
  plot.y_label = "rejection frequency";
  plot.y_min = 0.0;
  plot.y_max = 1.0;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    if (r.alpha != alpha) continue;
    const std::string name = r.dgp + " " + std::string(to_string(r.method));
    auto [it, inserted] = index.try_emplace(name, plot.series.size());
    if (inserted) plot.series.push_back(PlotSeries{name, {}, {}});
    plot.series[it->second].x.push_back(r.jump);
    plot.series[it->second].y.push_back(r.frequency);
  }
  return line_plot_svg(plot);
}

[[nodiscard]] inline std::string cusum_profile_svg(const CusumResult& cusum) {
  PlotSeries s{"CUSUM", {}, {}};
  for (std::size_t k = 0; k < cusum.profile.size(); ++k) {
    s.x.push_back(static_cast<double>(k + 1));
    s.y.push_back(cusum.profile[k]);
  }
  PlotSpec plot;
  plot.title = "CUSUM profile (max at k = " + std::to_string(cusum.argmax_k) + ")";
  plot.x_label = "k";
  plot.y_label = "norm of centered partial sum / sqrt(n)";
  plot.y_min = 0.0;
  plot.series.push_back(std::move(s));
  return line_plot_svg(plot);
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << text;
  if (!out) throw IoError("write failed", path.string());
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory", dir.string());
}

}  // namespace detail

/// Writes table.csv and config.snapshot, plus power_curve.svg for power
/// studies. Returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const StudyResult& result, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  std::vector<std::filesystem::path> written;

  std::ostringstream table;
  write_table_csv(table, result.rows);
  detail::write_text(dir / "table.csv", table.str());
  written.push_back(dir / "table.csv");

  std::ostringstream snap;
  snapshot(snap, result.config);
  detail::write_text(dir / "config.snapshot", snap.str());
  written.push_back(dir / "config.snapshot");

  if (result.config.kind == StudyKind::power && !result.rows.empty()) {
    const double alpha = result.config.alphas.size() > 1 ? result.config.alphas[1] : result.config.alphas.front();
    detail::write_text(dir / "power_curve.svg", power_curve_svg(result.rows, alpha));
    written.push_back(dir / "power_curve.svg");
  }
  return written;
}

inline void write_profile_csv(std::ostream& out, const CusumResult& cusum) {
  out << "k,value\n";
  for (std::size_t k = 0; k < cusum.profile.size(); ++k)
    out << (k + 1) << ',' << detail::format_double(cusum.profile[k]) << '\n';
}

/// Single-test artifacts: outcome.json, replicates.csv, cusum_profile.csv
/// and cusum_profile.svg.
inline std::vector<std::filesystem::path> emit_test_report(const TestOutcome& outcome, const CusumResult& cusum,
                                                           const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  std::vector<std::filesystem::path> written;
  detail::write_text(dir / "outcome.json", outcome_record(outcome).dump(2) + "\n");
  written.push_back(dir / "outcome.json");
  std::ostringstream reps;
  write_replicates_csv(reps, outcome);
  detail::write_text(dir / "replicates.csv", reps.str());
  written.push_back(dir / "replicates.csv");
  std::ostringstream profile;
  write_profile_csv(profile, cusum);
  detail::write_text(dir / "cusum_profile.csv", profile.str());
  written.push_back(dir / "cusum_profile.csv");
  detail::write_text(dir / "cusum_profile.svg", cusum_profile_svg(cusum));
  written.push_back(dir / "cusum_profile.svg");
  return written;
}

}  // namespace fsbcp::studio
