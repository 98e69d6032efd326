#pragma once

// Curve CSV format: one row per curve, G comma-separated values, optional
// header row "t0,...,t{G-1}". An optional companion file holds the grid as a
// single row of abscissae; otherwise the grid is equidistant.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"

namespace fsbcp {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view field) {
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

inline bool is_header(const std::vector<std::string_view>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i] != "t" + std::to_string(i)) return false;
  return true;
}

/// Rows of numbers; the first non-empty row may be a t0..t{G-1} header.
inline std::vector<std::vector<double>> read_numeric_rows(std::istream& in, bool allow_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (first && allow_header && is_header(fields)) {
      width = fields.size();
      first = false;
      continue;
    }
    first = false;
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw InputError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                       line_no, std::min(fields.size(), width) + 1);
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto value = parse_double(fields[c]);
      if (!value) throw InputError("not a number: '" + std::string(fields[c]) + "'", line_no, c + 1);
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

[[nodiscard]] inline Grid read_grid_csv(std::istream& in) {
  const auto rows = detail::read_numeric_rows(in, false);
  if (rows.size() != 1) throw InputError("grid file must contain exactly one row");
  try {
    return Grid::from_points(rows.front());
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("invalid grid: ") + e.what(), 1);
  }
}

[[nodiscard]] inline FunctionSeries read_series_csv(std::istream& in, std::optional<Grid> grid = std::nullopt) {
  const auto rows = detail::read_numeric_rows(in, true);
  if (rows.empty()) throw InputError("no curves found");
  const std::size_t g = rows.front().size();
  if (grid && grid->size() != g)
    throw InputError("curves have " + std::to_string(g) + " values but the grid has " +
                     std::to_string(grid->size()) + " points");
  if (!grid) {
    if (g < 3) throw InputError("curves need at least 3 grid values");
    grid = make_grid(g);
  }
  RowMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < g; ++i) values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];
  try {
    return FunctionSeries(*grid, std::move(values));
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
}

[[nodiscard]] inline FunctionSeries read_series_file(const std::string& path,
                                                     const std::optional<std::string>& grid_path = std::nullopt) {
  std::optional<Grid> grid;
  if (grid_path) {
    std::ifstream gin(*grid_path);
    if (!gin) throw IoError("cannot open grid file", *grid_path);
    grid = read_grid_csv(gin);
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file", path);
  return read_series_csv(in, grid);
}

/// Writes with a t0..t{G-1} header and 17 significant digits.
inline void write_series_csv(std::ostream& out, const FunctionSeries& series) {
  const auto g = static_cast<Eigen::Index>(series.grid_size());
  for (Eigen::Index i = 0; i < g; ++i) out << (i ? "," : "") << 't' << i;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index t = 0; t < series.values.rows(); ++t) {
    for (Eigen::Index i = 0; i < g; ++i) out << (i ? "," : "") << series.values(t, i);
    out << '\n';
  }
}

inline void write_series_file(const std::string& path, const FunctionSeries& series) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path);
  write_series_csv(out, series);
  if (!out) throw IoError("write failed", path);
}

}  // namespace fsbcp
