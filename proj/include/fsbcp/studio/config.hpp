#pragma once

// Study configuration: a plain key=value format whose keys mirror the
// StudyConfig fields. Command-line flags of the same names override file
// values; snapshot() writes the fully resolved configuration back out.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fsbcp/dgp.hpp"
#include "fsbcp/errors.hpp"
#include "fsbcp/resample.hpp"

namespace fsbcp::studio {

enum class StudyKind { size, power, single_test };

[[nodiscard]] inline std::string_view to_string(StudyKind k) {
  switch (k) {
    case StudyKind::size: return "size";
    case StudyKind::power: return "power";
    case StudyKind::single_test: return "single-test";
  }
  return "unknown";
}

/// One data-generating process of a study, e.g. "far1-bridge:0.245".
/// Without an explicit ":C" the study-wide C applies.
struct DgpEntry {
  DgpVariant variant = DgpVariant::far1_bridge;
  std::optional<double> C;

  [[nodiscard]] std::string label() const;
};

struct StudyConfig {
  StudyKind kind = StudyKind::size;
  std::vector<DgpEntry> dgps{DgpEntry{}};
  double C = 0.245;
  std::vector<Method> methods{Method::fsb, Method::nbb, Method::asymptotic};
  std::size_t n = 100;
  std::size_t G = 101;
  std::size_t burn_in = 100;
  std::size_t R = 500;
  std::size_t B = 500;
  std::vector<double> alphas{0.01, 0.05, 0.10};
  std::vector<double> jumps{0.0, 0.15, 0.3};
  std::size_t k_star = 0;  ///< 0 means n/2
  double r = 0.0;
  std::uint64_t seed = 20240101;
  std::size_t workers = 0;
  std::string out = "out";
  // Method tuning; 0 means data-driven.
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t p_max = 0;
  double threshold = 0.85;
  std::size_t block_len = 0;
  std::size_t d = 0;
  std::size_t bandwidth = 0;
  std::size_t M = 5000;

  [[nodiscard]] std::size_t change_point() const noexcept { return k_star == 0 ? n / 2 : k_star; }

  [[nodiscard]] DgpSpec dgp_spec(const DgpEntry& entry) const {
    DgpSpec spec;
    spec.variant = entry.variant;
    spec.C = entry.C.value_or(C);
    spec.n = n;
    spec.grid = make_grid(G);
    spec.burn_in = burn_in;
    return spec;
  }

  [[nodiscard]] FsbTuning fsb_tuning() const {
    FsbTuning t;
    if (m) t.m = m;
    if (p) t.p = p;
    if (p_max) t.p_max = p_max;
    t.threshold = threshold;
    return t;
  }

  [[nodiscard]] AsymptoticTuning asymptotic_tuning() const {
    AsymptoticTuning t;
    if (d) t.d = d;
    if (bandwidth) t.bandwidth = bandwidth;
    t.M = M;
    t.threshold = threshold;
    return t;
  }

  [[nodiscard]] std::optional<std::size_t> block_length() const {
    return block_len ? std::optional<std::size_t>(block_len) : std::nullopt;
  }

  /// Switches to R = 2000 replications with B = 1000 bootstrap samples.
  void paper_scale() {
    R = 2000;
    B = 1000;
  }

  void validate() const;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InputError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  return value;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += format(items[i]);
  }
  return out;
}

}  // namespace detail

inline std::string DgpEntry::label() const {
  if (variant == DgpVariant::fma1 || !C) return std::string(to_string(variant));
  return std::string(to_string(variant)) + ":" + detail::format_double(*C);
}

[[nodiscard]] inline DgpEntry parse_dgp_entry(std::string_view text) {
  DgpEntry e;
  const std::size_t colon = text.find(':');
  e.variant = parse_dgp_variant(text.substr(0, colon));
  if (colon != std::string_view::npos) e.C = detail::parse_number<double>("dgp", text.substr(colon + 1));
  return e;
}

/// Every key accepted by set() and written by snapshot().
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "kind", "dgp", "C", "methods", "n", "G", "burn_in", "R", "B", "alphas", "jumps", "k_star", "r", "seed",
      "workers", "out", "m", "p", "p_max", "threshold", "block_len", "d", "bandwidth", "M"};
  return keys;
}

/// Applies one key=value setting. Unknown keys and malformed values are
/// InputErrors.
inline void set(StudyConfig& cfg, std::string_view key, std::string_view value) {
  using detail::parse_number;
  auto size = [&] { return parse_number<std::size_t>(key, value); };
  if (key == "kind") {
    if (value == "size") cfg.kind = StudyKind::size;
    else if (value == "power") cfg.kind = StudyKind::power;
    else if (value == "single-test") cfg.kind = StudyKind::single_test;
    else throw InputError("invalid study kind '" + std::string(value) + "'");
  } else if (key == "dgp") {
    cfg.dgps.clear();
    try {
      for (auto item : detail::split_list(value)) cfg.dgps.push_back(parse_dgp_entry(item));
    } catch (const InvalidArgument& e) {
      throw InputError(e.what());
    }
  } else if (key == "C") {
    cfg.C = parse_number<double>(key, value);
  } else if (key == "methods") {
    cfg.methods.clear();
    try {
      for (auto item : detail::split_list(value)) cfg.methods.push_back(parse_method(item));
    } catch (const InvalidArgument& e) {
      throw InputError(e.what());
    }
  } else if (key == "n") cfg.n = size();
  else if (key == "G") cfg.G = size();
  else if (key == "burn_in") cfg.burn_in = size();
  else if (key == "R") cfg.R = size();
  else if (key == "B") cfg.B = size();
  else if (key == "alphas" || key == "jumps") {
    std::vector<double> list;
    for (auto item : detail::split_list(value)) list.push_back(parse_number<double>(key, item));
    (key == "alphas" ? cfg.alphas : cfg.jumps) = std::move(list);
  } else if (key == "k_star") cfg.k_star = size();
  else if (key == "r") cfg.r = parse_number<double>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "workers") cfg.workers = size();
  else if (key == "out") cfg.out = std::string(value);
  else if (key == "m") cfg.m = size();
  else if (key == "p") cfg.p = size();
  else if (key == "p_max") cfg.p_max = size();
  else if (key == "threshold") cfg.threshold = parse_number<double>(key, value);
  else if (key == "block_len") cfg.block_len = size();
  else if (key == "d") cfg.d = size();
  else if (key == "bandwidth") cfg.bandwidth = size();
  else if (key == "M") cfg.M = size();
  else throw InputError("unknown configuration key '" + std::string(key) + "'");
}

/// Reads key=value lines; blank lines and lines starting with '#' are skipped.
inline void load(StudyConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    while (!view.empty() && (view.back() == ' ' || view.back() == '\r' || view.back() == '\t')) view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const std::size_t eq = view.find('=');
    if (eq == std::string_view::npos) throw InputError("expected key=value", line_no, 1);
    std::string_view key = view.substr(0, eq);
    std::string_view value = view.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    try {
      set(cfg, key, value);
    } catch (const InputError& e) {
      throw InputError(e.what(), line_no, eq + 2);
    }
  }
}

inline void load_file(StudyConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file", path);
  load(cfg, in);
}

/// Fully resolved configuration in a form load() reads back unchanged.
inline void snapshot(std::ostream& out, const StudyConfig& cfg) {
  using detail::format_double;
  using detail::join;
  out << "kind=" << to_string(cfg.kind) << '\n'
      << "dgp=" << join(cfg.dgps, [](const DgpEntry& e) { return e.label(); }) << '\n'
      << "C=" << format_double(cfg.C) << '\n'
      << "methods=" << join(cfg.methods, [](Method m) { return std::string(to_string(m)); }) << '\n'
      << "n=" << cfg.n << '\n'
      << "G=" << cfg.G << '\n'
      << "burn_in=" << cfg.burn_in << '\n'
      << "R=" << cfg.R << '\n'
      << "B=" << cfg.B << '\n'
      << "alphas=" << join(cfg.alphas, format_double) << '\n'
      << "jumps=" << join(cfg.jumps, format_double) << '\n'
      << "k_star=" << cfg.change_point() << '\n'
      << "r=" << format_double(cfg.r) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "workers=" << cfg.workers << '\n'
      << "out=" << cfg.out << '\n'
      << "m=" << cfg.m << '\n'
      << "p=" << cfg.p << '\n'
      << "p_max=" << cfg.p_max << '\n'
      << "threshold=" << format_double(cfg.threshold) << '\n'
      << "block_len=" << cfg.block_len << '\n'
      << "d=" << cfg.d << '\n'
      << "bandwidth=" << cfg.bandwidth << '\n'
      << "M=" << cfg.M << '\n';
}

inline void StudyConfig::validate() const {
  if (R < 1) throw InputError("R must be at least 1");
  if (B < 100) throw InputError("B must be at least 100");
  if (n < 4) throw InputError("n must be at least 4");
  if (G < 3) throw InputError("G must be at least 3");
  if (dgps.empty()) throw InputError("at least one DGP is required");
  if (methods.empty()) throw InputError("at least one method is required");
  if (alphas.empty()) throw InputError("at least one alpha is required");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw InputError("alphas must lie in (0, 1)");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw InputError("alphas must be strictly increasing");
  }
  if (kind == StudyKind::power && jumps.empty()) throw InputError("power study needs a jump list");
  if (change_point() < 1 || change_point() >= n) throw InputError("k_star must lie in [1, n-1]");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0, 1)");
  if (M < 1000) throw InputError("M must be at least 1000");
}

}  // namespace fsbcp::studio
