#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "fsbcp/errors.hpp"
#include "fsbcp/resample.hpp"

namespace fsbcp {

/// Flat key-value record of a test outcome. Non-finite critical values are
/// written as null.
[[nodiscard]] inline nlohmann::ordered_json outcome_record(const TestOutcome& o) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(o.method));
  j["n"] = o.n;
  j["G"] = o.G;
  j["m"] = o.m;
  j["p"] = o.p;
  j["block_len"] = o.block_len;
  j["bandwidth"] = o.bandwidth;
  j["B"] = o.B;
  j["alpha"] = o.alpha;
  j["statistic"] = o.statistic;
  j["critical_value"] = std::isfinite(o.critical_value) ? nlohmann::ordered_json(o.critical_value)
                                                         : nlohmann::ordered_json(nullptr);
  j["p_value"] = o.p_value;
  j["reject"] = o.reject;
  j["argmax_k"] = o.argmax_k;
  j["seed"] = o.seed;
  return j;
}

inline void write_replicates_csv(std::ostream& out, const TestOutcome& o) {
  out << std::setprecision(17);
  for (double r : o.replicates) out << r << '\n';
}

inline void write_replicates_file(const std::string& path, const TestOutcome& o) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path);
  write_replicates_csv(out, o);
  if (!out) throw IoError("write failed", path);
}

}  // namespace fsbcp
