#pragma once

// Monte Carlo size and size-corrected power studies.
//
// Every replication owns the substream seed -> dgp label -> replication r;
// the data are drawn from its "data" child and each method from a child
// named after the method. Results are reduced in replication order, so the
// output does not depend on the worker count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fsbcp/cusum.hpp"
#include "fsbcp/dgp.hpp"
#include "fsbcp/parallel.hpp"
#include "fsbcp/resample.hpp"
#include "fsbcp/rng.hpp"
#include "fsbcp/studio/config.hpp"

namespace fsbcp::studio {

/// One method applied to one series; alpha-independent.
struct MethodRun {
  bool failed = false;
  std::string failure;
  double statistic = 0.0;
  std::vector<double> sorted;  ///< ascending null replicates
  std::size_t m = 0;           ///< components (fsb), d (asymptotic)
  std::size_t p = 0;           ///< order (fsb), block length (nbb), bandwidth (asymptotic)
};

/// Applies a method with the study's tuning. Bootstrap replicates run on
/// `workers` threads (the studies pass 1 and parallelize replications).
[[nodiscard]] inline TestOutcome run_test(const FunctionSeries& series, Method method, const StudyConfig& cfg,
                                          double alpha, const RngStream& rng, std::size_t workers = 1) {
  switch (method) {
    case Method::fsb: return fsb_test(series, cfg.B, alpha, cfg.fsb_tuning(), rng, workers);
    case Method::nbb: return nbb_test(series, cfg.B, alpha, cfg.block_length(), rng, workers);
    case Method::asymptotic: return asymptotic_test(series, alpha, cfg.asymptotic_tuning(), rng, workers);
  }
  throw InvalidArgument("unknown method");
}

[[nodiscard]] inline MethodRun run_method(const FunctionSeries& series, Method method, const StudyConfig& cfg,
                                          const RngStream& rng) {
  MethodRun run;
  try {
    TestOutcome o = run_test(series, method, cfg, cfg.alphas.front(), rng);
    run.statistic = o.statistic;
    run.sorted = std::move(o.replicates);
    std::sort(run.sorted.begin(), run.sorted.end());
    switch (method) {
      case Method::fsb: run.m = o.m; run.p = o.p; break;
      case Method::nbb: run.p = o.block_len; break;
      case Method::asymptotic: run.m = o.m; run.p = o.bandwidth; break;
    }
  } catch (const FitFailure& e) {
    run.failed = true;
    run.failure = e.what();
  }
  return run;
}

struct StudyRow {
  std::string dgp;
  Method method = Method::fsb;
  double alpha = 0.0;
  double jump = 0.0;
  double frequency = 0.0;
  double mc_se = 0.0;
  std::size_t excluded = 0;
  std::size_t effective = 0;  ///< replications entering the frequency
  std::optional<double> m_median;
  std::optional<double> p_median;
};

struct StudyResult {
  StudyConfig config;
  std::vector<StudyRow> rows;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// sqrt(f (1 - f) / R).
[[nodiscard]] inline double mc_standard_error(double frequency, std::size_t replications) {
  if (replications == 0) return 0.0;
  return std::sqrt(frequency * (1.0 - frequency) / static_cast<double>(replications));
}

namespace detail {

inline std::optional<double> median(std::vector<std::size_t> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return static_cast<double>(values[mid]);
  return 0.5 * static_cast<double>(values[mid - 1] + values[mid]);
}

inline RngStream replication_stream(const StudyConfig& cfg, const DgpEntry& dgp, std::size_t r) {
  return RngStream(cfg.seed).child("dgp=" + std::string(to_string(dgp.variant)) + ":" +
                                   format_double(cfg.dgp_spec(dgp).C)).child(r);
}

/// Per-method medians of the tuning parameters over successful runs.
inline void fill_tuning(StudyRow& row, const std::vector<const MethodRun*>& runs) {
  std::vector<std::size_t> ms, ps;
  for (const MethodRun* run : runs) {
    if (run->failed) continue;
    if (row.method != Method::nbb) ms.push_back(run->m);
    ps.push_back(run->p);
  }
  row.m_median = median(std::move(ms));
  row.p_median = median(std::move(ps));
}

inline void warn_exclusions(StudyResult& result, const std::string& dgp, Method method, std::size_t excluded,
                            std::size_t total) {
  if (total > 0 && static_cast<double>(excluded) > 0.05 * static_cast<double>(total))
    result.warnings.push_back(dgp + "/" + std::string(to_string(method)) + ": " + std::to_string(excluded) +
                              " of " + std::to_string(total) + " replications excluded after fit failures");
}

inline double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Empirical rejection frequencies under the null for every configured
/// DGP, method and level. Fit failures are excluded per method and counted.
[[nodiscard]] inline StudyResult run_size_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  StudyResult result;
  result.config = cfg;
  const std::size_t nm = cfg.methods.size();

  for (const DgpEntry& dgp : cfg.dgps) {
    const DgpSpec spec = cfg.dgp_spec(dgp);
    std::vector<std::vector<MethodRun>> runs(cfg.R);
    parallel_for(cfg.R, cfg.workers, [&](std::size_t r) {
      const RngStream rep = detail::replication_stream(cfg, dgp, r);
      RngStream data_stream = rep.child("data");
      const FunctionSeries series = simulate(spec, data_stream);
      runs[r].reserve(nm);
      for (Method method : cfg.methods)
        runs[r].push_back(run_method(series, method, cfg, rep.child(std::string(to_string(method)))));
    });

    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<const MethodRun*> column;
      std::size_t excluded = 0;
      for (std::size_t r = 0; r < cfg.R; ++r) {
        column.push_back(&runs[r][k]);
        if (runs[r][k].failed) ++excluded;
      }
      detail::warn_exclusions(result, dgp.label(), cfg.methods[k], excluded, cfg.R);
      for (double alpha : cfg.alphas) {
        StudyRow row;
        row.dgp = dgp.label();
        row.method = cfg.methods[k];
        row.alpha = alpha;
        row.excluded = excluded;
        row.effective = cfg.R - excluded;
        std::size_t rejections = 0;
        for (const MethodRun* run : column)
          if (!run->failed && decide(run->statistic, run->sorted, alpha).reject) ++rejections;
        row.frequency = row.effective ? static_cast<double>(rejections) / static_cast<double>(row.effective) : 0.0;
        row.mc_se = mc_standard_error(row.frequency, row.effective);
        detail::fill_tuning(row, column);
        result.rows.push_back(std::move(row));
      }
    }
  }
  result.wall_seconds = detail::elapsed_since(start);
  return result;
}

/// T / C*_alpha, the statistic measured in units of its critical value.
[[nodiscard]] inline double critical_ratio(const MethodRun& run, double alpha) {
  const double crit = decide(run.statistic, run.sorted, alpha).critical_value;
  if (!std::isfinite(crit)) return 0.0;
  if (crit <= 0.0) return run.statistic > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return run.statistic / crit;
}

/// Size-correction threshold: the floor(alpha R)-th largest null ratio, so
/// exactly floor(alpha R) of R distinct null ratios reach it. With
/// floor(alpha R) = 0 nothing can be rejected and the threshold is +inf.
[[nodiscard]] inline double corrected_threshold(std::vector<double> null_ratios, double alpha) {
  const std::size_t r = null_ratios.size();
  const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(r) + 1e-9));
  if (k == 0 || r == 0) return std::numeric_limits<double>::infinity();
  std::sort(null_ratios.begin(), null_ratios.end());
  return null_ratios[r - k];
}

/// Size-corrected power. Pass 1 applies every method to R null series and
/// calibrates, per method and level, a threshold on T / C*_alpha so that the
/// null rejection frequency is exactly floor(alpha R)/R. Pass 2 adds each
/// jump after k_star to the same null series (shared seeds), reruns the
/// methods with the same substreams and counts ratios above the threshold.
/// A zero jump reproduces pass 1 bit for bit and reuses it.
[[nodiscard]] inline StudyResult run_power_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  StudyResult result;
  result.config = cfg;
  const std::size_t nm = cfg.methods.size();
  const std::size_t nj = cfg.jumps.size();

  for (const DgpEntry& dgp : cfg.dgps) {
    const DgpSpec spec = cfg.dgp_spec(dgp);
    const double scale = std::pow(static_cast<double>(cfg.n), -cfg.r);
    // runs[r][j][k]: replication r, jump j, method k.
    std::vector<std::vector<std::vector<MethodRun>>> runs(cfg.R);
    parallel_for(cfg.R, cfg.workers, [&](std::size_t r) {
      const RngStream rep = detail::replication_stream(cfg, dgp, r);
      RngStream data_stream = rep.child("data");
      const FunctionSeries null_series = simulate(spec, data_stream);
      std::vector<MethodRun> null_runs;
      for (Method method : cfg.methods)
        null_runs.push_back(run_method(null_series, method, cfg, rep.child(std::string(to_string(method)))));
      runs[r].resize(nj + 1);
      runs[r][nj] = null_runs;
      for (std::size_t j = 0; j < nj; ++j) {
        if (cfg.jumps[j] == 0.0) {
          runs[r][j] = null_runs;
          continue;
        }
        const FunctionSeries alt = inject_change(null_series, cfg.change_point(), scale * cfg.jumps[j]);
        for (Method method : cfg.methods)
          runs[r][j].push_back(run_method(alt, method, cfg, rep.child(std::string(to_string(method)))));
      }
    });

    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<const MethodRun*> null_column;
      for (std::size_t r = 0; r < cfg.R; ++r) null_column.push_back(&runs[r][nj][k]);
      for (double alpha : cfg.alphas) {
        std::vector<double> null_ratios;
        for (const MethodRun* run : null_column)
          if (!run->failed) null_ratios.push_back(critical_ratio(*run, alpha));
        const double threshold = corrected_threshold(null_ratios, alpha);
        for (std::size_t j = 0; j < nj; ++j) {
          StudyRow row;
          row.dgp = dgp.label();
          row.method = cfg.methods[k];
          row.alpha = alpha;
          row.jump = cfg.jumps[j];
          std::size_t rejections = 0;
          std::vector<const MethodRun*> column;
          for (std::size_t r = 0; r < cfg.R; ++r) {
            const MethodRun& alt = runs[r][j][k];
            column.push_back(&alt);
            if (alt.failed || runs[r][nj][k].failed) {
              ++row.excluded;
              continue;
            }
            if (critical_ratio(alt, alpha) >= threshold) ++rejections;
          }
          row.effective = cfg.R - row.excluded;
          row.frequency = row.effective ? static_cast<double>(rejections) / static_cast<double>(row.effective) : 0.0;
          row.mc_se = mc_standard_error(row.frequency, row.effective);
          detail::fill_tuning(row, column);
          if (alpha == cfg.alphas.front())
            detail::warn_exclusions(result, dgp.label(), row.method, row.excluded, cfg.R);
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  result.wall_seconds = detail::elapsed_since(start);
  return result;
}

/// The first configured method at the first configured level, applied to
/// user data; bootstrap replicates use the configured worker count.
[[nodiscard]] inline TestOutcome run_single_test(const StudyConfig& cfg, const FunctionSeries& series) {
  if (cfg.methods.empty() || cfg.alphas.empty()) throw InputError("single test needs a method and an alpha");
  const Method method = cfg.methods.front();
  TestOutcome out = run_test(series, method, cfg, cfg.alphas.front(), RngStream(cfg.seed).child("test"),
                             cfg.workers);
  out.seed = cfg.seed;
  if (series.n() < 20)
    out.diagnostics.push_back("only " + std::to_string(series.n()) + " curves; bootstrap calibration is unreliable");
  return out;
}

}  // namespace fsbcp::studio
