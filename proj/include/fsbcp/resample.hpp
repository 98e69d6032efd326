#pragma once

// Critical-value engines for the CUSUM test: the functional sieve bootstrap,
// the sequential non-overlapping block bootstrap, and simulation of the
// Brownian-bridge limit with an estimated long-run covariance.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsbcp/cusum.hpp"
#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"
#include "fsbcp/parallel.hpp"
#include "fsbcp/rng.hpp"
#include "fsbcp/varsieve.hpp"

namespace fsbcp {

enum class Method { fsb, nbb, asymptotic };

[[nodiscard]] inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::fsb: return "fsb";
    case Method::nbb: return "nbb";
    case Method::asymptotic: return "asymptotic";
  }
  return "unknown";
}

[[nodiscard]] inline Method parse_method(std::string_view s) {
  if (s == "fsb") return Method::fsb;
  if (s == "nbb") return Method::nbb;
  if (s == "asymptotic") return Method::asymptotic;
  throw InvalidArgument("unknown method '" + std::string(s) + "' (expected fsb, nbb or asymptotic)");
}

struct BootstrapDistribution {
  Method method = Method::fsb;
  std::vector<double> replicates;

  [[nodiscard]] std::size_t size() const noexcept { return replicates.size(); }
};

/// Result of one test application. For the asymptotic method m holds the
/// number of projected components and B the number of simulated paths.
struct TestOutcome {
  Method method = Method::fsb;
  std::size_t n = 0;
  std::size_t G = 0;
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t block_len = 0;
  std::size_t bandwidth = 0;
  std::size_t B = 0;
  double alpha = 0.05;
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::size_t argmax_k = 0;
  std::uint64_t seed = 0;
  std::vector<double> replicates;
  std::vector<std::string> diagnostics;
};

/// Index ceil((1 - alpha)(B + 1)) of the ascending order statistic that
/// serves as critical value; B + 1 means "no finite critical value".
[[nodiscard]] inline std::size_t critical_rank(std::size_t count, double alpha) {
  const double target = (1.0 - alpha) * static_cast<double>(count + 1);
  return static_cast<std::size_t>(std::ceil(target - 1e-9));
}

struct Decision {
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

/// Critical value, p-value and decision for statistic T against ascending
/// null replicates.
///
/// p = (1 + #{T* >= T}) / (B + 1) and the test rejects when p <= alpha. This
/// coincides with T >= critical value whenever T does not tie an order
/// statistic; on an exact tie (e.g. constant data, T = T* = 0) the decision
/// is "do not reject".
[[nodiscard]] inline Decision decide(double statistic, const std::vector<double>& sorted, double alpha) {
  Decision d;
  const std::size_t rank = critical_rank(sorted.size(), alpha);
  d.critical_value = rank >= 1 && rank <= sorted.size() ? sorted[rank - 1]
                                                        : std::numeric_limits<double>::infinity();
  const auto exceed = static_cast<std::size_t>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), statistic));
  d.p_value = static_cast<double>(1 + exceed) / static_cast<double>(sorted.size() + 1);
  d.reject = static_cast<double>(1 + exceed) <= alpha * static_cast<double>(sorted.size() + 1) + 1e-9;
  return d;
}

inline void finalize_outcome(TestOutcome& out, std::vector<double> replicates, double alpha) {
  out.alpha = alpha;
  out.B = replicates.size();
  std::vector<double> sorted = replicates;
  std::sort(sorted.begin(), sorted.end());
  const Decision d = decide(out.statistic, sorted, alpha);
  out.critical_value = d.critical_value;
  out.p_value = d.p_value;
  out.reject = d.reject;
  out.replicates = std::move(replicates);
}

/// The same outcome re-decided at another level.
[[nodiscard]] inline TestOutcome at_level(TestOutcome out, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  std::vector<double> replicates = std::move(out.replicates);
  finalize_outcome(out, std::move(replicates), alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Functional sieve bootstrap

/// Requested FSB tuning; unset m or p is chosen from the data.
struct FsbTuning {
  std::optional<std::size_t> m;
  std::optional<std::size_t> p;
  double threshold = 0.85;
  std::optional<std::size_t> p_max;
};

/// Everything needed to regenerate pseudo series.
struct FsbModel {
  EigenSystem eig;
  VarFit fit;
  RemainderPool remainders;
  Vector mean;
  std::size_t n = 0;
  std::size_t burn_in = 100;
  TuningChoice tuning;
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t m() const noexcept { return eig.m(); }
  [[nodiscard]] std::size_t p() const noexcept { return fit.p; }
};

[[nodiscard]] inline FsbModel fsb_fit(const FunctionSeries& series, const FsbTuning& tuning) {
  const std::size_t n = series.n();
  const std::size_t g = series.grid_size();
  if (n < 4) throw InsufficientData("fsb_fit: need at least 4 curves");
  if (tuning.m && (*tuning.m < 1 || *tuning.m > g)) throw InvalidArgument("fsb_fit: m must lie in [1, G]");

  const CovOperator cov = cov_operator(series);
  const EigenSystem full = eigendecompose(cov, g);

  FsbModel model;
  model.n = n;
  model.mean = sample_mean(series);
  model.diagnostics = full.diagnostics;

  std::size_t m = 0;
  if (tuning.m) {
    m = std::min(*tuning.m, full.m());
    if (m < *tuning.m)
      model.diagnostics.push_back("degenerate spectrum: m truncated from " + std::to_string(*tuning.m) +
                                  " to " + std::to_string(m));
    model.tuning.m_method = "fixed";
  } else {
    m = select_m(full, tuning.threshold, n);
    model.tuning.m_method = "explained-variance";
  }
  model.eig = full.truncated(m);
  model.tuning.m = m;
  model.tuning.explained_fraction = model.eig.explained_fraction();

  const ScoreSeries scores = project_scores(series, model.eig);
  std::size_t p = 0;
  if (tuning.p) {
    p = *tuning.p;
    if (p < 1) throw InvalidArgument("fsb_fit: p must be at least 1");
    if (2 * p * m >= n) throw InvalidArgument("fsb_fit: m * p must be below n/2");
    model.tuning.p_method = "fixed";
  } else {
    const std::size_t p_max = tuning.p_max.value_or(default_p_max(n, m));
    OrderSelection sel = select_p_trace(scores.scores, m, p_max);
    p = sel.p;
    model.tuning.criterion = std::move(sel.criterion);
    model.tuning.p_method = "aicc";
  }
  model.tuning.p = p;

  model.fit = fit_var(scores.scores, p);
  for (const auto& d : model.fit.diagnostics) model.diagnostics.push_back(d);
  model.remainders = remainders(series, model.eig);
  model.burn_in = std::max<std::size_t>(100, 10 * p);
  return model;
}

[[nodiscard]] inline FsbModel fsb_fit(const FunctionSeries& series, std::size_t m, std::size_t p) {
  FsbTuning t;
  t.m = m;
  t.p = p;
  return fsb_fit(series, t);
}

/// Pseudo scores from the fitted VAR recursion, started at zero and run
/// through the burn-in, with innovations resampled from the residual pool.
[[nodiscard]] inline Matrix fsb_generate_scores(const FsbModel& model, RngStream& rng) {
  const auto m = static_cast<Eigen::Index>(model.m());
  const auto p = static_cast<Eigen::Index>(model.p());
  const auto n = static_cast<Eigen::Index>(model.n);
  const auto burn = static_cast<Eigen::Index>(model.burn_in);
  const auto pool = static_cast<std::size_t>(model.fit.residuals.rows());

  Matrix path = Matrix::Zero(burn + n, m);
  for (Eigen::Index t = 0; t < burn + n; ++t) {
    Vector next = model.fit.residuals.row(static_cast<Eigen::Index>(rng.index(pool))).transpose();
    for (Eigen::Index j = 1; j <= p && j <= t; ++j)
      next.noalias() += model.fit.coefficients[static_cast<std::size_t>(j - 1)] * path.row(t - j).transpose();
    path.row(t) = next.transpose();
  }
  return path.bottomRows(n);
}

/// Pseudo series X*_t = sum_j xi*_{j,t} v_j + U*_t. Remainders are drawn after
/// the residual indices, so the two index sequences are independent. The
/// sample mean is not added back; the CUSUM statistic ignores it.
[[nodiscard]] inline FunctionSeries fsb_generate(const FsbModel& model, RngStream& rng) {
  const Matrix scores = fsb_generate_scores(model, rng);
  RowMatrix values = scores * model.eig.eigenfunctions.transpose();
  const std::size_t pool = model.remainders.size();
  for (Eigen::Index t = 0; t < values.rows(); ++t)
    values.row(t) += model.remainders.values.row(static_cast<Eigen::Index>(rng.index(pool)));
  return {model.eig.grid, std::move(values)};
}

[[nodiscard]] inline BootstrapDistribution fsb_replicates(const FsbModel& model, std::size_t B,
                                                          const RngStream& rng, std::size_t workers = 1) {
  BootstrapDistribution dist;
  dist.method = Method::fsb;
  dist.replicates.assign(B, 0.0);
  const Vector& weights = model.eig.grid.weights();
  parallel_for(B, workers, [&](std::size_t b) {
    RngStream stream = rng.child(b);
    const FunctionSeries pseudo = fsb_generate(model, stream);
    dist.replicates[b] = cusum_statistic(pseudo.values, weights);
  });
  return dist;
}

[[nodiscard]] inline TestOutcome fsb_test(const FunctionSeries& series, std::size_t B, double alpha,
                                          const FsbTuning& tuning, const RngStream& rng,
                                          std::size_t workers = 1) {
  if (B < 100) throw InvalidArgument("fsb_test: B must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("fsb_test: alpha must lie in (0, 1)");
  const CusumResult observed = cusum(series);
  const FsbModel model = fsb_fit(series, tuning);

  TestOutcome out;
  out.method = Method::fsb;
  out.n = series.n();
  out.G = series.grid_size();
  out.m = model.m();
  out.p = model.p();
  out.seed = rng.master_seed();
  out.statistic = observed.statistic;
  out.argmax_k = observed.argmax_k;
  out.diagnostics = model.diagnostics;
  finalize_outcome(out, fsb_replicates(model, B, rng, workers).replicates, alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Non-overlapping block bootstrap

[[nodiscard]] inline std::size_t default_block_length(std::size_t n) { return cube_root_ceil(n); }

/// One pseudo series: ceil(n/l) blocks drawn uniformly from the floor(n/l)
/// disjoint blocks, truncated to n rows and centered by the original mean.
[[nodiscard]] inline RowMatrix nbb_generate(const RowMatrix& values, const Eigen::RowVectorXd& mean,
                                            std::size_t block_len, RngStream& rng) {
  const auto n = static_cast<std::size_t>(values.rows());
  const std::size_t blocks = n / block_len;
  RowMatrix out(values.rows(), values.cols());
  std::size_t row = 0;
  while (row < n) {
    const std::size_t start = rng.index(blocks) * block_len;
    const std::size_t len = std::min(block_len, n - row);
    out.middleRows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(len)) =
        values.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
    row += len;
  }
  out.rowwise() -= mean;
  return out;
}

[[nodiscard]] inline TestOutcome nbb_test(const FunctionSeries& series, std::size_t B, double alpha,
                                          std::optional<std::size_t> block_len, const RngStream& rng,
                                          std::size_t workers = 1) {
  if (B < 100) throw InvalidArgument("nbb_test: B must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("nbb_test: alpha must lie in (0, 1)");
  const std::size_t n = series.n();
  const std::size_t l = block_len.value_or(default_block_length(n));
  if (l < 1 || 2 * l > n) throw InvalidArgument("nbb_test: block length must lie in [1, n/2]");

  const CusumResult observed = cusum(series);
  const Eigen::RowVectorXd mean = series.values.colwise().mean();
  const Vector& weights = series.grid.weights();
  std::vector<double> replicates(B, 0.0);
  parallel_for(B, workers, [&](std::size_t b) {
    RngStream stream = rng.child(b);
    replicates[b] = cusum_statistic(nbb_generate(series.values, mean, l, stream), weights);
  });

  TestOutcome out;
  out.method = Method::nbb;
  out.n = n;
  out.G = series.grid_size();
  out.block_len = l;
  out.seed = rng.master_seed();
  out.statistic = observed.statistic;
  out.argmax_k = observed.argmax_k;
  finalize_outcome(out, std::move(replicates), alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic comparator

/// Bartlett estimate sum_{|h| <= b} (1 - |h|/b) Gamma(h) of the long-run
/// covariance, symmetrized with negative eigenvalues clipped at zero.
[[nodiscard]] inline Matrix long_run_covariance(const Matrix& scores, std::size_t bandwidth) {
  const auto n = static_cast<std::size_t>(scores.rows());
  const std::size_t b = std::max<std::size_t>(1, std::min(bandwidth, n - 1));
  const AutocovSet acov = autocovariances(scores, b);
  Matrix lrv = acov.lags[0];
  for (std::size_t h = 1; h <= b; ++h) {
    const double w = 1.0 - static_cast<double>(h) / static_cast<double>(bandwidth);
    if (w <= 0.0) continue;
    lrv += w * (acov.lags[h] + acov.lags[h].transpose());
  }
  lrv = 0.5 * (lrv + lrv.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lrv);
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

/// sup_k ||W(k/N) - (k/N) W(1)|| for M simulated d-dimensional Brownian
/// motions with covariance `cov`, observed on N equidistant points.
/// Paths are simulated in chunks with their own substreams.
[[nodiscard]] inline std::vector<double> simulate_bridge_sup(const Matrix& cov, std::size_t grid_points,
                                                             std::size_t paths, const RngStream& rng,
                                                             std::size_t workers = 1) {
  if (grid_points < 2) throw InvalidArgument("simulate_bridge_sup: need at least 2 grid points");
  const Eigen::Index d = cov.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const auto big_n = static_cast<Eigen::Index>(grid_points);
  const double step = 1.0 / std::sqrt(static_cast<double>(grid_points));

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  std::vector<double> sups(paths, 0.0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    RngStream stream = rng.child(c);
    Matrix z(big_n, d);
    Matrix walk(big_n, d);
    for (std::size_t path = c * kChunk; path < std::min(paths, (c + 1) * kChunk); ++path) {
      for (Eigen::Index k = 0; k < big_n; ++k)
        for (Eigen::Index i = 0; i < d; ++i) z(k, i) = stream.normal();
      walk.noalias() = z * (step * root.transpose());
      for (Eigen::Index k = 1; k < big_n; ++k) walk.row(k) += walk.row(k - 1);
      const Eigen::RowVectorXd end = walk.row(big_n - 1);
      double best = 0.0;
      for (Eigen::Index k = 0; k + 1 < big_n; ++k) {
        const double frac = static_cast<double>(k + 1) / static_cast<double>(big_n);
        best = std::max(best, (walk.row(k) - frac * end).squaredNorm());
      }
      sups[path] = std::sqrt(best);
    }
  });
  return sups;
}

/// Options for the asymptotic comparator; unset values are data-driven.
struct AsymptoticTuning {
  std::optional<std::size_t> d;
  std::optional<std::size_t> bandwidth;
  std::size_t M = 5000;
  double threshold = 0.85;
  std::optional<std::size_t> grid_points;  ///< defaults to n
};

[[nodiscard]] inline TestOutcome asymptotic_test(const FunctionSeries& series, double alpha,
                                                 const AsymptoticTuning& tuning, const RngStream& rng,
                                                 std::size_t workers = 1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("asymptotic_test: alpha must lie in (0, 1)");
  if (tuning.M < 1000) throw InvalidArgument("asymptotic_test: M must be at least 1000");
  const std::size_t n = series.n();
  const CusumResult observed = cusum(series);
  const EigenSystem full = eigendecompose(cov_operator(series), series.grid_size());

  std::size_t d = 0;
  if (tuning.d) {
    d = *tuning.d;
    if (d < 1 || d > full.m())
      throw InvalidArgument("asymptotic_test: d must lie in [1, " + std::to_string(full.m()) + "]");
  } else {
    d = select_m(full, tuning.threshold, n);
  }
  const std::size_t b = tuning.bandwidth.value_or(cube_root_ceil(n));
  if (b < 1 || b >= n) throw InvalidArgument("asymptotic_test: bandwidth must lie in [1, n-1]");

  const ScoreSeries scores = project_scores(series, full.truncated(d));
  const Matrix lrv = long_run_covariance(scores.scores, b);

  TestOutcome out;
  out.method = Method::asymptotic;
  out.n = n;
  out.G = series.grid_size();
  out.m = d;
  out.bandwidth = b;
  out.seed = rng.master_seed();
  out.statistic = observed.statistic;
  out.argmax_k = observed.argmax_k;
  out.diagnostics = full.diagnostics;
  finalize_outcome(out, simulate_bridge_sup(lrv, tuning.grid_points.value_or(n), tuning.M, rng, workers), alpha);
  return out;
}

}  // namespace fsbcp
