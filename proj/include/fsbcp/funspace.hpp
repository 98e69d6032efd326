#pragma once

// Discretized L2[0,1]: grids with trapezoidal quadrature, sample moments,
// the lag-zero covariance operator and its eigensystem, scores and
// Karhunen-Loeve remainders.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsbcp/errors.hpp"

namespace fsbcp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Abscissae on [0,1] with positive trapezoidal weights summing to one.
class Grid {
 public:
  Grid() = default;

  /// Trapezoidal weights for arbitrary strictly increasing points spanning
  /// [0,1]. Throws InvalidArgument if the points do not qualify.
  static Grid from_points(std::vector<double> points) {
    if (points.size() < 3) throw InvalidArgument("grid needs at least 3 points");
    if (std::abs(points.front()) > 1e-12 || std::abs(points.back() - 1.0) > 1e-12)
      throw InvalidArgument("grid must start at 0 and end at 1");
    points.front() = 0.0;
    points.back() = 1.0;
    const std::size_t g = points.size();
    std::vector<double> weights(g);
    for (std::size_t i = 0; i < g; ++i) {
      if (i + 1 < g && !(points[i + 1] > points[i]))
        throw InvalidArgument("grid points must be strictly increasing");
      const double left = i == 0 ? 0.0 : points[i] - points[i - 1];
      const double right = i + 1 == g ? 0.0 : points[i + 1] - points[i];
      weights[i] = 0.5 * (left + right);
    }
    return Grid(std::move(points), std::move(weights));
  }

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] const Vector& points() const noexcept { return points_; }
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_.size() == b.points_.size() && a.points_ == b.points_;
  }

 private:
  Grid(std::vector<double> points, std::vector<double> weights)
      : points_(Eigen::Map<const Vector>(points.data(), static_cast<Eigen::Index>(points.size()))),
        weights_(Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()))) {}

  Vector points_;
  Vector weights_;
};

/// G equidistant points on [0,1] with weights (1/2, 1, ..., 1, 1/2)/(G-1).
[[nodiscard]] inline Grid make_grid(std::size_t g) {
  if (g < 3) throw InvalidArgument("make_grid: G must be at least 3, got " + std::to_string(g));
  std::vector<double> points(g);
  for (std::size_t i = 0; i < g; ++i) points[i] = static_cast<double>(i) / static_cast<double>(g - 1);
  return Grid::from_points(std::move(points));
}

/// n curves sampled on a common grid; row t holds Y_t.
struct FunctionSeries {
  Grid grid;
  RowMatrix values;

  FunctionSeries() = default;
  FunctionSeries(Grid g, RowMatrix v) : grid(std::move(g)), values(std::move(v)) {
    if (values.rows() < 1) throw InsufficientData("function series is empty");
    if (static_cast<std::size_t>(values.cols()) != grid.size())
      throw InvalidArgument("function series width " + std::to_string(values.cols()) +
                            " does not match grid size " + std::to_string(grid.size()));
    if (!values.allFinite()) throw InvalidArgument("function series contains non-finite values");
  }

  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(values.rows()); }
  [[nodiscard]] std::size_t grid_size() const noexcept { return grid.size(); }
};

[[nodiscard]] inline double inner_product(std::span<const double> f, std::span<const double> g,
                                          const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw InvalidArgument("inner_product: function length does not match grid");
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[static_cast<Eigen::Index>(i)] * f[i] * g[i];
  return acc;
}

[[nodiscard]] inline double inner_product(const Vector& f, const Vector& g, const Grid& grid) {
  return inner_product(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())),
                       std::span<const double>(g.data(), static_cast<std::size_t>(g.size())), grid);
}

[[nodiscard]] inline double l2_norm(const Vector& f, const Grid& grid) {
  return std::sqrt(std::max(0.0, inner_product(f, f, grid)));
}

[[nodiscard]] inline Vector sample_mean(const FunctionSeries& series) {
  return series.values.colwise().mean().transpose();
}

/// Rows of the series with the pointwise sample mean removed.
[[nodiscard]] inline RowMatrix centered_values(const FunctionSeries& series) {
  return series.values.rowwise() - series.values.colwise().mean();
}

/// Sample lag-zero covariance kernel c(x_i, x_j) on the grid.
struct CovOperator {
  Grid grid;
  Matrix kernel;
};

[[nodiscard]] inline CovOperator cov_operator(const FunctionSeries& series) {
  if (series.n() < 2) throw InsufficientData("cov_operator: need at least 2 curves");
  const RowMatrix centered = centered_values(series);
  Matrix kernel = (centered.transpose() * centered) / static_cast<double>(series.n());
  kernel = 0.5 * (kernel + kernel.transpose()).eval();
  return {series.grid, std::move(kernel)};
}

/// Leading eigenpairs of the covariance operator under the quadrature
/// inner product. Eigenfunctions are stored as columns of a G x m matrix.
struct EigenSystem {
  Grid grid;
  Vector eigenvalues;     ///< leading m, descending, clipped at zero
  Matrix eigenfunctions;  ///< G x m, quadrature-orthonormal
  Vector spacings;        ///< alpha_j, j = 1..m
  Vector spectrum;        ///< all G eigenvalues, descending, clipped at zero
  double trace = 0.0;     ///< sum_i w_i c(x_i, x_i)
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t m() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }

  [[nodiscard]] double explained_fraction() const noexcept {
    return trace > 0.0 ? eigenvalues.sum() / trace : 1.0;
  }

  [[nodiscard]] Vector eigenfunction(std::size_t j) const {
    return eigenfunctions.col(static_cast<Eigen::Index>(j));
  }

  /// The same system restricted to its first k components.
  [[nodiscard]] EigenSystem truncated(std::size_t k) const {
    if (k < 1 || k > m()) throw InvalidArgument("EigenSystem::truncated: k out of range");
    EigenSystem out = *this;
    const auto kk = static_cast<Eigen::Index>(k);
    out.eigenvalues = eigenvalues.head(kk);
    out.eigenfunctions = eigenfunctions.leftCols(kk);
    out.spacings = spacings.head(kk);
    return out;
  }
};

namespace detail {

inline void canonicalize_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Strict comparison with a relative margin keeps the choice stable when
    // two entries agree up to rounding.
    if (std::abs(v[i]) > best * (1.0 + 1e-9)) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (v[arg] < 0.0) v = -v;
}

}  // namespace detail

/// Top-m eigenpairs of the weighted operator. The symmetric problem
/// W^{1/2} K W^{1/2} is solved and eigenvectors are mapped back by W^{-1/2}.
/// If lambda_m < 1e-12 lambda_1 the system is truncated to the last
/// component above that floor and a diagnostic is recorded.
[[nodiscard]] inline EigenSystem eigendecompose(const CovOperator& op, std::size_t m) {
  const std::size_t g = op.grid.size();
  if (m < 1 || m > g) throw InvalidArgument("eigendecompose: m must lie in [1, G]");
  if (op.kernel.rows() != static_cast<Eigen::Index>(g) || op.kernel.cols() != static_cast<Eigen::Index>(g))
    throw InvalidArgument("eigendecompose: kernel shape does not match grid");
  const double scale = std::max(1.0, op.kernel.cwiseAbs().maxCoeff());
  if ((op.kernel - op.kernel.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("eigendecompose: kernel is not symmetric");

  const Vector sqrt_w = op.grid.weights().cwiseSqrt();
  Matrix weighted = sqrt_w.asDiagonal() * op.kernel * sqrt_w.asDiagonal();
  weighted = 0.5 * (weighted + weighted.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(weighted);
  if (solver.info() != Eigen::Success) throw FitFailure("eigendecompose: symmetric eigensolver failed");

  const auto gg = static_cast<Eigen::Index>(g);
  EigenSystem out;
  out.grid = op.grid;
  out.trace = op.grid.weights().dot(op.kernel.diagonal());
  out.spectrum = solver.eigenvalues().reverse().cwiseMax(0.0);

  const double lead = out.spectrum[0];
  std::size_t keep = m;
  if (lead <= 0.0) {
    keep = 1;
    out.diagnostics.push_back("zero covariance operator; keeping a single component");
  } else {
    while (keep > 1 && out.spectrum[static_cast<Eigen::Index>(keep - 1)] < 1e-12 * lead) --keep;
    if (keep < m)
      out.diagnostics.push_back("degenerate spectrum: m truncated from " + std::to_string(m) + " to " +
                                std::to_string(keep));
  }

  const auto k = static_cast<Eigen::Index>(keep);
  out.eigenvalues = out.spectrum.head(k);
  out.eigenfunctions.resize(gg, k);
  const Vector inv_sqrt_w = sqrt_w.cwiseInverse();
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = inv_sqrt_w.cwiseProduct(solver.eigenvectors().col(gg - 1 - j));
    detail::canonicalize_sign(v);
    out.eigenfunctions.col(j) = v;
  }

  out.spacings.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double below = j + 1 < gg ? out.spectrum[j] - out.spectrum[j + 1] : out.spectrum[j];
    out.spacings[j] = j == 0 ? below : std::min(out.spectrum[j - 1] - out.spectrum[j], below);
    out.spacings[j] = std::max(0.0, out.spacings[j]);
  }
  return out;
}

/// Scores of the centered series, entry (t, j) = <Y_t - mean, v_j>.
struct ScoreSeries {
  Matrix scores;  ///< n x m

  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(scores.rows()); }
  [[nodiscard]] std::size_t m() const noexcept { return static_cast<std::size_t>(scores.cols()); }
};

[[nodiscard]] inline ScoreSeries project_scores(const FunctionSeries& series, const EigenSystem& eig) {
  if (!(series.grid == eig.grid)) throw InvalidArgument("project_scores: grid mismatch");
  const RowMatrix centered = centered_values(series);
  Matrix scores = centered * (eig.grid.weights().asDiagonal() * eig.eigenfunctions);
  return {std::move(scores)};
}

/// Centered Karhunen-Loeve remainders; rows are U_t - mean(U).
struct RemainderPool {
  RowMatrix values;  ///< n x G

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

/// Remainders before pool centering: (Y_t - mean) - sum_j xi_{j,t} v_j.
[[nodiscard]] inline RowMatrix raw_remainders(const FunctionSeries& series, const EigenSystem& eig,
                                              const ScoreSeries& scores) {
  if (!(series.grid == eig.grid)) throw InvalidArgument("remainders: grid mismatch");
  RowMatrix out = centered_values(series);
  out.noalias() -= scores.scores * eig.eigenfunctions.transpose();
  return out;
}

[[nodiscard]] inline RemainderPool remainders(const FunctionSeries& series, const EigenSystem& eig) {
  const ScoreSeries scores = project_scores(series, eig);
  RowMatrix raw = raw_remainders(series, eig, scores);
  raw.rowwise() -= raw.colwise().mean();
  return {std::move(raw)};
}

}  // namespace fsbcp
