#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"

namespace fsbcp {

/// Fully functional CUSUM statistic and its profile.
struct CusumResult {
  double statistic = 0.0;
  std::size_t argmax_k = 1;    ///< smallest maximizing k, 1-based
  std::vector<double> profile;  ///< n^{-1/2} ||S_k - (k/n) S_n||, k = 1..n-1
};

namespace detail {

/// Shared kernel: walks the prefix sums once and reports the profile value
/// for every k through `emit(k, value)`.
template <class Emit>
void cusum_profile(const RowMatrix& values, const Vector& weights, Emit&& emit) {
  const Eigen::Index n = values.rows();
  const Eigen::Index g = values.cols();
  const double nd = static_cast<double>(n);
  // Partial sums of the centered curves: exact zeros for constant data and
  // no cancellation against a large common level.
  const Eigen::RowVectorXd mean = values.colwise().sum() / nd;
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(g);
  for (Eigen::Index k = 0; k < n; ++k) total += values.row(k) - mean;
  Eigen::RowVectorXd prefix = Eigen::RowVectorXd::Zero(g);
  const double inv_sqrt_n = 1.0 / std::sqrt(nd);
  for (Eigen::Index k = 1; k < n; ++k) {
    prefix += values.row(k - 1) - mean;
    const double frac = static_cast<double>(k) / nd;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < g; ++i) {
      const double d = prefix[i] - frac * total[i];
      sq += weights[i] * d * d;
    }
    emit(static_cast<std::size_t>(k), std::sqrt(sq) * inv_sqrt_n);
  }
}

}  // namespace detail

[[nodiscard]] inline CusumResult cusum(const RowMatrix& values, const Grid& grid) {
  if (values.rows() < 2) throw InsufficientData("cusum: need at least 2 curves");
  if (static_cast<std::size_t>(values.cols()) != grid.size())
    throw InvalidArgument("cusum: series width does not match grid");
  CusumResult out;
  out.profile.reserve(static_cast<std::size_t>(values.rows() - 1));
  detail::cusum_profile(values, grid.weights(), [&](std::size_t k, double v) {
    out.profile.push_back(v);
    if (v > out.statistic) {
      out.statistic = v;
      out.argmax_k = k;
    }
  });
  return out;
}

[[nodiscard]] inline CusumResult cusum(const FunctionSeries& series) {
  return cusum(series.values, series.grid);
}

/// Statistic only, for bootstrap loops that do not need the profile.
[[nodiscard]] inline double cusum_statistic(const RowMatrix& values, const Vector& weights) {
  if (values.rows() < 2) throw InsufficientData("cusum: need at least 2 curves");
  double best = 0.0;
  detail::cusum_profile(values, weights, [&](std::size_t, double v) { best = std::max(best, v); });
  return best;
}

/// Partial-sum process Z_n(t) = n^{-1/2} sum_{i <= floor(n t)} Y_i.
[[nodiscard]] inline Vector partial_sum(const FunctionSeries& series, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("partial_sum: t must lie in [0, 1]");
  const auto n = static_cast<Eigen::Index>(series.n());
  const auto count = std::min(n, static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * t)));
  Vector out = Vector::Zero(static_cast<Eigen::Index>(series.grid_size()));
  if (count > 0) out = series.values.topRows(count).colwise().sum().transpose();
  return out / std::sqrt(static_cast<double>(n));
}

}  // namespace fsbcp
