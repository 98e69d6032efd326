#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library code it is meant to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// CUSUM profile by recomputing every partial sum from scratch, with the
/// trapezoid rule written out for an equidistant grid.
inline std::vector<double> naive_cusum_profile(const Matrix& y) {
  const Eigen::Index n = y.rows(), g = y.cols();
  const double h = 1.0 / static_cast<double>(g - 1);
  std::vector<double> out;
  for (Eigen::Index k = 1; k < n; ++k) {
    double integral = 0.0;
    for (Eigen::Index i = 0; i < g; ++i) {
      double head = 0.0, all = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        all += y(t, i);
        if (t < k) head += y(t, i);
      }
      const double d = head - static_cast<double>(k) / static_cast<double>(n) * all;
      const double w = (i == 0 || i == g - 1) ? 0.5 * h : h;
      integral += w * d * d;
    }
    out.push_back(std::sqrt(integral / static_cast<double>(n)));
  }
  return out;
}

/// Spectral radius of a VAR companion matrix from a full eigen solve.
inline double companion_radius(const std::vector<Matrix>& a) {
  const Eigen::Index m = a.front().rows();
  const Eigen::Index dim = m * static_cast<Eigen::Index>(a.size());
  Matrix f = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < a.size(); ++j) f.block(0, static_cast<Eigen::Index>(j) * m, m, m) = a[j];
  if (dim > m) f.block(m, 0, dim - m, dim - m).setIdentity();
  return Eigen::EigenSolver<Matrix>(f, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Random VAR(p) coefficients rescaled to companion spectral radius `radius`.
inline std::vector<Matrix> random_stable_var(std::size_t m, std::size_t p, double radius, std::mt19937_64& gen) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Matrix> a(p, Matrix(m, m));
  for (auto& aj : a)
    for (Eigen::Index i = 0; i < aj.rows(); ++i)
      for (Eigen::Index j = 0; j < aj.cols(); ++j) aj(i, j) = z(gen) / static_cast<double>(m);
  const double c = radius / companion_radius(a);
  double scale = 1.0;
  for (auto& aj : a) {
    scale *= c;
    aj *= scale;
  }
  return a;
}

/// Exact autocovariances Gamma(0..h_max) of a stable VAR(p) with innovation
/// covariance sigma: the companion-form discrete Lyapunov equation solved
/// through its Kronecker linear system, then the Yule-Walker recursion for
/// lags beyond p - 1.
inline std::vector<Matrix> var_autocovariances(const std::vector<Matrix>& a, const Matrix& sigma,
                                               std::size_t h_max) {
  const Eigen::Index m = sigma.rows();
  const auto p = static_cast<Eigen::Index>(a.size());
  const Eigen::Index dim = m * p;
  Matrix f = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < p; ++j) f.block(0, j * m, m, m) = a[static_cast<std::size_t>(j)];
  if (dim > m) f.block(m, 0, dim - m, dim - m).setIdentity();
  Matrix q = Matrix::Zero(dim, dim);
  q.topLeftCorner(m, m) = sigma;

  Matrix kron(dim * dim, dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) kron.block(i * dim, j * dim, dim, dim) = f(i, j) * f;
  const Matrix lhs = Matrix::Identity(dim * dim, dim * dim) - kron;
  const Vector vec_q = Eigen::Map<const Vector>(q.data(), dim * dim);
  const Vector vec_s = lhs.fullPivLu().solve(vec_q);
  const Matrix s = Eigen::Map<const Matrix>(vec_s.data(), dim, dim);

  std::vector<Matrix> gamma;
  for (Eigen::Index h = 0; h < p && static_cast<std::size_t>(h) <= h_max; ++h) gamma.push_back(s.block(0, h * m, m, m));
  auto at = [&](long h) -> Matrix {
    return h >= 0 ? gamma[static_cast<std::size_t>(h)] : Matrix(gamma[static_cast<std::size_t>(-h)].transpose());
  };
  for (std::size_t h = gamma.size(); h <= h_max; ++h) {
    Matrix next = Matrix::Zero(m, m);
    for (Eigen::Index j = 1; j <= p; ++j) next += a[static_cast<std::size_t>(j - 1)] * at(static_cast<long>(h) - j);
    gamma.push_back(next);
  }
  return gamma;
}

/// Simulates x_t = sum_j A_j x_{t-j} + e_t with e_t ~ N(0, I) after a burn-in.
inline Matrix simulate_var(const std::vector<Matrix>& a, std::size_t n, std::mt19937_64& gen,
                           Matrix* innovations = nullptr) {
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Index m = a.front().rows();
  const std::size_t burn = 500;
  Matrix path = Matrix::Zero(static_cast<Eigen::Index>(n + burn), m);
  Matrix e(static_cast<Eigen::Index>(n + burn), m);
  for (Eigen::Index t = 0; t < path.rows(); ++t) {
    for (Eigen::Index i = 0; i < m; ++i) e(t, i) = z(gen);
    Vector x = e.row(t).transpose();
    for (std::size_t j = 1; j <= a.size() && static_cast<Eigen::Index>(j) <= t; ++j)
      x += a[j - 1] * path.row(t - static_cast<Eigen::Index>(j)).transpose();
    path.row(t) = x.transpose();
  }
  if (innovations) *innovations = e.bottomRows(static_cast<Eigen::Index>(n));
  return path.bottomRows(static_cast<Eigen::Index>(n));
}

/// Least-squares VAR(1) regression x_t on x_{t-1}, no intercept.
inline Matrix least_squares_var1(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Matrix lagged = x.topRows(n - 1);
  const Matrix current = x.bottomRows(n - 1);
  return (lagged.transpose() * lagged).ldlt().solve(lagged.transpose() * current).transpose();
}

/// Kolmogorov distribution P(sup|B| <= x).
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

inline double kolmogorov_quantile(double level) {
  double lo = 0.2, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Asymptotic p-value of the two-sample Kolmogorov-Smirnov statistic, with
/// the usual small-sample correction of the argument.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double en = std::sqrt(static_cast<double>(a.size() * b.size()) / static_cast<double>(a.size() + b.size()));
  return 1.0 - kolmogorov_cdf((en + 0.12 + 0.11 / en) * d);
}

/// Smallest and largest counts of the exact binomial acceptance region that
/// leaves at most (1 - coverage)/2 probability in each tail.
inline std::pair<std::size_t, std::size_t> binomial_band(std::size_t trials, double prob, double coverage) {
  const double tail = 0.5 * (1.0 - coverage);
  std::vector<double> pmf(trials + 1);
  for (std::size_t k = 0; k <= trials; ++k) {
    const double nk = static_cast<double>(k), nn = static_cast<double>(trials);
    pmf[k] = std::exp(std::lgamma(nn + 1) - std::lgamma(nk + 1) - std::lgamma(nn - nk + 1) + nk * std::log(prob) +
                      (nn - nk) * std::log1p(-prob));
  }
  std::size_t lo = 0;
  double below = 0.0;
  while (lo < trials && below + pmf[lo] <= tail) below += pmf[lo++];
  std::size_t hi = trials;
  double above = 0.0;
  while (hi > 0 && above + pmf[hi] <= tail) above += pmf[hi--];
  return {lo, hi};
}

/// Plain i.i.d. bootstrap of the CUSUM statistic: resample whole curves with
/// replacement and recompute the naive statistic.
inline std::vector<double> iid_bootstrap_cusum(const Matrix& y, std::size_t replicates, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, y.rows() - 1);
  std::vector<double> out;
  Matrix star(y.rows(), y.cols());
  for (std::size_t b = 0; b < replicates; ++b) {
    for (Eigen::Index t = 0; t < y.rows(); ++t) star.row(t) = y.row(pick(gen));
    const auto profile = naive_cusum_profile(star);
    out.push_back(*std::max_element(profile.begin(), profile.end()));
  }
  return out;
}

/// Brownian-bridge covariance min(u, v) - u v on G equidistant points.
inline Matrix bridge_kernel(std::size_t g) {
  Matrix k(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      const double u = static_cast<double>(i) / static_cast<double>(g - 1);
      const double v = static_cast<double>(j) / static_cast<double>(g - 1);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::min(u, v) - u * v;
    }
  return k;
}

}  // namespace oracle
