#pragma once

// Vector autoregressive sieve on score series: autocovariances, multivariate
// Yule-Walker fits, residual pools, and the (m, p) tuning rules.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"

namespace fsbcp {

/// Gamma(h) = (n-h)^{-1} sum_t xi_{t+h} xi_t^T for h = 0..h_max.
struct AutocovSet {
  std::vector<Matrix> lags;
  std::size_t n = 0;

  [[nodiscard]] std::size_t h_max() const noexcept { return lags.empty() ? 0 : lags.size() - 1; }
  [[nodiscard]] std::size_t dim() const noexcept {
    return lags.empty() ? 0 : static_cast<std::size_t>(lags.front().rows());
  }

  /// Gamma(h) for negative h via Gamma(-h) = Gamma(h)^T.
  [[nodiscard]] Matrix at(long h) const {
    if (h >= 0) return lags.at(static_cast<std::size_t>(h));
    return lags.at(static_cast<std::size_t>(-h)).transpose();
  }
};

[[nodiscard]] inline AutocovSet autocovariances(const Matrix& scores, std::size_t h_max) {
  const auto n = static_cast<std::size_t>(scores.rows());
  if (h_max >= n) throw InvalidArgument("autocovariances: h_max must be smaller than n");
  AutocovSet out;
  out.n = n;
  out.lags.reserve(h_max + 1);
  for (std::size_t h = 0; h <= h_max; ++h) {
    const auto len = static_cast<Eigen::Index>(n - h);
    Matrix gamma = scores.bottomRows(len).transpose() * scores.topRows(len);
    gamma /= static_cast<double>(n - h);
    if (h == 0) gamma = 0.5 * (gamma + gamma.transpose()).eval();
    out.lags.push_back(std::move(gamma));
  }
  return out;
}

[[nodiscard]] inline AutocovSet autocovariances(const ScoreSeries& scores, std::size_t h_max) {
  return autocovariances(scores.scores, h_max);
}

/// Fitted VAR(p) on m-dimensional scores.
struct VarFit {
  std::size_t p = 0;
  std::vector<Matrix> coefficients;  ///< A_1..A_p, each m x m
  Matrix sigma_e;                    ///< innovation covariance
  Matrix residuals;                  ///< centered residual pool, (n-p) x m; filled by with_residuals
  double spectral_radius = 0.0;
  bool ridge_applied = false;
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t m() const noexcept {
    return static_cast<std::size_t>(sigma_e.rows());
  }
};

/// Spectral radius of the (m p) x (m p) companion matrix F by the power
/// method on its repeated squares: rho = lim ||F^k||^{1/k} along k = 2^i,
/// with each square renormalized to unit Frobenius norm. Unlike power
/// iteration on a vector this also converges quickly when the dominant
/// eigenvalues form a complex-conjugate pair.
[[nodiscard]] inline double companion_spectral_radius(const std::vector<Matrix>& coefficients,
                                                      int max_iter = 200, double tol = 1e-10) {
  if (coefficients.empty()) return 0.0;
  const Eigen::Index m = coefficients.front().rows();
  const Eigen::Index dim = m * static_cast<Eigen::Index>(coefficients.size());
  Matrix power = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < coefficients.size(); ++j)
    power.block(0, static_cast<Eigen::Index>(j) * m, m, m) = coefficients[j];
  if (dim > m) power.block(m, 0, dim - m, dim - m).setIdentity();

  double norm = power.norm();
  if (norm == 0.0 || !std::isfinite(norm)) return norm;
  double log_norm = std::log(norm);  // log ||F^(2^i)||
  power /= norm;
  double exponent = 1.0;              // 2^i
  double previous = std::exp(log_norm);
  for (int it = 0; it < max_iter; ++it) {
    power = (power * power).eval();
    norm = power.norm();
    if (norm == 0.0) return 0.0;
    power /= norm;
    log_norm = 2.0 * log_norm + std::log(norm);
    exponent *= 2.0;
    const double estimate = std::exp(log_norm / exponent);
    if (std::abs(estimate - previous) < tol) return estimate;
    previous = estimate;
  }
  return previous;
}

[[nodiscard]] inline double companion_spectral_radius(const VarFit& fit) {
  return companion_spectral_radius(fit.coefficients);
}

/// Multivariate Yule-Walker: solves sum_j A_j Gamma(k-j) = Gamma(k), k = 1..p,
/// through the symmetric block-Toeplitz system. An ill-conditioned system is
/// ridge-regularized with 1e-8 trace(Gamma(0))/m and flagged; an unstable or
/// non-PSD result is a FitFailure.
[[nodiscard]] inline VarFit yule_walker(const AutocovSet& acov, std::size_t p) {
  if (p < 1) throw InvalidArgument("yule_walker: p must be at least 1");
  if (p > acov.h_max()) throw InvalidArgument("yule_walker: p exceeds available autocovariance lags");
  const auto m = static_cast<Eigen::Index>(acov.dim());
  const auto pp = static_cast<Eigen::Index>(p);
  const Matrix& gamma0 = acov.lags[0];

  VarFit fit;
  fit.p = p;

  const double trace0 = gamma0.trace();
  if (!(trace0 > 0.0)) {
    fit.coefficients.assign(p, Matrix::Zero(m, m));
    fit.sigma_e = Matrix::Zero(m, m);
    fit.diagnostics.push_back("zero autocovariance: coefficients set to zero");
    return fit;
  }

  Matrix toeplitz(m * pp, m * pp);
  Matrix rhs(m * pp, m);
  for (Eigen::Index j = 0; j < pp; ++j) {
    for (Eigen::Index k = 0; k < pp; ++k) toeplitz.block(j * m, k * m, m, m) = acov.at(k - j);
    rhs.block(j * m, 0, m, m) = acov.lags[static_cast<std::size_t>(j + 1)].transpose();
  }
  toeplitz = 0.5 * (toeplitz + toeplitz.transpose()).eval();

  Eigen::PartialPivLU<Matrix> lu(toeplitz);
  if (!(lu.rcond() > 1e-12)) {
    const double ridge = 1e-8 * trace0 / static_cast<double>(m);
    toeplitz.diagonal().array() += ridge;
    lu.compute(toeplitz);
    fit.ridge_applied = true;
    fit.diagnostics.push_back("singular block-Toeplitz system: ridge " + std::to_string(ridge) + " applied");
    if (!(lu.rcond() > 1e-15)) throw FitFailure("yule_walker: block-Toeplitz system is singular");
  }
  // T X^T = R^T with X = [A_1 ... A_p].
  const Matrix stacked = lu.solve(rhs).transpose();
  if (!stacked.allFinite()) throw FitFailure("yule_walker: non-finite coefficients");

  fit.coefficients.reserve(p);
  Matrix sigma = gamma0;
  for (Eigen::Index j = 0; j < pp; ++j) {
    fit.coefficients.push_back(stacked.block(0, j * m, m, m));
    sigma -= fit.coefficients.back() * acov.lags[static_cast<std::size_t>(j + 1)].transpose();
  }
  fit.sigma_e = 0.5 * (sigma + sigma.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> sigma_eig(fit.sigma_e, Eigen::EigenvaluesOnly);
  if (sigma_eig.eigenvalues().minCoeff() < -1e-8 * std::abs(fit.sigma_e.trace()) / static_cast<double>(m))
    throw FitFailure("yule_walker: innovation covariance is not positive semi-definite");

  fit.spectral_radius = companion_spectral_radius(fit.coefficients);
  if (!(fit.spectral_radius < 1.0))
    throw FitFailure("yule_walker: fitted VAR is not stable (companion spectral radius " +
                     std::to_string(fit.spectral_radius) + ")");
  return fit;
}

/// Centered residual pool e_t - mean(e), t = p+1..n, as an (n-p) x m matrix.
[[nodiscard]] inline Matrix residuals(const Matrix& scores, const VarFit& fit) {
  const auto n = scores.rows();
  const auto p = static_cast<Eigen::Index>(fit.p);
  if (n <= p) throw InsufficientData("residuals: need more observations than the VAR order");
  const Eigen::Index len = n - p;
  Matrix out = scores.bottomRows(len);
  for (Eigen::Index j = 1; j <= p; ++j)
    out.noalias() -= scores.middleRows(p - j, len) * fit.coefficients[static_cast<std::size_t>(j - 1)].transpose();
  out.rowwise() -= out.colwise().mean();
  return out;
}

[[nodiscard]] inline Matrix residuals(const ScoreSeries& scores, const VarFit& fit) {
  return residuals(scores.scores, fit);
}

/// Yule-Walker fit of order p with its residual pool attached.
[[nodiscard]] inline VarFit fit_var(const Matrix& scores, std::size_t p) {
  VarFit fit = yule_walker(autocovariances(scores, p), p);
  fit.residuals = residuals(scores, fit);
  return fit;
}

// Rate guards for the tuning rules.

/// floor(n^{1/3}), computed in integers.
[[nodiscard]] inline std::size_t cube_root_floor(std::size_t n) {
  std::size_t k = 0;
  while ((k + 1) * (k + 1) * (k + 1) <= n) ++k;
  return k;
}

/// ceil(n^{1/4}), computed in integers.
[[nodiscard]] inline std::size_t fourth_root_ceil(std::size_t n) {
  std::size_t k = 0;
  while (k * k * k * k < n) ++k;
  return k;
}

/// ceil(n^{1/3}), computed in integers.
[[nodiscard]] inline std::size_t cube_root_ceil(std::size_t n) {
  std::size_t k = 0;
  while (k * k * k < n) ++k;
  return k;
}

/// Smallest m whose explained fraction reaches `threshold`, capped at the
/// degenerate-spectrum cutoff and, when n is given, at floor(n^{1/3}).
[[nodiscard]] inline std::size_t select_m(const EigenSystem& eig, double threshold,
                                          std::optional<std::size_t> n = std::nullopt) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("select_m: threshold must lie in (0, 1)");
  const Vector& spectrum = eig.spectrum.size() > 0 ? eig.spectrum : eig.eigenvalues;
  const double lead = spectrum.size() > 0 ? spectrum[0] : 0.0;
  std::size_t cap = 0;
  for (Eigen::Index j = 0; j < spectrum.size(); ++j)
    if (lead > 0.0 && spectrum[j] >= 1e-12 * lead) cap = static_cast<std::size_t>(j) + 1;
  cap = std::max<std::size_t>(cap, 1);
  if (n) cap = std::min(cap, std::max<std::size_t>(1, cube_root_floor(*n)));

  const double total = eig.trace > 0.0 ? eig.trace : spectrum.sum();
  if (!(total > 0.0)) return 1;
  double cumulative = 0.0;
  for (std::size_t j = 0; j < cap; ++j) {
    cumulative += spectrum[static_cast<Eigen::Index>(j)];
    if (cumulative / total >= threshold) return j + 1;
  }
  return cap;
}

/// Default maximal sieve order ceil(n^{1/4}) + 2, reduced until p m < n/2.
[[nodiscard]] inline std::size_t default_p_max(std::size_t n, std::size_t m) {
  std::size_t p_max = fourth_root_ceil(n) + 2;
  while (p_max > 1 && 2 * p_max * m >= n) --p_max;
  return p_max;
}

/// Multivariate corrected AIC of a fit on n observations.
[[nodiscard]] inline double aicc(const VarFit& fit, std::size_t n) {
  const auto nd = static_cast<double>(n);
  const auto m = static_cast<double>(fit.m());
  const auto k = static_cast<double>(fit.p) * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(fit.sigma_e, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  const double log_det = ev.array().log().sum();
  const double denom = nd - k - m - 1.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return nd * log_det + nd * m * (nd + k) / denom;
}

struct OrderSelection {
  std::size_t p = 1;
  std::vector<double> criterion;  ///< AICc(p) for p = 1..p_max; +inf for failed fits
};

/// Minimizes AICc over p = 1..p_max on the first m score columns; ties go to
/// the smaller order.
[[nodiscard]] inline OrderSelection select_p_trace(const Matrix& scores, std::size_t m, std::size_t p_max) {
  const auto n = static_cast<std::size_t>(scores.rows());
  if (m < 1 || m > static_cast<std::size_t>(scores.cols())) throw InvalidArgument("select_p: m out of range");
  if (p_max < 1) throw InvalidArgument("select_p: p_max must be at least 1");
  if (2 * p_max * m >= n) throw InvalidArgument("select_p: p_max * m must be below n/2");
  const Matrix sub = scores.leftCols(static_cast<Eigen::Index>(m));
  const AutocovSet acov = autocovariances(sub, p_max);

  OrderSelection out;
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t p = 1; p <= p_max; ++p) {
    double value = std::numeric_limits<double>::infinity();
    try {
      value = aicc(yule_walker(acov, p), n);
      any = true;
    } catch (const FitFailure&) {
    }
    out.criterion.push_back(value);
    if (value < best) {
      best = value;
      out.p = p;
    }
  }
  if (!any) throw FitFailure("select_p: every candidate order failed to fit");
  return out;
}

[[nodiscard]] inline std::size_t select_p(const ScoreSeries& scores, std::size_t m, std::size_t p_max) {
  return select_p_trace(scores.scores, m, p_max).p;
}

/// Resolved FSB tuning with the diagnostics behind it.
struct TuningChoice {
  std::size_t m = 1;
  std::size_t p = 1;
  std::string m_method = "fixed";
  std::string p_method = "fixed";
  double explained_fraction = 0.0;
  std::vector<double> criterion;
};

}  // namespace fsbcp
