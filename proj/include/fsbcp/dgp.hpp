#pragma once

// Data-generating processes for the simulation studies: Brownian bridges,
// FAR(1) with the s*t kernel, FMA(1) on a 21-term Fourier basis, and
// mean-change injection.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "fsbcp/errors.hpp"
#include "fsbcp/funspace.hpp"
#include "fsbcp/rng.hpp"

namespace fsbcp {

enum class DgpVariant { far1_bridge, far1_squared_bridge, fma1 };

[[nodiscard]] inline std::string_view to_string(DgpVariant v) {
  switch (v) {
    case DgpVariant::far1_bridge: return "far1-bridge";
    case DgpVariant::far1_squared_bridge: return "far1-sqbridge";
    case DgpVariant::fma1: return "fma1";
  }
  return "unknown";
}

[[nodiscard]] inline DgpVariant parse_dgp_variant(std::string_view s) {
  if (s == "far1-bridge") return DgpVariant::far1_bridge;
  if (s == "far1-sqbridge") return DgpVariant::far1_squared_bridge;
  if (s == "fma1") return DgpVariant::fma1;
  throw InvalidArgument("unknown DGP '" + std::string(s) + "' (expected far1-bridge, far1-sqbridge or fma1)");
}

/// Mean change after k_star: Y_i = X_i + scale * jump for i > k_star.
struct ChangeSpec {
  std::size_t k_star = 1;
  double jump = 0.0;  ///< constant jump function
  double r = 0.0;     ///< local alternative exponent; scale = n^{-r}
};

struct DgpSpec {
  DgpVariant variant = DgpVariant::far1_bridge;
  double C = 0.245;  ///< FAR(1) kernel strength; unused for fma1
  std::size_t n = 100;
  Grid grid = make_grid(101);
  std::size_t burn_in = 100;
  std::optional<ChangeSpec> change;
};

/// Standard Brownian bridge on the grid: cumulative Gaussian increments with
/// variance equal to the grid spacing, then B(t) = W(t) - t W(1).
[[nodiscard]] inline Vector brownian_bridge(const Grid& grid, RngStream& rng) {
  const auto g = static_cast<Eigen::Index>(grid.size());
  const Vector& x = grid.points();
  Vector w(g);
  w[0] = 0.0;
  for (Eigen::Index i = 1; i < g; ++i) w[i] = w[i - 1] + std::sqrt(x[i] - x[i - 1]) * rng.normal();
  const double end = w[g - 1];
  for (Eigen::Index i = 0; i < g; ++i) w[i] -= x[i] * end;
  w[0] = 0.0;
  w[g - 1] = 0.0;
  return w;
}

/// One noiseless FAR(1) step: C * t * <s, X(s)>.
[[nodiscard]] inline Vector far1_drive(const Vector& previous, double C, const Grid& grid) {
  const Vector& t = grid.points();
  return (C * inner_product(t, previous, grid)) * t;
}

[[nodiscard]] inline FunctionSeries far1(const DgpSpec& spec, RngStream& rng) {
  if (spec.variant == DgpVariant::fma1) throw InvalidArgument("far1: spec is not a FAR(1) variant");
  if (spec.n < 2) throw InvalidArgument("far1: n must be at least 2");
  const auto g = static_cast<Eigen::Index>(spec.grid.size());
  RowMatrix out(static_cast<Eigen::Index>(spec.n), g);
  Vector x = Vector::Zero(g);
  const std::size_t total = spec.burn_in + spec.n;
  for (std::size_t i = 0; i < total; ++i) {
    Vector innovation;
    if (spec.variant == DgpVariant::far1_bridge) {
      innovation = brownian_bridge(spec.grid, rng);
    } else {
      const Vector eps = brownian_bridge(spec.grid, rng);
      const Vector eta = brownian_bridge(spec.grid, rng);
      innovation = eps.cwiseAbs2() + eta.cwiseAbs2();
    }
    x = far1_drive(x, spec.C, spec.grid) + innovation;
    if (i >= spec.burn_in) out.row(static_cast<Eigen::Index>(i - spec.burn_in)) = x.transpose();
  }
  return {spec.grid, std::move(out)};
}

inline constexpr Eigen::Index kFourierTerms = 21;

/// Columns e_1 = 1, e_{2k} = sqrt2 sin(2 pi k t), e_{2k+1} = sqrt2 cos(2 pi k t), k = 1..10.
[[nodiscard]] inline Matrix fourier_basis21(const Grid& grid) {
  const auto g = static_cast<Eigen::Index>(grid.size());
  Matrix basis(g, kFourierTerms);
  const Vector& t = grid.points();
  for (Eigen::Index i = 0; i < g; ++i) {
    basis(i, 0) = 1.0;
    for (Eigen::Index k = 1; k <= 10; ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(k) * t[i];
      basis(i, 2 * k - 1) = std::numbers::sqrt2 * std::sin(arg);
      basis(i, 2 * k) = std::numbers::sqrt2 * std::cos(arg);
    }
  }
  return basis;
}

/// Largest singular value via power iteration on A^T A.
[[nodiscard]] inline double spectral_norm(const Matrix& a, int max_iter = 500, double tol = 1e-12) {
  const Matrix gram = a.transpose() * a;
  Vector v = Vector::Ones(gram.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double estimate = next.dot(gram * next);
    v = std::move(next);
    if (std::abs(estimate - lambda) <= tol * std::max(1.0, estimate)) {
      lambda = estimate;
      break;
    }
    lambda = estimate;
  }
  return std::sqrt(std::max(0.0, lambda));
}

/// FMA(1) draw with its ingredients exposed for inspection.
struct FmaSample {
  FunctionSeries series;
  Matrix A;             ///< normalized coefficient matrix, spectral norm 1
  Matrix coefficients;  ///< n x 21 Fourier coefficients Z_t
};

[[nodiscard]] inline FmaSample fma1_sample(const DgpSpec& spec, RngStream& rng) {
  if (spec.variant != DgpVariant::fma1) throw InvalidArgument("fma1: spec is not the FMA(1) variant");
  if (spec.n < 2) throw InvalidArgument("fma1: n must be at least 2");
  constexpr Eigen::Index d = kFourierTerms;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      a(i, j) = rng.normal() / std::sqrt(static_cast<double>((i + 1) * (j + 1)));
  a /= spectral_norm(a);

  Vector sd(d);
  for (Eigen::Index i = 0; i < d; ++i) sd[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
  auto draw = [&] {
    Vector e(d);
    for (Eigen::Index i = 0; i < d; ++i) e[i] = sd[i] * rng.normal();
    return e;
  };

  const auto n = static_cast<Eigen::Index>(spec.n);
  Matrix z(n, d);
  Vector previous = draw();
  for (Eigen::Index t = 0; t < n; ++t) {
    Vector current = draw();
    z.row(t) = (current + a * previous).transpose();
    previous = std::move(current);
  }
  RowMatrix values = z * fourier_basis21(spec.grid).transpose();
  return {FunctionSeries(spec.grid, std::move(values)), std::move(a), std::move(z)};
}

[[nodiscard]] inline FunctionSeries fma1(const DgpSpec& spec, RngStream& rng) {
  return fma1_sample(spec, rng).series;
}

[[nodiscard]] inline FunctionSeries inject_change(const FunctionSeries& series, std::size_t k_star,
                                                  const Vector& jump) {
  if (k_star < 1 || k_star >= series.n())
    throw InvalidArgument("inject_change: k_star must lie in [1, n-1]");
  if (static_cast<std::size_t>(jump.size()) != series.grid_size())
    throw InvalidArgument("inject_change: jump length does not match grid");
  FunctionSeries out = series;
  const auto tail = static_cast<Eigen::Index>(series.n() - k_star);
  out.values.bottomRows(tail).rowwise() += jump.transpose();
  return out;
}

[[nodiscard]] inline FunctionSeries inject_change(const FunctionSeries& series, std::size_t k_star, double jump) {
  return inject_change(series, k_star, Vector::Constant(static_cast<Eigen::Index>(series.grid_size()), jump));
}

/// Draws from the configured process and applies the change, if any.
[[nodiscard]] inline FunctionSeries simulate(const DgpSpec& spec, RngStream& rng) {
  FunctionSeries series = spec.variant == DgpVariant::fma1 ? fma1(spec, rng) : far1(spec, rng);
  if (spec.change) {
    const double scale = std::pow(static_cast<double>(spec.n), -spec.change->r);
    series = inject_change(series, spec.change->k_star, scale * spec.change->jump);
  }
  return series;
}

}  // namespace fsbcp
