#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fsbcp/dgp.hpp"
#include "fsbcp/funspace.hpp"
#include "oracles.hpp"

using namespace fsbcp;

namespace {

FunctionSeries bridges(std::size_t n, std::size_t g, std::uint64_t seed) {
  const Grid grid = make_grid(g);
  RngStream rng(seed);
  RowMatrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g));
  for (Eigen::Index t = 0; t < v.rows(); ++t) v.row(t) = brownian_bridge(grid, rng).transpose();
  return {grid, v};
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Grid, ThreePoints) {
  const Grid g = make_grid(3);
  EXPECT_DOUBLE_EQ(g.points()[1], 0.5);
  EXPECT_DOUBLE_EQ(g.weights()[0], 0.25);
  EXPECT_DOUBLE_EQ(g.weights()[1], 0.5);
  EXPECT_DOUBLE_EQ(g.weights()[2], 0.25);
}

TEST(Grid, WeightsSumToOne) {
  for (std::size_t n : {3u, 4u, 101u, 1000u}) {
    const Grid g = make_grid(n);
    EXPECT_NEAR(g.weights().sum(), 1.0, 1e-12);
    EXPECT_GT(g.weights().minCoeff(), 0.0);
  }
}

TEST(Grid, TooFewPoints) { EXPECT_THROW((void)make_grid(2), InvalidArgument); }

TEST(Grid, IrregularPoints) {
  const Grid g = Grid::from_points({0.0, 0.1, 0.5, 1.0});
  EXPECT_NEAR(g.weights().sum(), 1.0, 1e-12);
  EXPECT_NEAR(g.weights()[1], 0.25, 1e-15);
  EXPECT_THROW((void)Grid::from_points({0.0, 0.5, 0.5, 1.0}), InvalidArgument);
  EXPECT_THROW((void)Grid::from_points({0.1, 0.5, 1.0}), InvalidArgument);
}

TEST(InnerProduct, Constants) {
  const Grid g = make_grid(11);
  const Vector one = Vector::Ones(11);
  EXPECT_NEAR(inner_product(one, one, g), 1.0, 1e-14);
  EXPECT_EQ(inner_product(one, Vector::Zero(11), g), 0.0);
}

TEST(InnerProduct, SineNormMatchesIntegral) {
  const Grid g = make_grid(101);
  const Vector f = (std::numbers::pi * g.points().array()).sin() * std::sqrt(2.0);
  EXPECT_NEAR(inner_product(f, f, g), 1.0, 1e-3);
}

TEST(InnerProduct, LengthMismatch) {
  const Grid g = make_grid(5);
  EXPECT_THROW((void)inner_product(Vector::Ones(4), Vector::Ones(5), g), InvalidArgument);
}

TEST(SampleMean, TwoRows) {
  RowMatrix v(2, 3);
  v << 0, 0, 0, 2, 2, 2;
  const FunctionSeries s(make_grid(3), v);
  EXPECT_TRUE(sample_mean(s).isApprox(Vector::Ones(3)));
}

TEST(SampleMean, SingleRow) {
  RowMatrix v(1, 3);
  v << 1, -2, 5;
  const FunctionSeries s(make_grid(3), v);
  EXPECT_EQ(sample_mean(s), Vector(v.row(0).transpose()));
}

TEST(SampleMean, BridgeMeanIsSmall) {
  const FunctionSeries s = bridges(1000, 51, 3);
  EXPECT_LE(sample_mean(s).cwiseAbs().maxCoeff(), 0.1);
}

TEST(FunctionSeries, RejectsBadShapes) {
  EXPECT_THROW(FunctionSeries(make_grid(3), RowMatrix::Zero(2, 4)), InvalidArgument);
  RowMatrix v = RowMatrix::Zero(2, 3);
  v(1, 1) = std::nan("");
  EXPECT_THROW(FunctionSeries(make_grid(3), v), InvalidArgument);
}

TEST(CovOperator, ConstantSeriesHasZeroKernel) {
  const FunctionSeries s(make_grid(7), RowMatrix::Constant(10, 7, 3.5));
  EXPECT_EQ(max_abs(cov_operator(s).kernel), 0.0);
}

TEST(CovOperator, AlternatingSigns) {
  const Grid g = make_grid(9);
  const Vector f = g.points().array().square() + 1.0;
  RowMatrix v(6, 9);
  for (Eigen::Index t = 0; t < 6; ++t) v.row(t) = (t % 2 ? -1.0 : 1.0) * f.transpose();
  const CovOperator op = cov_operator(FunctionSeries(g, v));
  EXPECT_LE(max_abs(op.kernel - f * f.transpose()), 1e-14);
}

TEST(CovOperator, NeedsTwoCurves) {
  EXPECT_THROW((void)cov_operator(FunctionSeries(make_grid(3), RowMatrix::Zero(1, 3))), InsufficientData);
}

TEST(CovOperator, BridgeKernel) {
  const FunctionSeries s = bridges(5000, 21, 11);
  EXPECT_LE(max_abs(cov_operator(s).kernel - oracle::bridge_kernel(21)), 0.05);
}

TEST(Eigen, BridgeSpectrumOracle) {
  const Grid g = make_grid(201);
  const EigenSystem eig = eigendecompose({g, oracle::bridge_kernel(201)}, 5);
  for (std::size_t k = 1; k <= 5; ++k) {
    const double exact = 1.0 / std::pow(static_cast<double>(k) * std::numbers::pi, 2);
    EXPECT_NEAR(eig.eigenvalues[static_cast<Eigen::Index>(k - 1)] / exact, 1.0, 0.01) << "k=" << k;
    // Eigenfunctions agree with sqrt(2) sin(k pi x) up to sign.
    const Vector s = std::sqrt(2.0) * (static_cast<double>(k) * std::numbers::pi * g.points().array()).sin();
    const double overlap = std::abs(inner_product(s, eig.eigenfunction(k - 1), g));
    EXPECT_NEAR(overlap, 1.0, 1e-3) << "k=" << k;
  }
}

TEST(Eigen, RankOne) {
  const Grid g = make_grid(51);
  Vector f = (2.0 * std::numbers::pi * g.points().array()).cos();
  f /= l2_norm(f, g);
  const EigenSystem eig = eigendecompose({g, f * f.transpose()}, 2);
  EXPECT_NEAR(eig.spectrum[0], 1.0, 1e-12);
  EXPECT_NEAR(eig.spectrum[1], 0.0, 1e-12);
  EXPECT_EQ(eig.m(), 1u);
  EXPECT_FALSE(eig.diagnostics.empty());
}

TEST(Eigen, Preconditions) {
  const Grid g = make_grid(5);
  Matrix k = Matrix::Identity(5, 5);
  EXPECT_THROW((void)eigendecompose({g, k}, 6), InvalidArgument);
  EXPECT_THROW((void)eigendecompose({g, k}, 0), InvalidArgument);
  k(0, 1) = 1.0;
  EXPECT_THROW((void)eigendecompose({g, k}, 2), InvalidArgument);
}

TEST(EigenProperties, OrthonormalityTraceAndSign) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const FunctionSeries s = bridges(80, 41, seed);
    const CovOperator op = cov_operator(s);
    const EigenSystem eig = eigendecompose(op, 8);
    ASSERT_EQ(eig.m(), 8u);
    const Matrix gram = eig.eigenfunctions.transpose() * s.grid.weights().asDiagonal() * eig.eigenfunctions;
    EXPECT_LE(max_abs(gram - Matrix::Identity(8, 8)), 1e-8);
    EXPECT_NEAR(eig.spectrum.sum(), eig.trace, 1e-8);
    for (Eigen::Index j = 0; j < 8; ++j) {
      EXPECT_GE(eig.spacings[j], 0.0);
      if (j > 0) {
        EXPECT_GE(eig.eigenvalues[j - 1], eig.eigenvalues[j]);
      }
      Eigen::Index arg;
      eig.eigenfunctions.col(j).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(eig.eigenfunctions(arg, j), 0.0);
    }
    const EigenSystem again = eigendecompose(op, 8);
    EXPECT_EQ(again.eigenfunctions, eig.eigenfunctions);
  }
}

TEST(Scores, ConstantSeriesGivesZeroScores) {
  const FunctionSeries noisy = bridges(30, 21, 2);
  const EigenSystem eig = eigendecompose(cov_operator(noisy), 3);
  const FunctionSeries flat(noisy.grid, RowMatrix::Constant(10, 21, -1.25));
  EXPECT_LE(max_abs(project_scores(flat, eig).scores), 1e-12);
}

TEST(Scores, SpanOfLeadingEigenfunction) {
  const FunctionSeries noisy = bridges(30, 21, 4);
  const EigenSystem eig = eigendecompose(cov_operator(noisy), 3);
  const Vector base = noisy.grid.points().array().square();
  Vector c(12);
  RowMatrix v(12, 21);
  for (Eigen::Index t = 0; t < 12; ++t) {
    c[t] = std::sin(static_cast<double>(t));
    v.row(t) = (base + c[t] * eig.eigenfunction(0)).transpose();
  }
  const ScoreSeries sc = project_scores(FunctionSeries(noisy.grid, v), eig);
  const Vector expected = c.array() - c.mean();
  EXPECT_LE((sc.scores.col(0) - expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(max_abs(sc.scores.rightCols(2)), 1e-8);
}

TEST(Scores, ColumnMeansZeroAndVarianceMatchesEigenvalues) {
  const FunctionSeries s = bridges(4000, 31, 8);
  const EigenSystem eig = eigendecompose(cov_operator(s), 4);
  const ScoreSeries sc = project_scores(s, eig);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LE(std::abs(sc.scores.col(j).mean()), 1e-10);
    const double var = sc.scores.col(j).squaredNorm() / static_cast<double>(s.n());
    const Vector wv = s.grid.weights().cwiseProduct(eig.eigenfunction(static_cast<std::size_t>(j)));
    const double quad = wv.dot(cov_operator(s).kernel * wv);
    EXPECT_NEAR(var / quad, 1.0, 0.02);
    EXPECT_NEAR(var / eig.eigenvalues[j], 1.0, 0.02);
  }
}

TEST(Scores, GridMismatch) {
  const FunctionSeries s = bridges(10, 21, 1);
  const EigenSystem eig = eigendecompose(cov_operator(s), 2);
  EXPECT_THROW((void)project_scores(bridges(10, 11, 1), eig), InvalidArgument);
  EXPECT_THROW((void)remainders(bridges(10, 11, 1), eig), InvalidArgument);
}

TEST(Remainders, FullRankLeavesNothing) {
  const FunctionSeries s = bridges(60, 21, 5);
  const EigenSystem eig = eigendecompose(cov_operator(s), 21);
  EXPECT_LE(max_abs(remainders(s, eig).values), 1e-8);
}

TEST(Remainders, SeriesInLeadingSpan) {
  const Grid g = make_grid(21);
  Vector f = (std::numbers::pi * g.points().array()).sin();
  RowMatrix v(15, 21);
  for (Eigen::Index t = 0; t < 15; ++t) v.row(t) = (0.3 * t - 1.0) * f.transpose();
  const FunctionSeries s(g, v);
  const EigenSystem eig = eigendecompose(cov_operator(s), 1);
  EXPECT_LE(max_abs(remainders(s, eig).values), 1e-10);
}

TEST(Remainders, DecompositionAndPoolMean) {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const FunctionSeries s = bridges(50, 31, seed);
    const EigenSystem eig = eigendecompose(cov_operator(s), 3);
    const ScoreSeries sc = project_scores(s, eig);
    const RowMatrix raw = raw_remainders(s, eig, sc);
    const RowMatrix rebuilt = sc.scores * eig.eigenfunctions.transpose() + raw;
    EXPECT_LE(max_abs(rebuilt - centered_values(s)), 1e-8);
    EXPECT_LE(remainders(s, eig).values.colwise().mean().cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Remainders, EnergyDecreasesInM) {
  const FunctionSeries s = bridges(70, 31, 21);
  const EigenSystem full = eigendecompose(cov_operator(s), 31);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= 10; ++m) {
    const RowMatrix u = remainders(s, full.truncated(m)).values;
    double energy = 0.0;
    for (Eigen::Index t = 0; t < u.rows(); ++t) energy += u.row(t).cwiseAbs2().dot(s.grid.weights().transpose());
    EXPECT_LE(energy, previous + 1e-12);
    previous = energy;
  }
}
