#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "logitrank/constructions.hpp"
#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/rng.hpp"
#include "logitrank/spectral.hpp"

namespace logitrank {
namespace {

std::vector<std::size_t> ranks_up_to(std::size_t n) {
  std::vector<std::size_t> r(n + 1);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

// Hand-built matrix with one future and histories {0}, {1}.
LogitMatrix single_future(const Matrix& values) {
  LogitMatrix l;
  l.alphabet_size = static_cast<std::size_t>(values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) l.histories.push_back({static_cast<Token>(i)});
  l.futures = {{}};
  for (Token z = 0; z < l.alphabet_size; ++z) l.columns.push_back({0, z});
  l.values = values;
  return l;
}

TEST(ErrorCurve, HarmonicSpectrumFrozen) {
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 / static_cast<double>(i + 1);
  const auto curve = low_rank_error_curve(s, {0, 10, 1000});
  EXPECT_DOUBLE_EQ(curve[0].relative_error, 1.0);
  EXPECT_NEAR(curve[1].relative_error, 0.2393352813548668, 1e-12);
  EXPECT_EQ(curve[2].relative_error, 0.0);
}

TEST(ErrorCurve, SlowDecayFrozen) {
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::pow(static_cast<double>(i + 1), -0.3);
  EXPECT_NEAR(low_rank_error_curve(s, {250})[0].relative_error, 0.6688409299930026, 1e-12);
}

TEST(ErrorCurve, Monotone) {
  Rng rng(1, "curve");
  std::vector<double> s(50);
  for (auto& v : s) v = std::abs(rng.normal());
  std::sort(s.rbegin(), s.rend());
  const auto curve = low_rank_error_curve(s, ranks_up_to(50));
  for (std::size_t i = 1; i < curve.size(); ++i)
    EXPECT_LE(curve[i].relative_error, curve[i - 1].relative_error);
}

TEST(PowerLaw, RecoversExponentAndConstant) {
  for (double alpha : {0.3, 0.6, 1.2}) {
    std::vector<double> s = {50.0};
    for (int i = 1; i < 200; ++i) s.push_back(2.0 * std::pow(i, -alpha));
    const PowerLawFit fit = fit_power_law(s, s.size());
    EXPECT_NEAR(fit.alpha, alpha, 1e-6);
    EXPECT_NEAR(fit.C, 2.0, 1e-6);
    EXPECT_NEAR(fit.beta, 0.0, 1e-6);
    EXPECT_EQ(fit.points, 199u);
  }
}

TEST(PowerLaw, SkipsZerosAndNeedsEightValues) {
  std::vector<double> s = {10.0};
  for (int i = 1; i < 20; ++i) s.push_back(i < 15 ? std::pow(i, -0.8) : 0.0);
  const PowerLawFit fit = fit_power_law(s, s.size());
  EXPECT_EQ(fit.skipped, 5u);
  EXPECT_EQ(fit.points, 14u);
  EXPECT_THROW(fit_power_law({3, 2, 1, 1, 1, 1, 1}, 7), ValidationError);
}

TEST(Truncate, Examples) {
  Matrix m(2, 2);
  m << 3, 0, 0, 1;
  Matrix want(2, 2);
  want << 3, 0, 0, 0;
  EXPECT_LE((truncate_rank(m, 1) - want).norm(), 1e-14);
  EXPECT_EQ(truncate_rank(m, 0).norm(), 0.0);
  EXPECT_LE((truncate_rank(m, 2) - m).norm(), 1e-14);
  EXPECT_THROW(truncate_rank(m, 3), ValidationError);
}

TEST(Truncate, EckartYoung) {
  Rng rng(2, "eckart-young");
  Matrix m(12, 9);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  const std::vector<double> s = singular_values(m);
  for (std::size_t r = 0; r <= 9; ++r) {
    double tail = 0;
    for (std::size_t i = r; i < s.size(); ++i) tail += s[i] * s[i];
    const Matrix t = truncate_rank(m, r);
    EXPECT_NEAR((m - t).norm(), std::sqrt(tail), 1e-10);
    EXPECT_LE(numerical_rank(t), r);
    if (r > 0 && r < 9) {
      // Any other rank-r matrix does no better.
      Matrix u(12, static_cast<Eigen::Index>(r)), v(static_cast<Eigen::Index>(r), 9);
      for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
      const Matrix other = u * v;
      EXPECT_GE((m - other).norm(), (m - t).norm());
    }
  }
}

TEST(Truncate, RandomizedAgreesOnLowRankInput) {
  Rng rng(3, "randomized");
  Matrix u(40, 3), v(3, 30);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  const Matrix m = u * v;
  EXPECT_LE((randomized_truncate_rank(m, 3) - m).norm(), 1e-8 * m.norm());
  EXPECT_THROW(randomized_truncate_rank(m, 31), ValidationError);
}

TEST(SingularValues, NormalizedScaling) {
  const Matrix m = Matrix::Ones(4, 9);
  EXPECT_NEAR(singular_values(m)[0], 6.0, 1e-12);
  EXPECT_NEAR(singular_values(m, true)[0], 1.0, 1e-12);
}

TEST(AvgKl, SingleCellFrozen) {
  Matrix l(2, 3);
  l << 0.3, -0.1, -0.2, 1.0, 0.5, -1.5;
  Matrix a = l;
  a(0, 1) += 0.1;
  const LogitMatrix ref = single_future(l);
  EXPECT_NEAR(avg_kl(ref, a), 0.5 * 0.0010526690909839521, 1e-15);
  EXPECT_EQ(avg_kl(ref, l), 0.0);
  EXPECT_NEAR(frobenius_kl_bound(ref, a), 0.5 * 0.01 / 2, 1e-15);
}

TEST(AvgKl, FrobeniusCeilingOnRandomPairs) {
  Rng rng(4, "frobenius");
  const IsanOracle o(random_isan(3, 3, 4, 4));
  const LogitMatrix ref = build_logit_matrix(o, all_sequences(3, 2), full_future_closure(3, 1));
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a = ref.values;
    const double scale = std::exp(rng.normal());
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] += scale * rng.normal();
    EXPECT_LE(avg_kl(ref, a), frobenius_kl_bound(ref, a) + 1e-12);
  }
}

TEST(AvgKl, ShapeMismatchRejected) {
  const LogitMatrix ref = single_future(Matrix::Zero(2, 3));
  EXPECT_THROW(avg_kl(ref, Matrix::Zero(3, 3)), ValidationError);
}

TEST(Rank1Baseline, RowsAreFutureOnlyLogits) {
  const TimeVaryingIsan m = random_isan(2, 3, 4, 5);
  const IsanOracle o(m);
  const auto f = full_future_closure(3, 1);
  const LogitMatrix ref = build_logit_matrix(o, all_sequences(3, 2), f);
  const Matrix base = rank1_baseline_matrix(ref, o);
  for (Eigen::Index i = 0; i < base.rows(); ++i)
    for (std::size_t j = 0; j < ref.cols(); ++j)
      EXPECT_EQ(base(i, static_cast<Eigen::Index>(j)),
                next_logits(m, f[ref.columns[j].future])[ref.columns[j].token]);
  EXPECT_DOUBLE_EQ(rank1_baseline(ref, o), avg_kl(ref, base));
  const IsanOracle u(uniform_isan(3, 4));
  EXPECT_EQ(rank1_baseline(build_logit_matrix(u, all_sequences(3, 2), f), u), 0.0);
}

TEST(Angles, IdenticalAndOrthogonal) {
  const Matrix e = Matrix::Identity(6, 6);
  const AngleReport same = principal_angles(e.leftCols(2), e.leftCols(2));
  for (double c : same.cosines) EXPECT_NEAR(c, 1.0, 1e-12);
  const AngleReport orth = principal_angles(e.leftCols(2), e.rightCols(2));
  for (double c : orth.cosines) EXPECT_NEAR(c, 0.0, 1e-12);
  const AngleReport mixed = principal_angles(e.leftCols(2), e.middleCols(1, 2));
  EXPECT_NEAR(mixed.cosines[0], 1.0, 1e-12);
  EXPECT_NEAR(mixed.cosines[1], 0.0, 1e-12);
  EXPECT_NEAR(mixed.mean(), 0.5, 1e-12);
}

TEST(Angles, ColumnSpaceOfSameModelAgrees) {
  const IsanOracle o(random_isan(2, 2, 5, 6));
  const LogitMatrix a = build_logit_matrix(o, all_sequences(2, 3), full_future_closure(2, 1));
  const Matrix u = column_space(a.values, 2);
  EXPECT_LE((u.transpose() * u - Matrix::Identity(2, 2)).norm(), 1e-12);
  for (double c : principal_angles(u, column_space(a.values * 3.0, 2)).cosines) EXPECT_NEAR(c, 1.0, 1e-10);
  EXPECT_THROW(column_space(a.values, 3), ValidationError);
}

TEST(Angles, RandomBaselineMatchesLineExpectation) {
  // E|<u, v>| for independent uniform unit vectors in R^10.
  std::vector<std::uint64_t> seeds(400);
  std::iota(seeds.begin(), seeds.end(), 0);
  const SubspaceBaseline b = random_subspace_baseline(10, 1, seeds);
  EXPECT_NEAR(b.mean[0], 0.2586899392477791, 0.03);
  EXPECT_LE(b.q05[0], b.q50[0]);
  EXPECT_LE(b.q50[0], b.q95[0]);
  const Matrix q = random_orthonormal_basis(10, 3, 1);
  EXPECT_LE((q.transpose() * q - Matrix::Identity(3, 3)).norm(), 1e-12);
}

}  // namespace
}  // namespace logitrank
