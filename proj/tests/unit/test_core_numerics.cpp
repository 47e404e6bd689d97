#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/parallel.hpp"
#include "logitrank/probability.hpp"
#include "logitrank/rng.hpp"
#include "logitrank/sequence.hpp"

namespace logitrank {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TEST(Rng, SameKeySameStream) {
  Rng a(42, "purpose", 3), b(42, "purpose", 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, PurposeAndIndexSeparateStreams) {
  Rng a(42, "x", 0), b(42, "y", 0), c(42, "x", 1);
  const auto va = a();
  EXPECT_NE(va, b());
  EXPECT_NE(va, c());
}

TEST(Rng, SubstreamIgnoresParentPosition) {
  Rng a(9, "p"), b(9, "p");
  for (int i = 0; i < 5; ++i) a();
  Rng sa = a.substream("child", 2), sb = b.substream("child", 2);
  EXPECT_EQ(sa(), sb());
}

TEST(Rng, UniformMoments) {
  Rng r(1, "moments");
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12, 2e-3);
}

TEST(Rng, NormalMoments) {
  Rng r(2, "normal");
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, BelowCoversRange) {
  Rng r(3, "below");
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = r.below(7);
    ASSERT_LT(x, 7u);
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_THROW(r.below(0), ValidationError);
}

TEST(HashTag, Fnv1aReference) {
  // FNV-1a 64 of "a" from the published test vectors.
  EXPECT_EQ(hash_tag("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hash_tag(""), 0xcbf29ce484222325ULL);
}

TEST(Sequence, RoundTripText) {
  const Sequence s{0, 1, 12};
  EXPECT_EQ(to_string(s), "0,1,12");
  EXPECT_EQ(parse_sequence("0, 1 ,12"), s);
  EXPECT_EQ(parse_sequence(""), Sequence{});
  EXPECT_THROW(parse_sequence("0,x"), ValidationError);
  EXPECT_THROW(parse_sequence("0,,1"), ValidationError);
}

TEST(Sequence, ClosureExamples) {
  const auto c = full_future_closure(2, 2);
  const std::vector<Sequence> expected{{}, {0}, {1}, {0, 0}, {0, 1}, {1, 0}, {1, 1}};
  EXPECT_EQ(c, expected);
  EXPECT_EQ(full_future_closure(2, 0), std::vector<Sequence>{Sequence{}});
  EXPECT_EQ(full_future_closure(3, 3).size(), 40u);
}

TEST(Sequence, BudgetExceeded) {
  EXPECT_THROW(all_sequences(3, 10, 1000), EnumerationInfeasible);
  EXPECT_THROW(full_future_closure(2, 10, 100), EnumerationInfeasible);
}

TEST(Sequence, LexicographicIndexInverse) {
  for (std::size_t i = 0; i < 27; ++i)
    EXPECT_EQ(lexicographic_index(sequence_from_index(i, 3, 3), 3), i);
  EXPECT_EQ(sequence_from_index(5, 3, 2), (Sequence{1, 0, 1}));
}

TEST(Sequence, HelpersAndChecks) {
  EXPECT_EQ(concat({0}, {1, 1}), (Sequence{0, 1, 1}));
  EXPECT_EQ(append({0}, 2), (Sequence{0, 2}));
  EXPECT_TRUE(starts_with({0, 1, 2}, {0, 1}));
  EXPECT_FALSE(starts_with({0}, {0, 1}));
  EXPECT_THROW(check_tokens({0, 3}, 3), ValidationError);
  EXPECT_THROW(Alphabet{1}.validate(), ValidationError);
}

TEST(Softmax, Examples) {
  const Vector u = softmax(vec({0, 0, 0}));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(u[i], 1.0 / 3, 1e-15);
  const Vector s = softmax(vec({5, 5, 5}));
  EXPECT_LE((s - u).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GE(softmax(vec({0, 30}))[1], 1 - 1e-12);
}

TEST(Softmax, ShiftInvariance) {
  Rng r(11, "shift");
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(5);
    for (Eigen::Index i = 0; i < 5; ++i) v[i] = 10 * r.normal();
    const double c = 100 * r.normal();
    const Vector shifted = (v.array() + c).matrix();
    EXPECT_LE((softmax(v) - softmax(shifted)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, RejectsNonFinite) {
  EXPECT_THROW(softmax(vec({0, NAN})), ValidationError);
  EXPECT_THROW(softmax(vec({0, INFINITY})), ValidationError);
}

TEST(MeanCenter, Examples) {
  const Vector c = mean_center(vec({std::log(0.5), std::log(0.25), std::log(0.25)}));
  EXPECT_NEAR(c[0], 0.46209812, 1e-4);
  EXPECT_NEAR(c[1], -0.23104906, 1e-4);
  EXPECT_NEAR(c[2], -0.23104906, 1e-4);
  const Vector z = mean_center(vec({std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3)}));
  EXPECT_LE(z.cwiseAbs().maxCoeff(), 1e-15);
  const Vector again = mean_center(c);
  EXPECT_LE((again - c).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MeanCenter, ZeroProbabilityNamesToken) {
  try {
    mean_center(vec({0.0, -INFINITY, 0.0}));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("token 1"), std::string::npos);
  }
  const Vector f = floor_log_probs(vec({0.5, 0.0, 0.5}));
  EXPECT_NEAR(f[1], std::log(1e-30), 1e-12);
}

TEST(MeanCenter, SoftmaxRoundTrip) {
  Rng r(12, "roundtrip");
  for (int trial = 0; trial < 100; ++trial) {
    Vector p(4);
    for (Eigen::Index i = 0; i < 4; ++i) p[i] = 0.01 + r.uniform();
    p /= p.sum();
    const Vector back = softmax(mean_center(p.array().log().matrix()));
    EXPECT_LE((back - p).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Divergence, TvExamples) {
  ExactDistribution u{4, 1, {0.25, 0.25, 0.25, 0.25}};
  ExactDistribution q{4, 1, {0.4, 0.2, 0.2, 0.2}};
  EXPECT_NEAR(tv_distance(u, q), 0.15, 1e-15);
  EXPECT_EQ(tv_distance(u, u), 0.0);
  ExactDistribution a{2, 1, {1.0, 0.0}}, b{2, 1, {0.0, 1.0}};
  EXPECT_NEAR(tv_distance(a, b), 1.0, 1e-15);
  ExactDistribution other{2, 2, {0.25, 0.25, 0.25, 0.25}};
  EXPECT_THROW(tv_distance(u, other), ValidationError);
}

TEST(Divergence, KlExamples) {
  EXPECT_NEAR(kl_divergence(vec({1, 0}), vec({0.5, 0.5})), std::log(2.0), 1e-15);
  EXPECT_EQ(kl_divergence(vec({0.3, 0.7}), vec({0.3, 0.7})), 0.0);
  EXPECT_THROW(kl_divergence(vec({0.5, 0.5}), vec({1, 0})), ValidationError);
}

TEST(Divergence, KlFromLogitsMatchesProbabilities) {
  Rng r(13, "kl");
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(4), b(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      a[i] = 3 * r.normal();
      b[i] = 3 * r.normal();
    }
    EXPECT_NEAR(kl_from_logits(a, b), kl_divergence(softmax(a), softmax(b)), 1e-12);
  }
}

TEST(Divergence, KlBelowHalfSquaredDistance) {
  Rng r(14, "kl-bound");
  for (int trial = 0; trial < 1000; ++trial) {
    Vector a(5), b(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      a[i] = 2 * r.normal();
      b[i] = 2 * r.normal();
    }
    EXPECT_LE(kl_from_logits(a, b), 0.5 * (a - b).squaredNorm() + 1e-12);
  }
}

TEST(Linalg, NumericalRank) {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1e-3;
  m(2, 2) = 1e-9;  // below 1e-8 relative
  EXPECT_EQ(numerical_rank(m), 2u);
  EXPECT_EQ(numerical_rank(m, 1e-10), 3u);
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 3)), 0u);
  // An external scale makes the threshold absolute.
  EXPECT_EQ(numerical_rank(m, 1e-8, 1e6), 1u);
}

TEST(Linalg, SolveRowCombinationMinimumNorm) {
  Matrix basis(3, 2);
  basis << 1, 0, 1, 0, 0, 1;  // rows 0 and 1 coincide
  Matrix target(1, 2);
  target << 2, 3;
  const Matrix x = solve_row_combination(basis, target);
  EXPECT_LE((x * basis - target).norm(), 1e-12);
  // Minimum norm splits the weight on the duplicated row.
  EXPECT_NEAR(x(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(x(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(x(0, 2), 3.0, 1e-12);
}

TEST(Linalg, RequireFinite) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = NAN;
  EXPECT_THROW(require_finite(m, "m"), ValidationError);
}

TEST(Parallel, ResultIndependentOfWorkers) {
  std::vector<double> a(100), b(100);
  parallel_for(100, 1, [&](std::size_t i) { a[i] = Rng(5, "p", i).uniform(); });
  parallel_for(100, 4, [&](std::size_t i) { b[i] = Rng(5, "p", i).uniform(); });
  EXPECT_EQ(a, b);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw ValidationError("boom");
                            }),
               ValidationError);
}

}  // namespace
}  // namespace logitrank
