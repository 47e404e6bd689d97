#include <algorithm>
#include <mutex>
#include <set>

#include <gtest/gtest.h>

#include "logitrank/constructions.hpp"
#include "logitrank/error.hpp"
#include "logitrank/lingen.hpp"

namespace logitrank {
namespace {

// Records every prefix it is asked about.
class RecordingOracle final : public LogitOracle {
 public:
  explicit RecordingOracle(const LogitOracle& inner) : inner_(inner) {}
  std::size_t alphabet_size() const override { return inner_.alphabet_size(); }
  std::size_t horizon() const override { return inner_.horizon(); }
  LogitVector query(const Sequence& prefix) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    seen_.insert(prefix);
    return inner_.query(prefix);
  }
  std::set<Sequence> seen() const { return seen_; }

 private:
  const LogitOracle& inner_;
  mutable std::mutex mutex_;
  mutable std::set<Sequence> seen_;
};

std::vector<Sequence> without(std::vector<Sequence> all, const Sequence& s) {
  all.erase(std::remove(all.begin(), all.end(), s), all.end());
  return all;
}

TEST(FitCoefficients, OneHotWhenTargetIsABasisRow) {
  const IsanOracle o(random_isan(2, 2, 6, 1));
  const auto h = all_sequences(2, 2);
  const LinGenCoefficients c =
      fit_lingen(o, h, full_future_closure(2, 2), {1, 0}, ColumnSelector::all(), 1e-12);
  EXPECT_LE(c.fit_residual, 1e-6);
}

TEST(FitCoefficients, ColumnMismatchRejected) {
  const IsanOracle o(random_isan(2, 2, 4, 1));
  const LogitMatrix a = build_logit_matrix(o, all_sequences(2, 1), {{}});
  const LogitMatrix b = build_logit_matrix(o, {{0, 1}}, {{}, {0}});
  EXPECT_THROW(fit_coefficients(a, b), ValidationError);
}

TEST(FitCoefficients, RidgeShrinksTowardZero) {
  const IsanOracle o(random_isan(3, 2, 6, 2));
  const auto h = all_sequences(2, 3);
  const auto f = full_future_closure(2, 2);
  const double n0 = fit_lingen(o, h, f, {0, 1, 1}).v.norm();
  const double n1 = fit_lingen(o, h, f, {0, 1, 1}, ColumnSelector::all(), 1.0).v.norm();
  const double n2 = fit_lingen(o, h, f, {0, 1, 1}, ColumnSelector::all(), 1e6).v.norm();
  EXPECT_LE(n1, n0 + 1e-12);
  EXPECT_LE(n2, n1);
  EXPECT_LE(n2, 1e-3);
  const double tiny = fit_lingen(o, h, f, {0, 1, 1}, ColumnSelector::all(), 1e-12).v.norm();
  EXPECT_NEAR(tiny, n0, 1e-4 * n0);
}

TEST(LinGen, OneHotWeightsReproduceTheModel) {
  const IsanOracle o(random_isan(2, 3, 6, 3));
  const std::vector<Sequence> h = {{0, 1}, {2, 2}, {1, 0}};
  LinGenCoefficients c;
  c.target = {2, 2};
  c.v = Vector::Zero(3);
  c.v[1] = 1.0;
  const PerTokenKl kl = eval_per_token_kl(o, h, c, 4, 20, 5);
  EXPECT_EQ(kl.total_lingen_true, 0.0);
  EXPECT_EQ(kl.total_true_lingen, 0.0);
  EXPECT_EQ(kl.generations.size(), 20u);
}

TEST(LinGen, ExactWhenHistoriesSpanTheState) {
  const IsanOracle o(random_isan(2, 2, 9, 4));
  const Sequence target = {1, 0, 1};
  const auto h = without(all_sequences(2, 3), target);
  const LinGenCoefficients c = fit_lingen(o, h, full_future_closure(2, 2), target);
  const PerTokenKl kl = eval_per_token_kl(o, h, c, 6, 10, 6);
  for (double v : kl.kl_lingen_true) EXPECT_LE(v, 1e-10);
  for (double v : kl.kl_true_lingen) EXPECT_LE(v, 1e-10);
}

TEST(LinGen, NeverQueriesTheTarget) {
  const IsanOracle inner(random_isan(2, 2, 9, 4));
  RecordingOracle o(inner);
  const Sequence target = {0, 0, 1};
  const auto h = without(all_sequences(2, 3), target);
  const LinGenCoefficients c = fit_lingen(inner, h, full_future_closure(2, 2), target);
  Rng rng(7, "avoid");
  for (int i = 0; i < 10; ++i) lingen_generate(o, h, c.v, 6, rng);
  ASSERT_FALSE(o.seen().empty());
  for (const Sequence& p : o.seen()) EXPECT_FALSE(starts_with(p, target)) << to_string(p);
}

TEST(LinGen, ZeroWeightHistoriesAreNotQueried) {
  const IsanOracle inner(random_isan(2, 2, 6, 4));
  RecordingOracle o(inner);
  const std::vector<Sequence> h = {{0, 0}, {1, 1}};
  Vector v(2);
  v << 0.0, 1.0;
  lingen_logits(o, h, v, {0, 1});
  EXPECT_EQ(o.seen(), (std::set<Sequence>{{1, 1, 0, 1}}));
}

TEST(LinGen, LogitsAreWeightedSums) {
  const TimeVaryingIsan m = random_isan(2, 3, 6, 8);
  const IsanOracle o(m);
  const std::vector<Sequence> h = {{0, 1}, {2, 0}};
  Vector v(2);
  v << 0.25, -1.5;
  const Vector got = lingen_logits(o, h, v, {1});
  const Vector want = 0.25 * next_logits(m, {0, 1, 1}) - 1.5 * next_logits(m, {2, 0, 1});
  EXPECT_LE((got - want).norm(), 1e-12);
}

TEST(LinGen, DeterministicAcrossWorkerCounts) {
  const IsanOracle o(random_isan(3, 2, 9, 9));
  const Sequence target = {1, 1, 0};
  const auto h = without(all_sequences(2, 3), target);
  const LinGenCoefficients c = fit_lingen(o, h, full_future_closure(2, 1), target);
  const PerTokenKl a = eval_per_token_kl(o, h, c, 5, 16, 3, nullptr, 1);
  const PerTokenKl b = eval_per_token_kl(o, h, c, 5, 16, 3, nullptr, 3);
  EXPECT_EQ(a.generations, b.generations);
  EXPECT_EQ(a.kl_lingen_true, b.kl_lingen_true);
}

TEST(LinGen, SingleTokenBaselineFitsNullFutureOnly) {
  const IsanOracle o(random_isan(3, 3, 6, 10));
  const Sequence target = {1, 2};
  const auto h = without(all_sequences(3, 2), target);
  const LinGenCoefficients c = single_token_baseline(o, h, target);
  EXPECT_LE(c.fit_residual, 1e-9);
  EXPECT_LE((lingen_logits(o, h, c.v, {}) - o.query(target)).norm(), 1e-9);
}

TEST(LinGen, GenerationOracleOverride) {
  const IsanOracle a(random_isan(2, 2, 6, 11));
  const IsanOracle b(random_isan(2, 2, 6, 12));
  const Sequence target = {0, 1};
  const auto h = without(all_sequences(2, 2), target);
  const LinGenCoefficients c = fit_lingen(a, h, full_future_closure(2, 1), target);
  const PerTokenKl same = eval_per_token_kl(a, h, c, 3, 8, 1);
  const PerTokenKl cross = eval_per_token_kl(a, h, c, 3, 8, 1, &b);
  EXPECT_GT(cross.total_lingen_true, same.total_lingen_true);
}

}  // namespace
}  // namespace logitrank
