#include "logitrank/lingen.hpp"

#include <cmath>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/parallel.hpp"

namespace logitrank {

LinGenCoefficients fit_coefficients(const LogitMatrix& basis, const LogitMatrix& target_row,
                                    double ridge_lambda) {
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
    throw ValidationError("ridge lambda must be finite and nonnegative");
  if (target_row.rows() != 1) throw ValidationError("target matrix must have exactly one row");
  if (basis.columns != target_row.columns || basis.futures != target_row.futures)
    throw ValidationError("basis and target matrices have different column sets");
  LinGenCoefficients c;
  c.target = target_row.histories.front();
  c.ridge_lambda = ridge_lambda;
  const Matrix& l = basis.values;
  const Matrix t = target_row.values;
  if (l.rows() == 0) {
    c.v = Vector();
  } else if (ridge_lambda == 0.0) {
    c.v = solve_row_combination(l, t).row(0).transpose();
  } else {
    const Matrix g = l * l.transpose() + ridge_lambda * Matrix::Identity(l.rows(), l.rows());
    c.v = g.ldlt().solve(l * t.transpose());
  }
  const Matrix fitted = l.rows() ? Matrix(c.v.transpose() * l) : Matrix::Zero(1, t.cols());
  c.fit_residual =
      t.cols() ? (t - fitted).norm() / std::sqrt(static_cast<double>(t.cols())) : 0.0;
  require_finite(c.v, "LinGen coefficients");
  return c;
}

LogitVector lingen_logits(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                          const Vector& weights, const Sequence& continuation,
                          std::size_t workers) {
  if (weights.size() != static_cast<Eigen::Index>(histories.size()))
    throw ValidationError("one LinGen weight per history required");
  std::vector<std::size_t> active;
  for (std::size_t h = 0; h < histories.size(); ++h)
    if (weights[static_cast<Eigen::Index>(h)] != 0.0) active.push_back(h);
  std::vector<LogitVector> parts(active.size());
  parallel_for(active.size(), workers, [&](std::size_t i) {
    parts[i] = oracle.query(concat(histories[active[i]], continuation));
  });
  LogitVector out = LogitVector::Zero(static_cast<Eigen::Index>(oracle.alphabet_size()));
  // Fixed summation order keeps the result independent of the worker count.
  for (std::size_t i = 0; i < active.size(); ++i)
    out += weights[static_cast<Eigen::Index>(active[i])] * parts[i];
  return out;
}

Generation lingen_generate(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                           const Vector& weights, std::size_t length, Rng& rng,
                           std::size_t workers) {
  Generation g;
  for (std::size_t t = 0; t < length; ++t) {
    LogitVector l = lingen_logits(oracle, histories, weights, g.tokens, workers);
    g.tokens.push_back(sample_token(l, rng));
    g.logits.push_back(std::move(l));
  }
  return g;
}

PerTokenKl eval_per_token_kl(const LogitOracle& true_oracle,
                             const std::vector<Sequence>& histories,
                             const LinGenCoefficients& coeffs, std::size_t length,
                             std::size_t n_generations, std::uint64_t seed,
                             const LogitOracle* generation_oracle, std::size_t workers) {
  const LogitOracle& gen = generation_oracle ? *generation_oracle : true_oracle;
  if (gen.alphabet_size() != true_oracle.alphabet_size())
    throw ValidationError("generation and evaluation oracles use different alphabets");
  if (coeffs.target.size() + length > true_oracle.horizon())
    throw ValidationError("target plus generation length runs past the horizon");
  std::vector<std::vector<double>> fwd(n_generations), rev(n_generations);
  std::vector<Sequence> tokens(n_generations);
  parallel_for(n_generations, workers, [&](std::size_t i) {
    Rng rng(seed, "lingen-generation", i);
    const Generation g = lingen_generate(gen, histories, coeffs.v, length, rng);
    Sequence prefix = coeffs.target;
    for (std::size_t t = 0; t < length; ++t) {
      const LogitVector truth = true_oracle.query(prefix);
      fwd[i].push_back(kl_from_logits(g.logits[t], truth));
      rev[i].push_back(kl_from_logits(truth, g.logits[t]));
      prefix.push_back(g.tokens[t]);
    }
    tokens[i] = g.tokens;
  });
  PerTokenKl r;
  r.kl_lingen_true.assign(length, 0.0);
  r.kl_true_lingen.assign(length, 0.0);
  for (std::size_t i = 0; i < n_generations; ++i)
    for (std::size_t t = 0; t < length; ++t) {
      r.kl_lingen_true[t] += fwd[i][t] / static_cast<double>(n_generations);
      r.kl_true_lingen[t] += rev[i][t] / static_cast<double>(n_generations);
    }
  for (std::size_t t = 0; t < length; ++t) {
    r.total_lingen_true += r.kl_lingen_true[t];
    r.total_true_lingen += r.kl_true_lingen[t];
  }
  r.generations = std::move(tokens);
  return r;
}

LinGenCoefficients fit_lingen(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                              const std::vector<Sequence>& futures, const Sequence& target,
                              const ColumnSelector& selector, double ridge_lambda,
                              std::size_t workers) {
  const LogitMatrix basis = build_logit_matrix(oracle, histories, futures, selector, workers);
  const LogitMatrix row = build_logit_matrix(oracle, {target}, futures, selector, workers);
  return fit_coefficients(basis, row, ridge_lambda);
}

LinGenCoefficients single_token_baseline(const LogitOracle& oracle,
                                         const std::vector<Sequence>& histories,
                                         const Sequence& target, double ridge_lambda) {
  return fit_lingen(oracle, histories, {Sequence{}}, target, ColumnSelector::all(), ridge_lambda);
}

}  // namespace logitrank
