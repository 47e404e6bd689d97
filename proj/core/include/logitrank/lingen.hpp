#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "logitrank/logit_matrix.hpp"
#include "logitrank/oracle.hpp"

namespace logitrank {

struct LinGenCoefficients {
  Vector v;                 // one weight per basis history
  Sequence target;          // the history being imitated
  double ridge_lambda = 0.0;
  double fit_residual = 0.0;  // RMS over fitted columns
};

// Minimises ||target - v^T basis||^2 + lambda ||v||^2. lambda = 0 takes
// the minimum-norm pseudoinverse solution (relative cutoff 1e-10).
// Throws ValidationError if the two matrices disagree on columns.
LinGenCoefficients fit_coefficients(const LogitMatrix& basis,
                                    const LogitMatrix& target_row,
                                    double ridge_lambda = 0.0);

struct Generation {
  Sequence tokens;
  std::vector<LogitVector> logits;  // per step, full alphabet
};

// LinGen: step t uses logits sum_h v_h L[. | h o z_{1:t-1}]. Only the
// basis histories with nonzero weight are queried.
Generation lingen_generate(const LogitOracle& oracle,
                           const std::vector<Sequence>& histories,
                           const Vector& weights, std::size_t length, Rng& rng,
                           std::size_t workers = 1);

// The LinGen logits after a given continuation, without sampling.
LogitVector lingen_logits(const LogitOracle& oracle,
                          const std::vector<Sequence>& histories,
                          const Vector& weights, const Sequence& continuation,
                          std::size_t workers = 1);

struct PerTokenKl {
  // Means over generations at each position.
  std::vector<double> kl_lingen_true;  // KL(LinGen step || true step)
  std::vector<double> kl_true_lingen;  // KL(true step || LinGen step)
  double total_lingen_true = 0.0;
  double total_true_lingen = 0.0;
  std::vector<Sequence> generations;
};

// Runs n_generations LinGen samples of length m from independent
// substreams and scores each step against the true conditional after
// target o z_{1:t-1}. `generation_oracle` defaults to `true_oracle`; a
// different oracle gives the fit-with-one, generate-with-another setup.
PerTokenKl eval_per_token_kl(const LogitOracle& true_oracle,
                             const std::vector<Sequence>& histories,
                             const LinGenCoefficients& coeffs, std::size_t length,
                             std::size_t n_generations, std::uint64_t seed,
                             const LogitOracle* generation_oracle = nullptr,
                             std::size_t workers = 1);

// Coefficients fitted on the empty future only.
LinGenCoefficients single_token_baseline(const LogitOracle& oracle,
                                         const std::vector<Sequence>& histories,
                                         const Sequence& target,
                                         double ridge_lambda = 0.0);

// Full LinGen fit against L(H, F) and L({target}, F).
LinGenCoefficients fit_lingen(const LogitOracle& oracle,
                              const std::vector<Sequence>& histories,
                              const std::vector<Sequence>& futures,
                              const Sequence& target,
                              const ColumnSelector& selector = ColumnSelector::all(),
                              double ridge_lambda = 0.0, std::size_t workers = 1);

}  // namespace logitrank
