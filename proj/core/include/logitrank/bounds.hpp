#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "logitrank/lingen.hpp"
#include "logitrank/oracle.hpp"

namespace logitrank {

/// A finite distribution over futures: either an exact support with its
/// probabilities or an i.i.d. sample with weights 1/n.
struct WeightedFutures {
  std::vector<Sequence> futures;
  std::vector<double> weights;
};

// P1: t uniform on {0..k-1}, then f uniform on Sigma^t (exact support).
WeightedFutures uniform_prefix_futures(std::size_t alphabet_size, std::size_t k);
WeightedFutures sample_uniform_prefix_futures(std::size_t alphabet_size, std::size_t k,
                                              std::size_t n, Rng& rng);

// P2: t uniform on {0..k-1}, then a length-t continuation of `history`
// drawn from the model (exact support).
WeightedFutures continuation_futures(const LogitOracle& oracle, const Sequence& history,
                                     std::size_t k, std::size_t budget = 1u << 16);
WeightedFutures sample_continuation_futures(const LogitOracle& oracle,
                                            const Sequence& history, std::size_t k,
                                            std::size_t n, Rng& rng);

// E_f[L(H, {f}) L(H, {f})^T] under the weighted futures.
Matrix second_moment(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                     const WeightedFutures& futures);

// Smallest alpha >= 0 with M2 <= alpha M1 + gamma I in the PSD order.
// Returns +infinity if no finite alpha works. Throws ValidationError if
// gamma <= 0.
double coverage_alpha(const Matrix& m1, const Matrix& m2, double gamma);

double coverage_params(const LogitOracle& oracle, const std::vector<Sequence>& h0,
                       const WeightedFutures& p1, const WeightedFutures& p2,
                       double gamma);

// E_{f ~ P1} ||L({target}, {f}) - v^T L(H, {f})||^2.
double regression_error(const LogitOracle& oracle, const Sequence& target,
                        const std::vector<Sequence>& histories, const Vector& v,
                        const WeightedFutures& p1);

// 2k sqrt(alpha Delta + gamma (1 + ||v||^2)).
double kl_bound(double alpha, double delta, double gamma, double v_norm, std::size_t k);

// (1 + k (log|Sigma| + 2C)) sqrt(2 forward_kl): reverse-KL ceiling given a
// forward KL and a logit magnitude bound C. Fed with kl_bound this is
// 2 (1 + k(log|Sigma| + 2C)) sqrt(k) (alpha Delta + gamma(1+||v||^2))^{1/4}.
double flipped_bound(double logit_bound, std::size_t k, std::size_t alphabet_size,
                     double forward_kl);

// Right side of D(Q||P) <= (1 + C') sqrt(2 D(P||Q)) with
// C' = max_i -log p_i.
double kl_flip_rhs(const Vector& p, const Vector& q);

struct BoundOptions {
  double gamma = 1e-3;
  // Exact moments by enumeration when the supports fit this budget;
  // otherwise `samples` draws per distribution.
  std::size_t enumeration_budget = 1u << 14;
  std::size_t samples = 4096;
  std::uint64_t seed = 0;
  // Optional a-priori logit magnitude bound. Unset: the largest
  // magnitude seen along the scored continuations.
  std::optional<double> logit_bound;
};

struct BoundReport {
  double alpha = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double v_norm = 0.0;
  std::size_t k = 0;
  double kl_bound = 0.0;
  double measured_kl_forward = 0.0;  // D(P_truth || P_LinGen)
  double measured_kl_reverse = 0.0;  // D(P_LinGen || P_truth)
  double logit_bound = 0.0;
  double flipped_bound = 0.0;
  bool exact = false;
  bool violated = false;          // forward KL above kl_bound
  bool flipped_violated = false;  // reverse KL above flipped_bound

  nlohmann::json to_json() const;
};

// Measures both sequence-level KLs between the true continuation of the
// target and LinGen, and compares them with the bounds built from
// shared P1/P2 future sets. Throws InvariantViolation ("logit-bound")
// if a provided logit bound is exceeded, naming the prefix.
BoundReport bound_vs_measured(const LogitOracle& oracle,
                              const std::vector<Sequence>& histories,
                              const LinGenCoefficients& coeffs, std::size_t k,
                              const BoundOptions& options = {});

struct ConcentrationReport {
  std::size_t samples = 0;
  std::size_t reference_samples = 0;
  double deviation = 0.0;  // spectral norm
  bool within_target = false;
  double max_sample_norm = 0.0;
  double norm_ceiling = 0.0;  // C sqrt(n |Sigma|)
};

// Spectral distance between the empirical second moment of `samples`
// draws and a reference of reference_multiplier * samples draws from the
// same sampler. The reference reuses the first `samples` draws.
ConcentrationReport moment_concentration_check(
    const LogitOracle& oracle, const std::vector<Sequence>& histories,
    const std::function<Sequence(Rng&)>& sampler, std::size_t samples,
    double epsilon_target, std::uint64_t seed, std::size_t reference_multiplier = 100);

}  // namespace logitrank
