#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "logitrank/probability.hpp"
#include "logitrank/rng.hpp"
#include "logitrank/sequence.hpp"

namespace logitrank {

/// Time-varying input-switched affine network over fixed-length sequences.
///
/// Token z_t is drawn from softmax(B_t x_{t-1}); afterwards the state
/// advances as x_t = A_{z_t,t} x_{t-1}. Steps are 1-based. Transitions are
/// stored for t = 1..T-1 only: no state is consumed after the final
/// emission, so A at step T would never be applied.
///
/// Bias terms are expressed by reserving a coordinate that stays at 1.
class TimeVaryingIsan {
 public:
  TimeVaryingIsan() = default;
  // x0 = e_1, every transition the identity, every emission zero.
  TimeVaryingIsan(std::size_t alphabet_size, std::size_t hidden_dim,
                  std::size_t horizon);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t horizon() const { return horizon_; }

  const Vector& initial_state() const { return x0_; }
  Vector& initial_state() { return x0_; }

  // d x d matrix applied after emitting token z at step t, 1 <= t < T.
  const Matrix& transition(Token z, std::size_t step) const;
  Matrix& transition(Token z, std::size_t step);

  // |Sigma| x d readout used at step t, 1 <= t <= T.
  const Matrix& emission(std::size_t step) const;
  Matrix& emission(std::size_t step);

  // Throws ValidationError on inconsistent shapes or non-finite entries.
  void validate() const;

  // Hidden state after consuming `prefix` (|prefix| < T).
  Vector state_after(const Sequence& prefix) const;

  bool operator==(const TimeVaryingIsan& other) const;

 private:
  std::size_t index(Token z, std::size_t step) const;

  std::size_t alphabet_size_ = 0;
  std::size_t hidden_dim_ = 0;
  std::size_t horizon_ = 0;
  Vector x0_;
  std::vector<Matrix> transitions_;  // (t-1) * |Sigma| + z
  std::vector<Matrix> emissions_;    // t-1
};

/// Time-invariant ISAN: one transition per token and a single readout.
struct TimeInvariantIsan {
  std::size_t alphabet_size = 0;
  Vector x0;
  std::vector<Matrix> transitions;  // per token
  Matrix emission;

  std::size_t hidden_dim() const { return static_cast<std::size_t>(x0.size()); }
  // The same network viewed as a time-varying ISAN of the given horizon.
  TimeVaryingIsan unroll(std::size_t horizon) const;
};

// mean_center(B_{|prefix|+1} x_{|prefix|}). Throws ValidationError if the
// prefix is too long or holds an out-of-range token.
LogitVector next_logits(const TimeVaryingIsan& model, const Sequence& prefix);

// One length-T draw; token t ~ softmax(next_logits(prefix)).
Sequence sample(const TimeVaryingIsan& model, Rng& rng);
Sequence sample(const TimeVaryingIsan& model, std::uint64_t seed);

// Draws an index from softmax(logits) using one uniform from `rng`.
Token sample_token(const Vector& logits, Rng& rng);

// Exact probabilities of all |Sigma|^T sequences by depth-first
// enumeration. Throws EnumerationInfeasible if |Sigma|^T > budget.
ExactDistribution exact_distribution(const TimeVaryingIsan& model,
                                     std::size_t budget = 1u << 20);

}  // namespace logitrank
