#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "logitrank/sequence.hpp"

namespace logitrank {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Next-token logits, mean-centered over the full alphabet unless stated
// otherwise by the producer.
using LogitVector = Vector;

// Probability floor applied before taking logs of ingested distributions.
inline constexpr double kProbabilityFloor = 1e-30;

// Max-subtracted softmax. Throws ValidationError on non-finite input.
Vector softmax(const Vector& v);
double log_sum_exp(const Vector& v);

// v - mean(v). Non-finite entries (for example log 0) raise a
// ValidationError naming the zero-probability token; clamp with
// floor_log_probs first.
LogitVector mean_center(const Vector& log_probs);

// log(max(p, floor)) elementwise.
Vector floor_log_probs(const Vector& probs, double floor = kProbabilityFloor);

// sum p log(p/q). Throws ValidationError when q_i = 0 < p_i.
double kl_divergence(const Vector& p, const Vector& q);

// KL(softmax(a) || softmax(b)) evaluated in log space.
double kl_from_logits(const Vector& a, const Vector& b);

/// Exact distribution over all length-L sequences of an alphabet.
///
/// probs[i] is the probability of sequence_from_index(i, length, alphabet).
struct ExactDistribution {
  std::size_t alphabet_size = 0;
  std::size_t length = 0;
  std::vector<double> probs;

  double probability(const Sequence& s) const;
  double total() const;
};

// Half L1 distance. Throws ValidationError on mismatched universes.
double tv_distance(const ExactDistribution& p, const ExactDistribution& q);

}  // namespace logitrank
