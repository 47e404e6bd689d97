#include "logitrank/probability.hpp"

#include <cmath>
#include <string>

#include "logitrank/error.hpp"

namespace logitrank {
namespace {

void require_finite_vector(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw ValidationError(std::string(what) + ": non-finite entry at index " +
                            std::to_string(i));
}

}  // namespace

double log_sum_exp(const Vector& v) {
  require_finite_vector(v, "log_sum_exp");
  if (v.size() == 0) throw ValidationError("log_sum_exp: empty vector");
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Vector softmax(const Vector& v) {
  require_finite_vector(v, "softmax");
  if (v.size() == 0) throw ValidationError("softmax: empty vector");
  const double m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

LogitVector mean_center(const Vector& log_probs) {
  for (Eigen::Index i = 0; i < log_probs.size(); ++i)
    if (!std::isfinite(log_probs[i]))
      throw ValidationError("mean_center: non-finite log-probability for token " +
                            std::to_string(i) +
                            " (zero-probability token; clamp with floor_log_probs)");
  if (log_probs.size() == 0) return log_probs;
  return (log_probs.array() - log_probs.mean()).matrix();
}

Vector floor_log_probs(const Vector& probs, double floor) {
  return probs.array().max(floor).log().matrix();
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw ValidationError("kl_divergence: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0)
      throw ValidationError("kl_divergence: q vanishes where p > 0 at index " +
                            std::to_string(i));
    kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl < 0.0 ? 0.0 : kl;
}

double kl_from_logits(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("kl_from_logits: size mismatch");
  const Vector p = softmax(a);
  const double shift = log_sum_exp(b) - log_sum_exp(a);
  // log p_i - log q_i = (a_i - b_i) + shift
  const double kl = p.dot(a - b) + shift;
  return kl < 0.0 ? 0.0 : kl;
}

double ExactDistribution::probability(const Sequence& s) const {
  if (s.size() != length) throw ValidationError("sequence length differs from distribution");
  check_tokens(s, alphabet_size);
  return probs[lexicographic_index(s, alphabet_size)];
}

double ExactDistribution::total() const {
  double t = 0.0;
  for (double p : probs) t += p;
  return t;
}

double tv_distance(const ExactDistribution& p, const ExactDistribution& q) {
  if (p.alphabet_size != q.alphabet_size || p.length != q.length ||
      p.probs.size() != q.probs.size())
    throw ValidationError("tv_distance: distributions over different universes");
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * s;
}

}  // namespace logitrank
