#include "logitrank/oracle.hpp"

#include <cmath>
#include <string>

#include "logitrank/error.hpp"

namespace logitrank {

void LogitOracle::check_prefix(const Sequence& prefix) const {
  if (prefix.size() >= horizon())
    throw ValidationError("prefix of length " + std::to_string(prefix.size()) +
                          " not shorter than horizon " + std::to_string(horizon()));
  check_tokens(prefix, alphabet_size());
}

IsanOracle::IsanOracle(std::shared_ptr<const TimeVaryingIsan> model) : model_(std::move(model)) {
  if (!model_) throw ValidationError("IsanOracle: null model");
  model_->validate();
}

IsanOracle::IsanOracle(TimeVaryingIsan model)
    : IsanOracle(std::make_shared<const TimeVaryingIsan>(std::move(model))) {}

LogitVector IsanOracle::query(const Sequence& prefix) const {
  check_prefix(prefix);
  return next_logits(*model_, prefix);
}

LogitVector CountingOracle::query(const Sequence& prefix) const {
  count_.fetch_add(1);
  return inner_.query(prefix);
}

LogitVector MemoOracle::query(const Sequence& prefix) const {
  requests_.fetch_add(1);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(prefix); it != cache_.end()) return it->second;
  }
  LogitVector v = inner_.query(prefix);
  std::lock_guard lock(mutex_);
  // Another thread may have filled the slot meanwhile; count only first insert.
  auto [it, inserted] = cache_.emplace(prefix, std::move(v));
  if (inserted) misses_.fetch_add(1);
  return it->second;
}

Sequence sample_continuation(const LogitOracle& oracle, const Sequence& history,
                             std::size_t length, Rng& rng) {
  if (history.size() + length > oracle.horizon())
    throw ValidationError("continuation runs past the horizon");
  Sequence s = history;
  for (std::size_t i = 0; i < length; ++i) s.push_back(sample_token(oracle.query(s), rng));
  return Sequence(s.begin() + static_cast<std::ptrdiff_t>(history.size()), s.end());
}

Sequence prefix_sample(const LogitOracle& oracle, std::size_t length, Rng& rng) {
  return sample_continuation(oracle, {}, length, rng);
}

namespace {

void enumerate(const LogitOracle& o, Sequence& prefix, double mass, std::size_t index,
               std::vector<double>& out) {
  const Vector p = softmax(o.query(prefix));
  const std::size_t k = o.alphabet_size();
  for (std::size_t z = 0; z < k; ++z) {
    const double pz = mass * p[static_cast<Eigen::Index>(z)];
    const std::size_t idx = index * k + z;
    if (prefix.size() + 1 == o.horizon()) {
      out[idx] = pz;
    } else if (pz != 0.0) {
      prefix.push_back(static_cast<Token>(z));
      enumerate(o, prefix, pz, idx, out);
      prefix.pop_back();
    }
  }
}

}  // namespace

ExactDistribution exact_distribution(const LogitOracle& oracle, std::size_t budget) {
  const std::size_t n = count_sequences(oracle.alphabet_size(), oracle.horizon());
  if (n > budget)
    throw EnumerationInfeasible("enumeration infeasible: " + std::to_string(n) +
                                " sequences exceed budget " + std::to_string(budget));
  ExactDistribution d{oracle.alphabet_size(), oracle.horizon(), std::vector<double>(n, 0.0)};
  Sequence prefix;
  enumerate(oracle, prefix, 1.0, 0, d.probs);
  return d;
}

double continuation_probability(const LogitOracle& oracle, const Sequence& history,
                                const Sequence& continuation) {
  check_tokens(continuation, oracle.alphabet_size());
  if (history.size() + continuation.size() > oracle.horizon())
    throw ValidationError("continuation runs past the horizon");
  double logp = 0.0;
  Sequence s = history;
  for (Token z : continuation) {
    const Vector l = oracle.query(s);
    logp += l[z] - log_sum_exp(l);
    s.push_back(z);
  }
  return std::exp(logp);
}

}  // namespace logitrank
