#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "logitrank/isan.hpp"
#include "logitrank/probability.hpp"
#include "logitrank/rng.hpp"
#include "logitrank/sequence.hpp"

namespace logitrank {

/// Logit-query access to a sequence model.
///
/// query(prefix) returns the mean-centered next-token logits after
/// `prefix`. Implementations are deterministic and safe to call from
/// several threads. Prefixes must be shorter than horizon().
class LogitOracle {
 public:
  virtual ~LogitOracle() = default;

  virtual std::size_t alphabet_size() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual LogitVector query(const Sequence& prefix) const = 0;

  // Throws ValidationError unless the prefix is admissible.
  void check_prefix(const Sequence& prefix) const;
};

class IsanOracle final : public LogitOracle {
 public:
  explicit IsanOracle(std::shared_ptr<const TimeVaryingIsan> model);
  explicit IsanOracle(TimeVaryingIsan model);

  std::size_t alphabet_size() const override { return model_->alphabet_size(); }
  std::size_t horizon() const override { return model_->horizon(); }
  LogitVector query(const Sequence& prefix) const override;

  const TimeVaryingIsan& model() const { return *model_; }

 private:
  std::shared_ptr<const TimeVaryingIsan> model_;
};

// Forwards to an inner oracle and counts every call.
class CountingOracle final : public LogitOracle {
 public:
  explicit CountingOracle(const LogitOracle& inner) : inner_(inner) {}

  std::size_t alphabet_size() const override { return inner_.alphabet_size(); }
  std::size_t horizon() const override { return inner_.horizon(); }
  LogitVector query(const Sequence& prefix) const override;

  std::uint64_t count() const { return count_.load(); }

 private:
  const LogitOracle& inner_;
  mutable std::atomic<std::uint64_t> count_{0};
};

// Memoizes an inner oracle. `requests()` counts every query made through
// this object; `misses()` counts the ones forwarded to the inner oracle.
class MemoOracle final : public LogitOracle {
 public:
  explicit MemoOracle(const LogitOracle& inner) : inner_(inner) {}

  std::size_t alphabet_size() const override { return inner_.alphabet_size(); }
  std::size_t horizon() const override { return inner_.horizon(); }
  LogitVector query(const Sequence& prefix) const override;

  std::uint64_t requests() const { return requests_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  const LogitOracle& inner_;
  mutable std::mutex mutex_;
  mutable std::map<Sequence, LogitVector> cache_;
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

// Length-t prefix drawn from M[:t] by token-by-token softmax sampling.
Sequence prefix_sample(const LogitOracle& oracle, std::size_t length, Rng& rng);

// Continuation of `history` with `length` tokens drawn from M.
Sequence sample_continuation(const LogitOracle& oracle, const Sequence& history,
                             std::size_t length, Rng& rng);

// Exact distribution of full-length sequences under any oracle.
ExactDistribution exact_distribution(const LogitOracle& oracle,
                                     std::size_t budget = 1u << 20);

// Probability of `continuation` following `history` under the oracle.
double continuation_probability(const LogitOracle& oracle,
                                const Sequence& history,
                                const Sequence& continuation);

}  // namespace logitrank
