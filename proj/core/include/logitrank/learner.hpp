#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "logitrank/error.hpp"
#include "logitrank/isan.hpp"
#include "logitrank/oracle.hpp"

namespace logitrank {

struct LearnerConfig {
  double epsilon = 0.05;
  // Prefix samples per timestep and sweep; 0 selects
  // ceil((4T/epsilon) log(d_max T / epsilon)).
  std::size_t samples = 0;
  double rank_rel_tol = 1e-8;
  // Upper bound on the logit rank; exceeding it aborts the run.
  std::size_t d_max = 8;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
  std::size_t sample_count(std::size_t horizon) const;
  nlohmann::json to_json() const;
};

/// History/future sets grown by the span-completion loop.
///
/// histories[t] holds sequences of length t, futures[t] sequences of
/// length <= T-t-1 starting with Null, for t = 0..T-1.
struct SpanningSets {
  std::vector<std::vector<Sequence>> histories;
  std::vector<std::vector<Sequence>> futures;
  std::vector<std::size_t> ranks;
  std::size_t additions = 0;
  std::size_t sweeps = 0;
  // rank-after-addition trace (t, |H_t|, |F_t|, rank) for diagnostics.
  struct Addition {
    std::size_t step;
    std::size_t histories;
    std::size_t futures;
    std::size_t rank;
  };
  std::vector<Addition> trace;
};

// Thrown when the observed rank exceeds LearnerConfig::d_max.
class RankCapExceeded : public Error {
 public:
  using Error::Error;
};

// Grows H_t, F_t until a full sweep over t = 1..T-1 finds no rank gap
// against H_t u H_{t-1} o Sigma u S_t (S_t: fresh prefix samples) and
// F_t u Sigma o F_{t+1}. Each addition raises the rank by one.
SpanningSets complete_span(const LogitOracle& oracle, const LearnerConfig& config);

struct SolveReport {
  // Relative residual of each transition solve, indexed [t-1][z].
  std::vector<std::vector<double>> residuals;
  std::size_t padded_dim = 0;
};

// Reads off transitions and readouts from the spanning sets and pads
// them with zeros to D = max_t |H_t|. Throws InvariantViolation
// ("span-completeness") if a solve leaves relative residual > 1e-6.
TimeVaryingIsan solve_parameters(const LogitOracle& oracle, const SpanningSets& spans,
                                 SolveReport* report = nullptr,
                                 std::size_t workers = 1);

struct StealResult {
  TimeVaryingIsan model;
  SpanningSets spans;
  SolveReport solve;
  // Every logit request issued, including sampling and cache hits.
  std::uint64_t query_count = 0;
  // Requests that reached the target oracle (distinct prefixes).
  std::uint64_t oracle_calls = 0;

  nlohmann::json diagnostics() const;
};

StealResult steal(const LogitOracle& oracle, const LearnerConfig& config);

// Exact realization from full logit matrices L(Sigma^t, Sigma^{<=T-t-1}):
// picks `dim` spanning rows per length (duplicating when the rank is
// lower) and solves for transitions. Requires |Sigma|^{T-1} enumerable.
// Throws InvariantViolation ("logit-rank") if a rank exceeds dim.
TimeVaryingIsan realize_from_logit_matrices(const LogitOracle& oracle, std::size_t dim,
                                            double rank_rel_tol = 1e-8,
                                            std::size_t budget = 1u << 16);

}  // namespace logitrank
