#include "logitrank/learner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "logitrank/linalg.hpp"
#include "logitrank/logit_matrix.hpp"

namespace logitrank {

void LearnerConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!(rank_rel_tol > 0.0 && rank_rel_tol < 1.0))
    throw ValidationError("rank tolerance must lie in (0, 1)");
  if (d_max < 1) throw ValidationError("d_max must be at least 1");
}

std::size_t LearnerConfig::sample_count(std::size_t horizon) const {
  if (samples > 0) return samples;
  const double T = static_cast<double>(horizon);
  const double d = static_cast<double>(d_max);
  const double n = (4.0 * T / epsilon) * std::log(d * T / epsilon);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n)));
}

nlohmann::json LearnerConfig::to_json() const {
  return {{"epsilon", epsilon}, {"samples", samples},   {"rank_rel_tol", rank_rel_tol},
          {"d_max", d_max},     {"seed", seed},         {"workers", workers}};
}

namespace {

// Dense L(H, F) over the full alphabet.
Matrix block(const LogitOracle& o, const std::vector<Sequence>& h,
             const std::vector<Sequence>& f, std::size_t workers) {
  if (h.empty() || f.empty())
    return Matrix::Zero(static_cast<Eigen::Index>(h.size()),
                        static_cast<Eigen::Index>(f.size() * o.alphabet_size()));
  return dense_logits(o, h, f, workers);
}

struct Candidate {
  std::optional<std::size_t> history;  // index into the candidate pool
  std::optional<std::size_t> future;   // index into the candidate futures
  std::size_t rank = 0;
  double gain = 0.0;  // sigma_{r+1} / scale of the enlarged matrix
};

// Picks one (h, f) addition. Exact +1 rank increases are preferred; among
// those the one whose new singular value is largest wins.
Candidate choose_addition(const Matrix& big, std::size_t n_current_rows,
                          std::size_t n_current_futures, std::size_t n_pool,
                          std::size_t n_future_cands, std::size_t alphabet,
                          std::size_t current_rank, double scale, double rel_tol) {
  const double cut = std::max(rel_tol * scale, kRankAbsFloor);
  auto evaluate = [&](std::optional<std::size_t> h, std::optional<std::size_t> f) {
    std::vector<Eigen::Index> rows, cols;
    for (std::size_t i = 0; i < n_current_rows; ++i) rows.push_back(static_cast<Eigen::Index>(i));
    if (h) rows.push_back(static_cast<Eigen::Index>(n_current_rows + *h));
    auto add_future = [&](std::size_t fi) {
      for (std::size_t z = 0; z < alphabet; ++z)
        cols.push_back(static_cast<Eigen::Index>(fi * alphabet + z));
    };
    for (std::size_t i = 0; i < n_current_futures; ++i) add_future(i);
    if (f) add_future(n_current_futures + *f);
    const Matrix sub = big(rows, cols);
    const Vector s = singular_values_of(sub);
    Candidate c{h, f, 0, 0.0};
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > cut) ++c.rank;
    if (c.rank > current_rank && static_cast<Eigen::Index>(current_rank) < s.size())
      c.gain = s[static_cast<Eigen::Index>(current_rank)] / scale;
    return c;
  };

  std::optional<Candidate> best;
  auto better = [&](const Candidate& a, const Candidate& b) {
    const std::size_t da = a.rank - current_rank, db = b.rank - current_rank;
    if ((da == 1) != (db == 1)) return da == 1;
    if (da != db) return da < db;
    return a.gain > b.gain;
  };
  auto consider = [&](std::optional<std::size_t> h, std::optional<std::size_t> f) {
    const Candidate c = evaluate(h, f);
    if (c.rank <= current_rank) return;
    if (!best || better(c, *best)) best = c;
  };
  for (std::size_t f = 0; f < n_future_cands; ++f) consider(std::nullopt, f);
  for (std::size_t h = 0; h < n_pool; ++h) {
    consider(h, std::nullopt);
    for (std::size_t f = 0; f < n_future_cands; ++f) consider(h, f);
  }
  if (!best)
    throw InvariantViolation("span-growth", "rank gap detected but no single (h, f) closes any of it");
  return *best;
}

}  // namespace

SpanningSets complete_span(const LogitOracle& oracle, const LearnerConfig& config) {
  config.validate();
  const std::size_t T = oracle.horizon();
  const std::size_t k = oracle.alphabet_size();
  if (T < 1) throw ValidationError("oracle horizon must be positive");
  SpanningSets s;
  s.histories.resize(T);
  s.futures.assign(T, {Sequence{}});
  s.ranks.assign(T, 0);
  for (std::size_t t = 0; t < T; ++t) s.histories[t] = {Sequence(t, Token{0})};

  const std::size_t n_samples = config.sample_count(T);
  const std::size_t sweep_guard = config.d_max * T + 1;
  auto rank_of = [&](std::size_t t, double scale) {
    return numerical_rank(block(oracle, s.histories[t], s.futures[t], config.workers),
                          config.rank_rel_tol, scale);
  };
  s.ranks[0] = rank_of(0, -1.0);

  for (bool changed = true; changed;) {
    changed = false;
    if (++s.sweeps > sweep_guard)
      throw InvariantViolation("span-termination",
                               "no fixed point after " + std::to_string(sweep_guard) + " sweeps");
    for (std::size_t t = 1; t < T; ++t) {
      // Candidate histories: H_{t-1} o Sigma and fresh prefix samples.
      std::set<Sequence> pool_set;
      for (const auto& h : s.histories[t - 1])
        for (std::size_t z = 0; z < k; ++z) pool_set.insert(append(h, static_cast<Token>(z)));
      Rng rng(config.seed, "prefix-samples", s.sweeps * T + t);
      for (std::size_t i = 0; i < n_samples; ++i) pool_set.insert(prefix_sample(oracle, t, rng));

      while (true) {
        const std::set<Sequence> current(s.histories[t].begin(), s.histories[t].end());
        std::vector<Sequence> pool;
        for (const auto& h : pool_set)
          if (!current.count(h)) pool.push_back(h);
        std::vector<Sequence> fut_cands;
        if (t + 1 < T) {
          const std::set<Sequence> have(s.futures[t].begin(), s.futures[t].end());
          for (std::size_t z = 0; z < k; ++z)
            for (const auto& f : s.futures[t + 1]) {
              Sequence g = concat(Sequence{static_cast<Token>(z)}, f);
              if (!have.count(g)) fut_cands.push_back(std::move(g));
            }
        }
        std::vector<Sequence> rows = s.histories[t];
        rows.insert(rows.end(), pool.begin(), pool.end());
        std::vector<Sequence> cols = s.futures[t];
        cols.insert(cols.end(), fut_cands.begin(), fut_cands.end());
        const Matrix big = block(oracle, rows, cols, config.workers);
        const Vector sv = singular_values_of(big);
        const double scale = sv.size() ? sv[0] : 0.0;
        std::size_t big_rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv[i] > std::max(config.rank_rel_tol * scale, kRankAbsFloor)) ++big_rank;
        if (big_rank > config.d_max)
          throw RankCapExceeded("logit rank " + std::to_string(big_rank) + " at step " +
                                std::to_string(t) + " exceeds d_max = " +
                                std::to_string(config.d_max));
        const std::size_t cur_rank = rank_of(t, scale);
        s.ranks[t] = cur_rank;
        if (cur_rank >= big_rank) break;

        const Candidate c =
            choose_addition(big, s.histories[t].size(), s.futures[t].size(), pool.size(),
                            fut_cands.size(), k, cur_rank, scale, config.rank_rel_tol);
        if (c.history) s.histories[t].push_back(pool[*c.history]);
        if (c.future) s.futures[t].push_back(fut_cands[*c.future]);
        s.ranks[t] = c.rank;
        ++s.additions;
        s.trace.push_back({t, s.histories[t].size(), s.futures[t].size(), c.rank});
        changed = true;
      }
    }
  }
  return s;
}

TimeVaryingIsan solve_parameters(const LogitOracle& oracle, const SpanningSets& spans,
                                 SolveReport* report, std::size_t workers) {
  const std::size_t T = oracle.horizon();
  const std::size_t k = oracle.alphabet_size();
  if (spans.histories.size() != T || spans.futures.size() != T)
    throw ValidationError("spanning sets do not match the oracle horizon");
  std::size_t D = 0;
  for (const auto& h : spans.histories) D = std::max(D, h.size());
  if (D == 0) throw ValidationError("spanning sets are empty");
  const auto Di = static_cast<Eigen::Index>(D);
  TimeVaryingIsan m(k, D, T);
  m.initial_state() = Vector::Zero(Di);
  m.initial_state()[0] = 1.0;
  SolveReport local;
  local.padded_dim = D;
  local.residuals.assign(T > 0 ? T - 1 : 0, std::vector<double>(k, 0.0));

  for (std::size_t t = 1; t <= T; ++t) {
    const Matrix b = block(oracle, spans.histories[t - 1], {Sequence{}}, workers).transpose();
    Matrix padded = Matrix::Zero(static_cast<Eigen::Index>(k), Di);
    padded.leftCols(b.cols()) = b;
    m.emission(t) = padded;
  }
  for (std::size_t t = 1; t < T; ++t) {
    const Matrix basis = block(oracle, spans.histories[t], spans.futures[t], workers);
    for (std::size_t z = 0; z < k; ++z) {
      std::vector<Sequence> prev;
      for (const auto& h : spans.histories[t - 1]) prev.push_back(append(h, static_cast<Token>(z)));
      const Matrix y = block(oracle, prev, spans.futures[t], workers);
      const Matrix x = solve_row_combination(basis, y);  // x * basis ~ y, x = A^T
      const double rel = (x * basis - y).norm() / std::max(y.norm(), 1e-12);
      local.residuals[t - 1][z] = rel;
      if (!(rel <= 1e-6))
        throw InvariantViolation("span-completeness",
                                 "transition solve at step " + std::to_string(t) + ", token " +
                                     std::to_string(z) + " left relative residual " +
                                     std::to_string(rel));
      Matrix a = Matrix::Zero(Di, Di);
      a.topLeftCorner(x.cols(), x.rows()) = x.transpose();
      m.transition(static_cast<Token>(z), t) = a;
    }
  }
  if (report) *report = std::move(local);
  return m;
}

nlohmann::json StealResult::diagnostics() const {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < spans.histories.size(); ++t)
    steps.push_back({{"t", t},
                     {"histories", spans.histories[t].size()},
                     {"futures", spans.futures[t].size()},
                     {"rank", spans.ranks[t]}});
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& a : spans.trace)
    trace.push_back({{"t", a.step}, {"histories", a.histories}, {"futures", a.futures},
                     {"rank", a.rank}});
  return {{"steps", steps},
          {"additions", spans.additions},
          {"sweeps", spans.sweeps},
          {"trace", trace},
          {"padded_dim", solve.padded_dim},
          {"residuals", solve.residuals},
          {"query_count", query_count},
          {"oracle_calls", oracle_calls}};
}

StealResult steal(const LogitOracle& oracle, const LearnerConfig& config) {
  config.validate();
  CountingOracle counting(oracle);
  MemoOracle memo(counting);
  StealResult r;
  r.spans = complete_span(memo, config);
  r.model = solve_parameters(memo, r.spans, &r.solve, config.workers);
  r.query_count = memo.requests();
  r.oracle_calls = memo.misses();
  return r;
}

TimeVaryingIsan realize_from_logit_matrices(const LogitOracle& oracle, std::size_t dim,
                                            double rank_rel_tol, std::size_t budget) {
  const std::size_t T = oracle.horizon();
  const std::size_t k = oracle.alphabet_size();
  if (dim < 1) throw ValidationError("realization dimension must be positive");
  const auto di = static_cast<Eigen::Index>(dim);
  // spanning[t]: dim histories of length t whose rows span L(Sigma^t, F_t).
  std::vector<std::vector<Sequence>> spanning(T);
  std::vector<std::vector<Sequence>> futures(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto hs = all_sequences(k, t, budget);
    futures[t] = full_future_closure(k, T - t - 1, budget);
    const Matrix full = block(oracle, hs, futures[t], 1);
    const Vector sv = singular_values_of(full);
    const double scale = sv.size() ? sv[0] : 0.0;
    const std::size_t r = numerical_rank(full, rank_rel_tol, scale);
    if (r > dim)
      throw InvariantViolation("logit-rank", "rank " + std::to_string(r) + " at length " +
                                                 std::to_string(t) + " exceeds dimension " +
                                                 std::to_string(dim));
    std::vector<Eigen::Index> chosen;
    std::size_t have = 0;
    for (std::size_t i = 0; i < hs.size() && have < r; ++i) {
      chosen.push_back(static_cast<Eigen::Index>(i));
      const std::size_t nr = numerical_rank(full(chosen, Eigen::all), rank_rel_tol, scale);
      if (nr > have) {
        have = nr;
        spanning[t].push_back(hs[i]);
      } else {
        chosen.pop_back();
      }
    }
    // Duplicates pad the multiset to exactly dim rows.
    while (spanning[t].size() < dim) spanning[t].push_back(hs.front());
  }
  TimeVaryingIsan m(k, dim, T);
  m.initial_state() = Vector::Zero(di);
  m.initial_state()[0] = 1.0;
  for (std::size_t t = 1; t <= T; ++t)
    m.emission(t) = block(oracle, spanning[t - 1], {Sequence{}}, 1).transpose();
  for (std::size_t t = 1; t < T; ++t) {
    const Matrix basis = block(oracle, spanning[t], futures[t], 1);
    for (std::size_t z = 0; z < k; ++z) {
      std::vector<Sequence> prev;
      for (const auto& h : spanning[t - 1]) prev.push_back(append(h, static_cast<Token>(z)));
      const Matrix c = solve_row_combination(basis, block(oracle, prev, futures[t], 1));
      m.transition(static_cast<Token>(z), t) = c.transpose();
    }
  }
  return m;
}

}  // namespace logitrank
