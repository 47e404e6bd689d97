#include "logitrank/logit_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "logitrank/error.hpp"
#include "logitrank/parallel.hpp"
#include "logitrank/rng.hpp"

namespace logitrank {

std::size_t ColumnSelector::width(std::size_t alphabet_size) const {
  return kind == Kind::All ? alphabet_size : std::min(k, alphabet_size);
}

void ColumnSelector::validate(std::size_t alphabet_size) const {
  if (kind == Kind::All) return;
  if (k < 1) throw ValidationError("selector k must be positive");
  if (k > alphabet_size)
    throw ValidationError("selector k = " + std::to_string(k) + " exceeds alphabet size " +
                          std::to_string(alphabet_size));
}

nlohmann::json ColumnSelector::to_json() const {
  switch (kind) {
    case Kind::All:
      return {{"kind", "all"}};
    case Kind::TopK:
      return {{"kind", "top_k"}, {"k", k}};
    case Kind::RandomK:
      return {{"kind", "random_k"}, {"k", k}, {"seed", seed}};
  }
  return {};
}

ColumnSelector ColumnSelector::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "all") return all();
    if (kind == "top_k") return top_k(j.at("k").get<std::size_t>());
    if (kind == "random_k")
      return random_k(j.at("k").get<std::size_t>(), j.value("seed", std::uint64_t{0}));
    throw FormatError("unknown selector kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad selector: ") + e.what());
  }
}

ColumnSelector ColumnSelector::parse(const std::string& text) {
  auto number = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw ValidationError("bad selector '" + text + "'");
    return v;
  };
  if (text == "all") return all();
  if (text.rfind("top-k:", 0) == 0) return top_k(number(text.substr(6)));
  if (text.rfind("random-k:", 0) == 0) {
    const std::string rest = text.substr(9);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) return random_k(number(rest), 0);
    return random_k(number(rest.substr(0, colon)), number(rest.substr(colon + 1)));
  }
  throw ValidationError("bad selector '" + text + "' (expected all, top-k:K or random-k:K:SEED)");
}

std::vector<std::pair<std::size_t, std::size_t>> LogitMatrix::future_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> r(futures.size(), {0, 0});
  std::size_t i = 0;
  for (std::size_t f = 0; f < futures.size(); ++f) {
    const std::size_t begin = i;
    while (i < columns.size() && columns[i].future == f) ++i;
    r[f] = {begin, i};
  }
  return r;
}

void LogitMatrix::validate() const {
  if (alphabet_size < 2) throw FormatError("matrix alphabet size must be at least 2");
  if (values.rows() != static_cast<Eigen::Index>(histories.size()) ||
      values.cols() != static_cast<Eigen::Index>(columns.size()))
    throw FormatError("matrix values shape does not match histories x columns");
  for (const auto& h : histories) check_tokens(h, alphabet_size);
  for (const auto& f : futures) check_tokens(f, alphabet_size);
  std::set<std::pair<std::size_t, Token>> seen;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if (c.future >= futures.size()) throw FormatError("column refers to a missing future");
    if (c.token >= alphabet_size) throw FormatError("column token outside alphabet");
    if (i > 0 && c.future < prev) throw FormatError("columns of one future are not contiguous");
    if (!seen.insert({c.future, c.token}).second)
      throw FormatError("duplicate (future, token) column");
    prev = c.future;
  }
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      if (!std::isfinite(values(r, c))) throw FormatError("matrix holds a non-finite value");
}

namespace {

std::vector<Token> choose_tokens(const LogitOracle& oracle, const Sequence& future,
                                 std::size_t future_index, const ColumnSelector& sel) {
  const std::size_t k = oracle.alphabet_size();
  std::vector<Token> tokens(k);
  std::iota(tokens.begin(), tokens.end(), Token{0});
  switch (sel.kind) {
    case ColumnSelector::Kind::All:
      return tokens;
    case ColumnSelector::Kind::TopK: {
      const LogitVector l = oracle.query(future);
      std::stable_sort(tokens.begin(), tokens.end(),
                       [&](Token a, Token b) { return l[a] > l[b]; });
      tokens.resize(sel.k);
      return tokens;
    }
    case ColumnSelector::Kind::RandomK: {
      Rng rng(sel.seed, "random-k", future_index);
      for (std::size_t i = 0; i < sel.k; ++i)
        std::swap(tokens[i], tokens[i + rng.below(k - i)]);
      tokens.resize(sel.k);
      std::sort(tokens.begin(), tokens.end());
      return tokens;
    }
  }
  return tokens;
}

bool has_duplicates(std::vector<Sequence> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

void check_horizon(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                   const std::vector<Sequence>& futures) {
  std::size_t hmax = 0, fmax = 0;
  for (const auto& h : histories) {
    check_tokens(h, oracle.alphabet_size());
    hmax = std::max(hmax, h.size());
  }
  for (const auto& f : futures) {
    check_tokens(f, oracle.alphabet_size());
    fmax = std::max(fmax, f.size());
  }
  if (!histories.empty() && !futures.empty() && hmax + fmax >= oracle.horizon())
    throw ValidationError("horizon overflow: |h| + |f| = " + std::to_string(hmax + fmax) +
                          " must be below horizon " + std::to_string(oracle.horizon()));
}

}  // namespace

Matrix dense_logits(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                    const std::vector<Sequence>& futures, std::size_t workers) {
  check_horizon(oracle, histories, futures);
  const std::size_t k = oracle.alphabet_size();
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix out(static_cast<Eigen::Index>(histories.size()),
             static_cast<Eigen::Index>(futures.size() * k));
  const std::size_t cells = histories.size() * futures.size();
  parallel_for(cells, workers, [&](std::size_t cell) {
    const std::size_t h = cell / futures.size();
    const std::size_t f = cell % futures.size();
    const LogitVector l = oracle.query(concat(histories[h], futures[f]));
    out.block(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(f) * kk, 1, kk) =
        l.transpose();
  });
  return out;
}

LogitMatrix build_logit_matrix(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                               const std::vector<Sequence>& futures,
                               const ColumnSelector& selector, std::size_t workers) {
  selector.validate(oracle.alphabet_size());
  check_horizon(oracle, histories, futures);
  LogitMatrix m;
  m.alphabet_size = oracle.alphabet_size();
  m.histories = histories;
  m.futures = futures;
  m.selector = selector;
  for (std::size_t f = 0; f < futures.size(); ++f)
    for (Token z : choose_tokens(oracle, futures[f], f, selector)) m.columns.push_back({f, z});

  const auto ranges = m.future_ranges();
  m.values.resize(static_cast<Eigen::Index>(histories.size()),
                  static_cast<Eigen::Index>(m.columns.size()));
  const std::size_t cells = histories.size() * futures.size();
  parallel_for(cells, workers, [&](std::size_t cell) {
    const std::size_t h = cell / futures.size();
    const std::size_t f = cell % futures.size();
    const LogitVector l = oracle.query(concat(histories[h], futures[f]));
    for (std::size_t c = ranges[f].first; c < ranges[f].second; ++c)
      m.values(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(c)) = l[m.columns[c].token];
  });
  m.metadata["kl_convention"] = "renormalized-over-stored-columns";
  m.metadata["duplicates"] = {{"histories", has_duplicates(histories)},
                              {"futures", has_duplicates(futures)}};
  return m;
}

std::vector<Sequence> nonsense_permute(const std::vector<Sequence>& sequences,
                                       std::uint64_t seed) {
  std::vector<Token> pool;
  for (const auto& s : sequences) pool.insert(pool.end(), s.begin(), s.end());
  Rng rng(seed, "nonsense-permute");
  // Fisher-Yates with the counter-based generator.
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
  std::vector<Sequence> out;
  out.reserve(sequences.size());
  std::size_t pos = 0;
  for (const auto& s : sequences) {
    out.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(pos),
                     pool.begin() + static_cast<std::ptrdiff_t>(pos + s.size()));
    pos += s.size();
  }
  return out;
}

LogitMatrix restrict_matrix(const LogitMatrix& matrix,
                            const std::vector<std::size_t>& history_subset,
                            const std::vector<std::size_t>& future_subset) {
  for (std::size_t h : history_subset)
    if (h >= matrix.rows()) throw ValidationError("history index out of range");
  for (std::size_t f : future_subset)
    if (f >= matrix.futures.size()) throw ValidationError("future index out of range");
  const auto ranges = matrix.future_ranges();
  LogitMatrix out;
  out.alphabet_size = matrix.alphabet_size;
  out.selector = matrix.selector;
  out.centering = matrix.centering;
  out.metadata = matrix.metadata;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < future_subset.size(); ++i) {
    const std::size_t f = future_subset[i];
    out.futures.push_back(matrix.futures[f]);
    for (std::size_t c = ranges[f].first; c < ranges[f].second; ++c) {
      out.columns.push_back({i, matrix.columns[c].token});
      cols.push_back(c);
    }
  }
  for (std::size_t h : history_subset) out.histories.push_back(matrix.histories[h]);
  out.values.resize(static_cast<Eigen::Index>(history_subset.size()),
                    static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < history_subset.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          matrix.values(static_cast<Eigen::Index>(history_subset[r]),
                        static_cast<Eigen::Index>(cols[c]));
  out.validate();
  return out;
}

LogitMatrix downsize(const LogitMatrix& matrix, double factor) {
  if (!(factor >= 1.0)) throw ValidationError("downsize factor must be at least 1");
  const double s = std::sqrt(factor);
  auto keep = [&](std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) / s));
    return std::max<std::size_t>(std::min(k, n), n ? 1 : 0);
  };
  std::vector<std::size_t> hs(keep(matrix.rows())), fs(keep(matrix.futures.size()));
  std::iota(hs.begin(), hs.end(), std::size_t{0});
  std::iota(fs.begin(), fs.end(), std::size_t{0});
  return restrict_matrix(matrix, hs, fs);
}

}  // namespace logitrank
