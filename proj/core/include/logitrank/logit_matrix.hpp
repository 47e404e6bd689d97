#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "logitrank/oracle.hpp"
#include "logitrank/probability.hpp"
#include "logitrank/sequence.hpp"

namespace logitrank {

/// Which (future, token) columns a logit matrix keeps.
struct ColumnSelector {
  enum class Kind { All, TopK, RandomK };

  Kind kind = Kind::All;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  static ColumnSelector all() { return {}; }
  static ColumnSelector top_k(std::size_t k) { return {Kind::TopK, k, 0}; }
  static ColumnSelector random_k(std::size_t k, std::uint64_t seed) {
    return {Kind::RandomK, k, seed};
  }

  // Tokens kept per future.
  std::size_t width(std::size_t alphabet_size) const;
  void validate(std::size_t alphabet_size) const;

  nlohmann::json to_json() const;
  static ColumnSelector from_json(const nlohmann::json& j);
  // "all", "top-k:K", "random-k:K:SEED"
  static ColumnSelector parse(const std::string& text);
};

struct LogitColumn {
  std::size_t future = 0;
  Token token = 0;

  bool operator==(const LogitColumn&) const = default;
};

/// Extended logit matrix over histories x (future, token) pairs.
///
/// Entry (h, (f, z)) is the next-token logit of z after h o f, centered
/// over the full alphabet before any column selection. Columns of one
/// future are contiguous and futures appear in order.
struct LogitMatrix {
  std::size_t alphabet_size = 0;
  std::vector<Sequence> histories;
  std::vector<Sequence> futures;
  std::vector<LogitColumn> columns;
  Matrix values;
  ColumnSelector selector;
  std::string centering = "full-alphabet";
  // model id, conventions, duplicate flags, producer config, etc.
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t rows() const { return histories.size(); }
  std::size_t cols() const { return columns.size(); }

  // [begin, end) column range of each future.
  std::vector<std::pair<std::size_t, std::size_t>> future_ranges() const;

  // Throws FormatError if shapes, grouping or uniqueness are broken.
  void validate() const;
};

// Builds L(H, F) with the given column selection. Top-k ranks tokens by
// the model's distribution at prefix f alone (ties to the lower id), so
// the column set is shared by every history. Oracle queries may run on
// `workers` threads; the result does not depend on the count.
LogitMatrix build_logit_matrix(const LogitOracle& oracle,
                               const std::vector<Sequence>& histories,
                               const std::vector<Sequence>& futures,
                               const ColumnSelector& selector = ColumnSelector::all(),
                               std::size_t workers = 1);

// Dense full-alphabet block: rows H, columns (f, z) for every f in F, z.
Matrix dense_logits(const LogitOracle& oracle,
                    const std::vector<Sequence>& histories,
                    const std::vector<Sequence>& futures,
                    std::size_t workers = 1);

// Shuffles all tokens pooled across `sequences` and deals them back out,
// keeping each sequence's length.
std::vector<Sequence> nonsense_permute(const std::vector<Sequence>& sequences,
                                       std::uint64_t seed);

LogitMatrix restrict_matrix(const LogitMatrix& matrix,
                            const std::vector<std::size_t>& history_subset,
                            const std::vector<std::size_t>& future_subset);

// First round(|H|/sqrt(factor)) histories and round(|F|/sqrt(factor))
// futures; roughly 1/factor of the entries.
LogitMatrix downsize(const LogitMatrix& matrix, double factor);

/// .elm container: 12-byte magic "LOGITRANKELM", uint32 LE version,
/// uint64 LE metadata length, UTF-8 JSON metadata, row-major LE float64
/// payload. See docs/formats.md.
inline constexpr std::uint32_t kElmFormatVersion = 1;

void save_logit_matrix(const LogitMatrix& matrix, const std::filesystem::path& path);
LogitMatrix load_logit_matrix(const std::filesystem::path& path);

}  // namespace logitrank
