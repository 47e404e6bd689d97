#include <fstream>

#include "binary_io.hpp"
#include "logitrank/error.hpp"
#include "logitrank/logit_matrix.hpp"

namespace logitrank {
namespace {

constexpr char kMagic[13] = "LOGITRANKELM";

// Keys owned by the container; everything else round-trips via metadata.
const char* const kStructural[] = {"rows",    "cols",     "alphabet_size", "histories",
                                   "futures", "columns",  "selector",      "centering",
                                   "checksum"};

std::vector<Sequence> sequences_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
  std::vector<Sequence> out;
  out.reserve(j.size());
  for (const auto& s : j) out.push_back(s.get<Sequence>());
  return out;
}

}  // namespace

void save_logit_matrix(const LogitMatrix& matrix, const std::filesystem::path& path) {
  matrix.validate();
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(matrix.values.size()));
  for (Eigen::Index r = 0; r < matrix.values.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) payload.push_back(matrix.values(r, c));

  nlohmann::json meta = matrix.metadata.is_object() ? matrix.metadata : nlohmann::json::object();
  meta["rows"] = matrix.rows();
  meta["cols"] = matrix.cols();
  meta["alphabet_size"] = matrix.alphabet_size;
  meta["histories"] = matrix.histories;
  meta["futures"] = matrix.futures;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : matrix.columns) cols.push_back({c.future, c.token});
  meta["columns"] = std::move(cols);
  meta["selector"] = matrix.selector.to_json();
  meta["centering"] = matrix.centering;
  meta["checksum"] = detail::checksum_string(payload);
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 12);
  detail::write_u32(out, kElmFormatVersion);
  detail::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  detail::write_f64s(out, payload);
  if (!out) throw Error("failed to write " + path.string());
}

LogitMatrix load_logit_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  detail::expect_magic(in, kMagic);
  const std::uint32_t version = detail::read_u32(in, "version");
  if (version != kElmFormatVersion)
    throw FormatError("unsupported .elm version " + std::to_string(version) + " (expected " +
                      std::to_string(kElmFormatVersion) + ")");
  const std::uint64_t len = detail::read_u64(in, "metadata length");
  if (len > (1ULL << 32)) throw FormatError(".elm metadata length implausible");
  std::string text(len, '\0');
  detail::read_exact(in, text.data(), len, "metadata");

  LogitMatrix m;
  std::size_t rows = 0, cols = 0;
  std::string checksum;
  try {
    nlohmann::json meta = nlohmann::json::parse(text);
    if (!meta.is_object()) throw FormatError(".elm metadata must be a JSON object");
    rows = meta.at("rows").get<std::size_t>();
    cols = meta.at("cols").get<std::size_t>();
    m.alphabet_size = meta.at("alphabet_size").get<std::size_t>();
    m.histories = sequences_from(meta.at("histories"), "histories");
    m.futures = sequences_from(meta.at("futures"), "futures");
    for (const auto& c : meta.at("columns")) {
      if (!c.is_array() || c.size() != 2) throw FormatError("column must be [future, token]");
      m.columns.push_back({c[0].get<std::size_t>(), c[1].get<Token>()});
    }
    m.selector = ColumnSelector::from_json(meta.at("selector"));
    m.centering = meta.value("centering", std::string("full-alphabet"));
    checksum = meta.value("checksum", std::string());
    for (const char* key : kStructural) meta.erase(key);
    m.metadata = std::move(meta);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(".elm metadata malformed: ") + e.what());
  }
  if (rows != m.histories.size() || cols != m.columns.size())
    throw FormatError(".elm declared shape disagrees with histories/columns");
  if (rows != 0 && cols > (std::size_t{1} << 40) / rows)
    throw FormatError(".elm shape implausible");
  std::vector<double> payload(rows * cols);
  detail::read_exact(in, payload.data(), payload.size() * sizeof(double), "payload");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(".elm has trailing bytes");
  if (checksum.empty()) throw FormatError(".elm metadata lacks a checksum");
  if (checksum != detail::checksum_string(payload))
    throw FormatError(".elm payload checksum mismatch (corrupt payload)");
  m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = payload[r * cols + c];
  m.validate();
  return m;
}

}  // namespace logitrank
