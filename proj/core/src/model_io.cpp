#include "logitrank/model_io.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "logitrank/error.hpp"

namespace logitrank {
namespace {

constexpr char kMagic[13] = "LOGITRANKISN";

std::vector<double> flatten(const TimeVaryingIsan& m) {
  std::vector<double> out;
  const auto d = static_cast<Eigen::Index>(m.hidden_dim());
  const auto k = static_cast<Eigen::Index>(m.alphabet_size());
  for (Eigen::Index i = 0; i < d; ++i) out.push_back(m.initial_state()[i]);
  for (std::size_t t = 1; t < m.horizon(); ++t)
    for (std::size_t z = 0; z < m.alphabet_size(); ++z) {
      const Matrix& a = m.transition(static_cast<Token>(z), t);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) out.push_back(a(r, c));
    }
  for (std::size_t t = 1; t <= m.horizon(); ++t) {
    const Matrix& b = m.emission(t);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < d; ++c) out.push_back(b(r, c));
  }
  return out;
}

}  // namespace

void write_model(std::ostream& out, const TimeVaryingIsan& model, const nlohmann::json& info) {
  model.validate();
  const std::vector<double> payload = flatten(model);
  nlohmann::json header = {{"hidden_dim", model.hidden_dim()},
                           {"horizon", model.horizon()},
                           {"alphabet_size", model.alphabet_size()},
                           {"checksum", detail::checksum_string(payload)},
                           {"info", info}};
  const std::string text = header.dump();
  out.write(kMagic, 12);
  detail::write_u32(out, kModelFormatVersion);
  detail::write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  detail::write_f64s(out, payload);
  if (!out) throw Error("failed to write model");
}

ModelFile read_model(std::istream& in) {
  detail::expect_magic(in, kMagic);
  const std::uint32_t version = detail::read_u32(in, "version");
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));
  const std::uint64_t len = detail::read_u64(in, "header length");
  if (len > (1ULL << 30)) throw FormatError("model header length implausible");
  std::string text(len, '\0');
  detail::read_exact(in, text.data(), len, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model header is not valid JSON: ") + e.what());
  }
  std::size_t d = 0, t = 0, k = 0;
  try {
    d = header.at("hidden_dim").get<std::size_t>();
    t = header.at("horizon").get<std::size_t>();
    k = header.at("alphabet_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model header incomplete: ") + e.what());
  }
  if (d == 0 || t == 0 || k < 2 || d > 4096 || t > 1 << 20 || k > 1 << 20)
    throw FormatError("model header has implausible shape");
  ModelFile file{TimeVaryingIsan(k, d, t), header.value("info", nlohmann::json::object())};
  const std::size_t count = d + (t - 1) * k * d * d + t * k * d;
  std::vector<double> payload(count);
  detail::read_exact(in, payload.data(), count * sizeof(double), "payload");
  if (header.contains("checksum") &&
      header["checksum"].get<std::string>() != detail::checksum_string(payload))
    throw FormatError("model payload checksum mismatch");
  std::size_t p = 0;
  auto& m = file.model;
  const auto di = static_cast<Eigen::Index>(d);
  for (Eigen::Index i = 0; i < di; ++i) m.initial_state()[i] = payload[p++];
  for (std::size_t s = 1; s < t; ++s)
    for (std::size_t z = 0; z < k; ++z) {
      Matrix& a = m.transition(static_cast<Token>(z), s);
      for (Eigen::Index r = 0; r < di; ++r)
        for (Eigen::Index c = 0; c < di; ++c) a(r, c) = payload[p++];
    }
  for (std::size_t s = 1; s <= t; ++s) {
    Matrix& b = m.emission(s);
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(k); ++r)
      for (Eigen::Index c = 0; c < di; ++c) b(r, c) = payload[p++];
  }
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("model payload invalid: ") + e.what());
  }
  return file;
}

void save_model(const TimeVaryingIsan& model, const std::filesystem::path& path,
                const nlohmann::json& info) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_model(out, model, info);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace logitrank
