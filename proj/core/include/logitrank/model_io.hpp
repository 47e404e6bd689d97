#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "logitrank/isan.hpp"

namespace logitrank {

/// On-disk model container.
///
/// 12-byte magic "LOGITRANKISN", uint32 LE version, uint64 LE header
/// length, UTF-8 JSON header, then little-endian float64 payload:
/// x0 (d), A by (t = 1..T-1, z) row-major, B by t = 1..T row-major.
/// The header carries hidden_dim, horizon, alphabet_size, the payload
/// checksum, and a free-form "info" object (config, seed, version).
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
  TimeVaryingIsan model;
  nlohmann::json info = nlohmann::json::object();
};

void save_model(const TimeVaryingIsan& model, const std::filesystem::path& path,
                const nlohmann::json& info = nlohmann::json::object());
ModelFile load_model(const std::filesystem::path& path);

void write_model(std::ostream& out, const TimeVaryingIsan& model,
                 const nlohmann::json& info);
ModelFile read_model(std::istream& in);

}  // namespace logitrank
