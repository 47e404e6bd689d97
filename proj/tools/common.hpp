#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "logitrank/oracle.hpp"
#include "logitrank/sequence.hpp"

namespace CLI {
class App;
}

namespace logitrank::cli {

// Options every subcommand accepts.
struct GlobalOptions {
  std::string out_dir;  // empty: $LOGITRANK_OUT_DIR, then "."
  std::size_t workers = 1;
};

// Relative paths are placed under the output directory, which is created.
std::filesystem::path output_path(const GlobalOptions& g, const std::string& name);

// Toolkit name, version and the echoed run configuration.
nlohmann::json provenance(const std::string& command, const nlohmann::json& config);

// History/future sources:
//   exhaustive:LEN      Sigma^LEN
//   closure:LEN         Sigma^{<=LEN}
//   sampled:N:LEN       N length-LEN prefixes drawn from the model
//   file:PATH           one comma-separated sequence per line, "-" for Null
std::vector<Sequence> resolve_sequences(const std::string& source, const LogitOracle& oracle,
                                        std::uint64_t seed, const std::string& purpose);

// Shortest round-trip decimal rendering.
std::string fmt(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

void register_make_model(CLI::App& app, GlobalOptions& g);
void register_build_matrix(CLI::App& app, GlobalOptions& g);
void register_analyze(CLI::App& app, GlobalOptions& g);
void register_lingen(CLI::App& app, GlobalOptions& g);
void register_steal(CLI::App& app, GlobalOptions& g);
// `status` receives the verify exit code once it has run.
void register_verify(CLI::App& app, GlobalOptions& g, int& status);

}  // namespace logitrank::cli
