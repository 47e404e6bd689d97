#include "common.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "logitrank/error.hpp"

namespace logitrank::cli {

std::filesystem::path output_path(const GlobalOptions& g, const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_absolute()) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p;
  }
  std::string dir = g.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("LOGITRANK_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  const std::filesystem::path full = std::filesystem::path(dir) / p;
  if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path());
  return full;
}

nlohmann::json provenance(const std::string& command, const nlohmann::json& config) {
  return {{"toolkit", "logitrank"},
          {"version", LOGITRANK_VERSION_STRING},
          {"command", command},
          {"config", config}};
}

namespace {

std::size_t parse_size(const std::string& s, const std::string& source) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size())
    throw ValidationError("bad number '" + s + "' in source '" + source + "'");
  return static_cast<std::size_t>(v);
}

std::vector<Sequence> read_sequence_file(const std::string& path, std::size_t alphabet) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read sequence file " + path);
  std::vector<Sequence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string body = line.substr(first);
    Sequence s = body == "-" ? Sequence{} : parse_sequence(body);
    check_tokens(s, alphabet);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<Sequence> resolve_sequences(const std::string& source, const LogitOracle& oracle,
                                        std::uint64_t seed, const std::string& purpose) {
  const auto colon = source.find(':');
  const std::string kind = source.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : source.substr(colon + 1);
  const std::size_t k = oracle.alphabet_size();
  if (kind == "exhaustive") return all_sequences(k, parse_size(arg, source));
  if (kind == "closure") return full_future_closure(k, parse_size(arg, source));
  if (kind == "file") return read_sequence_file(arg, k);
  if (kind == "sampled") {
    const auto c2 = arg.find(':');
    if (c2 == std::string::npos) throw ValidationError("sampled source needs N:LEN");
    const std::size_t n = parse_size(arg.substr(0, c2), source);
    const std::size_t len = parse_size(arg.substr(c2 + 1), source);
    if (len >= oracle.horizon())
      throw ValidationError("sampled length must be below the model horizon");
    Rng rng(seed, purpose);
    std::vector<Sequence> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix_sample(oracle, len, rng));
    return out;
  }
  throw ValidationError("unknown sequence source '" + source +
                        "' (exhaustive:LEN, closure:LEN, sampled:N:LEN, file:PATH)");
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace logitrank::cli
