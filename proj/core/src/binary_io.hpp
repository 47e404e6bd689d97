#pragma once

// Little-endian container helpers shared by the model and .elm formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "logitrank/error.hpp"

namespace logitrank::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64s(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw FormatError(std::string("truncated file while reading ") + what);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v;
  read_exact(in, &v, sizeof v, what);
  return v;
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  std::uint64_t v;
  read_exact(in, &v, sizeof v, what);
  return v;
}

inline void expect_magic(std::istream& in, const char (&magic)[13]) {
  std::array<char, 12> got{};
  read_exact(in, got.data(), got.size(), "magic");
  if (std::memcmp(got.data(), magic, 12) != 0)
    throw FormatError(std::string("bad magic: expected ") + magic);
}

inline std::uint64_t fnv1a64(const std::vector<double>& payload) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < payload.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string checksum_string(const std::vector<double>& payload) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(payload);
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) hex[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return "fnv1a64:" + hex;
}

}  // namespace logitrank::detail
