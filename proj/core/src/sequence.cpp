#include "logitrank/sequence.hpp"

#include <limits>
#include <sstream>

#include "logitrank/error.hpp"

namespace logitrank {

void Alphabet::validate() const {
  if (size < 2) throw ValidationError("alphabet size must be at least 2");
}

Sequence concat(const Sequence& a, const Sequence& b) {
  Sequence out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Sequence append(const Sequence& a, Token z) {
  Sequence out = a;
  out.push_back(z);
  return out;
}

bool starts_with(const Sequence& s, const Sequence& prefix) {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (s[i] != prefix[i]) return false;
  return true;
}

std::string to_string(const Sequence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out;
}

Sequence parse_sequence(const std::string& text) {
  Sequence out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) {
      if (text.find_first_not_of(" \t,") == std::string::npos) continue;
      throw ValidationError("empty token in sequence '" + text + "'");
    }
    const auto last = item.find_last_not_of(" \t");
    const std::string trimmed = item.substr(first, last - first + 1);
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(trimmed, &used);
    } catch (const std::exception&) {
      throw ValidationError("bad token '" + trimmed + "' in sequence");
    }
    if (used != trimmed.size() || value > std::numeric_limits<Token>::max())
      throw ValidationError("bad token '" + trimmed + "' in sequence");
    out.push_back(static_cast<Token>(value));
  }
  return out;
}

void check_tokens(const Sequence& s, std::size_t alphabet_size) {
  for (Token z : s)
    if (z >= alphabet_size)
      throw ValidationError("token " + std::to_string(z) + " outside alphabet of size " +
                            std::to_string(alphabet_size));
}

std::size_t count_sequences(std::size_t alphabet_size, std::size_t length) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (alphabet_size != 0 && n > std::numeric_limits<std::size_t>::max() / alphabet_size)
      return std::numeric_limits<std::size_t>::max();
    n *= alphabet_size;
  }
  return n;
}

std::vector<Sequence> all_sequences(std::size_t alphabet_size, std::size_t length,
                                    std::size_t budget) {
  const std::size_t n = count_sequences(alphabet_size, length);
  if (n > budget)
    throw EnumerationInfeasible("enumeration infeasible: " + std::to_string(alphabet_size) +
                                "^" + std::to_string(length) + " sequences exceed budget " +
                                std::to_string(budget));
  std::vector<Sequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sequence_from_index(i, length, alphabet_size));
  return out;
}

std::vector<Sequence> full_future_closure(std::size_t alphabet_size, std::size_t max_len,
                                          std::size_t budget) {
  std::size_t total = 0;
  for (std::size_t len = 0; len <= max_len; ++len) {
    const std::size_t n = count_sequences(alphabet_size, len);
    if (n > budget || total > budget - n)
      throw EnumerationInfeasible("enumeration infeasible: closure up to length " +
                                  std::to_string(max_len) + " exceeds budget " +
                                  std::to_string(budget));
    total += n;
  }
  std::vector<Sequence> out;
  out.reserve(total);
  for (std::size_t len = 0; len <= max_len; ++len) {
    auto level = all_sequences(alphabet_size, len, budget);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::size_t lexicographic_index(const Sequence& s, std::size_t alphabet_size) {
  std::size_t idx = 0;
  for (Token z : s) idx = idx * alphabet_size + z;
  return idx;
}

Sequence sequence_from_index(std::size_t index, std::size_t length,
                             std::size_t alphabet_size) {
  Sequence s(length);
  for (std::size_t i = length; i-- > 0;) {
    s[i] = static_cast<Token>(index % alphabet_size);
    index /= alphabet_size;
  }
  return s;
}

}  // namespace logitrank
