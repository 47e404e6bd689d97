#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace logitrank {

using Token = std::uint32_t;

// A token string. The empty sequence plays the role of Null.
using Sequence = std::vector<Token>;

struct Alphabet {
  std::size_t size = 2;

  // Throws ValidationError unless size >= 2.
  void validate() const;
  bool contains(Token z) const { return z < size; }
};

Sequence concat(const Sequence& a, const Sequence& b);
Sequence append(const Sequence& a, Token z);

// True if `prefix` is a (not necessarily proper) prefix of `s`.
bool starts_with(const Sequence& s, const Sequence& prefix);

// Renders "0,1,1" (empty string for Null).
std::string to_string(const Sequence& s);
// Parses the format produced by to_string; whitespace tolerated.
Sequence parse_sequence(const std::string& text);

// Throws ValidationError if any token is outside the alphabet.
void check_tokens(const Sequence& s, std::size_t alphabet_size);

// |alphabet|^length, saturating at SIZE_MAX.
std::size_t count_sequences(std::size_t alphabet_size, std::size_t length);

// All sequences of exactly `length` tokens, lexicographic order.
// Throws EnumerationInfeasible if the count exceeds `budget`.
std::vector<Sequence> all_sequences(std::size_t alphabet_size,
                                    std::size_t length,
                                    std::size_t budget = 1u << 22);

// Sigma^{<= max_len}: Null first, then by length, lexicographic within a
// length. Throws EnumerationInfeasible if the total exceeds `budget`.
std::vector<Sequence> full_future_closure(std::size_t alphabet_size,
                                          std::size_t max_len,
                                          std::size_t budget = 1u << 22);

// Index of `s` among length-|s| sequences in lexicographic order.
std::size_t lexicographic_index(const Sequence& s, std::size_t alphabet_size);
Sequence sequence_from_index(std::size_t index, std::size_t length,
                             std::size_t alphabet_size);

}  // namespace logitrank
