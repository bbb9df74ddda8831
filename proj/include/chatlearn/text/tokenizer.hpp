#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace chatlearn::text {

/// Token split used by every count in the system: each Han character is one
/// token; outside Han runs, words are separated by whitespace and punctuation.
/// An apostrophe between two word characters stays inside the word.
struct TokenCounts {
  std::size_t native = 0;  // Han characters
  std::size_t other = 0;   // word tokens

  std::size_t total() const noexcept { return native + other; }
};

TokenCounts count_tokens(std::string_view s);

/// Word tokens (Latin words, one entry per Han character) in order.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace chatlearn::text
