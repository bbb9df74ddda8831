#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace chatlearn::text {

struct DecodedChar {
  char32_t code_point;
  std::size_t length;  // bytes consumed, >= 1
};

/// Decodes one code point at `offset`. Malformed sequences decode as U+FFFD
/// consuming a single byte, so iteration always makes progress.
DecodedChar decode_at(std::string_view s, std::size_t offset) noexcept;

bool is_han(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
/// ASCII punctuation plus the general, CJK and fullwidth punctuation blocks.
bool is_punctuation(char32_t cp) noexcept;

/// Lowercases ASCII, collapses whitespace runs to one space, trims the ends.
std::string normalize_key(std::string_view s);

std::string trim(std::string_view s);

}  // namespace chatlearn::text
