#include "chatlearn/text/tokenizer.hpp"

#include "chatlearn/text/utf8.hpp"

namespace chatlearn::text {

namespace {

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

bool is_word_char(char32_t cp) { return !is_han(cp) && !is_space(cp) && !is_punctuation(cp); }

template <typename OnToken>
void scan(std::string_view s, OnToken&& on_token) {
  std::size_t i = 0;
  std::size_t word_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (word_start != std::string_view::npos) {
      on_token(s.substr(word_start, end - word_start), false);
      word_start = std::string_view::npos;
    }
  };
  while (i < s.size()) {
    const auto d = decode_at(s, i);
    const char32_t cp = d.code_point;
    if (is_han(cp)) {
      flush(i);
      on_token(s.substr(i, d.length), true);
    } else if (is_word_char(cp)) {
      if (word_start == std::string_view::npos) word_start = i;
    } else if (is_apostrophe(cp) && word_start != std::string_view::npos && i + d.length < s.size() &&
               is_word_char(decode_at(s, i + d.length).code_point)) {
      // "Chongqing's" stays one word.
    } else {
      flush(i);
    }
    i += d.length;
  }
  flush(s.size());
}

}  // namespace

TokenCounts count_tokens(std::string_view s) {
  TokenCounts counts;
  scan(s, [&](std::string_view, bool native) { native ? ++counts.native : ++counts.other; });
  return counts;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  scan(s, [&](std::string_view tok, bool) { out.emplace_back(tok); });
  return out;
}

}  // namespace chatlearn::text
