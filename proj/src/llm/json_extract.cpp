#include "chatlearn/llm/json_extract.hpp"

namespace chatlearn::llm {

namespace {

// Index one past the bracket closing the value opened at `start`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::json> extract_json(std::string_view text, char open) {
  std::size_t pos = 0;
  while ((pos = text.find(open, pos)) != std::string_view::npos) {
    if (const auto end = balanced_end(text, pos); end != std::string_view::npos) {
      auto parsed = nlohmann::json::parse(text.substr(pos, end - pos), nullptr, false);
      if (!parsed.is_discarded()) return parsed;
    }
    ++pos;
  }
  return std::nullopt;
}

std::optional<nlohmann::json> parse_output(std::string_view raw, OutputFormat format) {
  switch (format) {
    case OutputFormat::PlainText:
      return std::nullopt;
    case OutputFormat::TranslatedTextObject: {
      std::size_t pos = 0;
      // Skip objects that do not carry the expected key.
      while ((pos = raw.find('{', pos)) != std::string_view::npos) {
        auto j = extract_json(raw.substr(pos), '{');
        if (!j) return std::nullopt;
        if (translated_text_of(*j)) return j;
        ++pos;
      }
      return std::nullopt;
    }
    case OutputFormat::StringArray: {
      auto j = extract_json(raw, '[');
      if (j && strings_of(*j)) return j;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<std::string> translated_text_of(const nlohmann::json& parsed) {
  if (!parsed.is_object()) return std::nullopt;
  auto it = parsed.find("translated_text");
  if (it == parsed.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<std::vector<std::string>> strings_of(const nlohmann::json& parsed) {
  if (!parsed.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& v : parsed) {
    if (!v.is_string()) return std::nullopt;
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace chatlearn::llm
