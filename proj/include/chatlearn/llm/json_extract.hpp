#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/llm/prompt.hpp"

namespace chatlearn::llm {

/// Finds the first balanced JSON value opening with `open` ('{' or '[') that
/// parses. Tolerates code fences and surrounding prose.
std::optional<nlohmann::json> extract_json(std::string_view text, char open);

/// Parses raw model output against the declared format. PlainText never
/// yields a payload.
std::optional<nlohmann::json> parse_output(std::string_view raw, OutputFormat format);

/// Convenience accessors over a parse_output payload.
std::optional<std::string> translated_text_of(const nlohmann::json& parsed);
std::optional<std::vector<std::string>> strings_of(const nlohmann::json& parsed);

}  // namespace chatlearn::llm
