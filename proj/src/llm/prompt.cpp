#include "chatlearn/llm/prompt.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

#include "chatlearn/error.hpp"

namespace chatlearn::llm {

namespace {

constexpr std::array kAllPlaceholders = {
    Placeholder::UserInput,      Placeholder::NativeLanguage, Placeholder::TargetLanguage,
    Placeholder::Context,        Placeholder::Phrase,         Placeholder::TranslatedText,
    Placeholder::ListOfPhrases,
};

// Comprehension and expression assistance, and extractor stage 2.
constexpr std::string_view kTranslate =
    "Instruction: Translate the user's message (in [NATIVE_LANGUAGE]) into fluent [TARGET_LANGUAGE].\n"
    "Requirement:\n"
    "• Consider the given context only to understand the situation.\n"
    "• Do not include or translate the context itself in the output.\n"
    "• Ensure the translation is natural and fluent.\n"
    "Input:\n"
    "Context: [CONTEXT]\n"
    "User Message: [USER_INPUT]\n"
    "Output format: {\"translated_text\": \"...\"}\n";

constexpr std::string_view kExplain =
    "Background: You're an [TARGET_LANGUAGE] explainer for a non-native speaker. The user is a non-native "
    "speaker.\n"
    "Requirement: Given the phrase: \"[PHRASE]\", explain it in [TARGET_LANGUAGE]. Then, try to slightly help "
    "the user internalize it. For example, you can give another daily example (in [NATIVE_LANGUAGE]) to "
    "demonstrate how to use the important expression in the phrase, or you can use other flexible ways to "
    "help.\n"
    "• Be concise, because the user is in a real-time communication context.\n"
    "• Context (if any): [CONTEXT].\n"
    "• Note: The context is only for understanding the situation and should NOT be included in the "
    "output.\n"
    "• Explanations must be simple, easy to understand, and in plain text (not markdown).\n"
    "Output format: Plain text explanation in [TARGET_LANGUAGE], with a short supporting example in "
    "[NATIVE_LANGUAGE].\n";

constexpr std::string_view kExtract =
    "Instruction: You are a text analyzer. The user is a non-native speaker of [TARGET_LANGUAGE]; His / Her "
    "native language is [NATIVE_LANGUAGE] The user input may contain both [NATIVE_LANGUAGE] and "
    "[TARGET_LANGUAGE].\n"
    "Requirement:\n"
    "• Extract only meaningful [NATIVE_LANGUAGE] phrases that should be explained to a learner of "
    "[TARGET_LANGUAGE].\n"
    "• Ignore URLs, numbers, emoji, and all non-Chinese characters.\n"
    "• Deduplicate phrases; do not add explanations.\n"
    "Input:\n"
    "User input: [USER_INPUT]\n"
    "Output format: [\"短语1\", \"短语2\"].\n";

constexpr std::string_view kMap =
    "Instruction: For each [NATIVE_LANGUAGE] phrase, find the corresponding exact [TARGET_LANGUAGE] "
    "phrase(s) in the translated sentence.\n"
    "Requirement:\n"
    "• Return results in the same order as the input Chinese phrases.\n"
    "• Each item must be the exact phrase from the translated sentence.\n"
    "• If a phrase is not found, return an empty string.\n"
    "Input:\n"
    "Original [NATIVE_LANGUAGE] phrases: [LIST_OF_PHRASES]\n"
    "Translated sentence: \"[TRANSLATED_TEXT]\"\n"
    "Output format: [\"baby\", \"happy\"]\n";

const PromptTemplate kTemplates[] = {
    {TemplateName::Translate, kTranslate, OutputFormat::TranslatedTextObject},
    {TemplateName::Explain, kExplain, OutputFormat::PlainText},
    {TemplateName::Extract, kExtract, OutputFormat::StringArray},
    {TemplateName::Map, kMap, OutputFormat::StringArray},
};

}  // namespace

std::string_view token(Placeholder p) noexcept {
  switch (p) {
    case Placeholder::UserInput: return "[USER_INPUT]";
    case Placeholder::NativeLanguage: return "[NATIVE_LANGUAGE]";
    case Placeholder::TargetLanguage: return "[TARGET_LANGUAGE]";
    case Placeholder::Context: return "[CONTEXT]";
    case Placeholder::Phrase: return "[PHRASE]";
    case Placeholder::TranslatedText: return "[TRANSLATED_TEXT]";
    case Placeholder::ListOfPhrases: return "[LIST_OF_PHRASES]";
  }
  return "";
}

std::string_view to_string(TemplateName n) noexcept {
  switch (n) {
    case TemplateName::Translate: return "Translate";
    case TemplateName::Explain: return "Explain";
    case TemplateName::Extract: return "Extract";
    case TemplateName::Map: return "Map";
  }
  return "";
}

std::vector<Placeholder> PromptTemplate::placeholders() const {
  std::vector<std::pair<std::size_t, Placeholder>> found;
  for (auto p : kAllPlaceholders) {
    if (auto pos = body.find(token(p)); pos != std::string_view::npos) found.emplace_back(pos, p);
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Placeholder> out;
  for (const auto& [_, p] : found) out.push_back(p);
  return out;
}

const PromptTemplate& builtin_template(TemplateName name) {
  for (const auto& t : kTemplates) {
    if (t.name == name) return t;
  }
  throw Error(Errc::missing_placeholder, "no such template");
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  const std::string_view body = tmpl.body;
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t i = 0;
  while (i < body.size()) {
    const auto open = body.find('[', i);
    if (open == std::string_view::npos) {
      out.append(body.substr(i));
      break;
    }
    out.append(body.substr(i, open - i));
    bool matched = false;
    for (auto p : kAllPlaceholders) {
      const auto tok = token(p);
      if (body.substr(open, tok.size()) != tok) continue;
      auto it = bindings.find(p);
      if (p == Placeholder::Context && (it == bindings.end() || it->second.empty())) {
        out.append("N/A");
      } else if (it == bindings.end()) {
        throw Error(Errc::missing_placeholder,
                    "template " + std::string(to_string(tmpl.name)) + " needs " + std::string(tok));
      } else {
        out.append(it->second);
      }
      i = open + tok.size();
      matched = true;
      break;
    }
    if (!matched) {
      out.push_back('[');
      i = open + 1;
    }
  }
  return out;
}

std::string format_phrase_list(const std::vector<std::string>& phrases) {
  std::string out = "[";
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i) out.append(", ");
    out.append(nlohmann::json(phrases[i]).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  }
  out.push_back(']');
  return out;
}

}  // namespace chatlearn::llm
