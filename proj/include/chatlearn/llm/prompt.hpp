#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chatlearn::llm {

enum class TemplateName { Translate, Explain, Extract, Map };

enum class Placeholder {
  UserInput,
  NativeLanguage,
  TargetLanguage,
  Context,
  Phrase,
  TranslatedText,
  ListOfPhrases,
};

/// What the template asks the model to return.
enum class OutputFormat {
  PlainText,
  TranslatedTextObject,  // {"translated_text": "..."}
  StringArray,           // ["...", "..."]
};

/// Bracketed token as it appears in template bodies, e.g. "[USER_INPUT]".
std::string_view token(Placeholder p) noexcept;
std::string_view to_string(TemplateName n) noexcept;

struct PromptTemplate {
  TemplateName name;
  std::string_view body;
  OutputFormat format;

  /// Distinct placeholders in order of first appearance.
  std::vector<Placeholder> placeholders() const;
};

const PromptTemplate& builtin_template(TemplateName name);

using Bindings = std::map<Placeholder, std::string>;

/// Substitutes every placeholder in one left-to-right pass; substituted text is
/// never rescanned. A missing or empty Context binds to "N/A". Any other
/// missing binding raises missing-placeholder.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// Formats phrases the way the map stage lists them: ["a", "b"].
std::string format_phrase_list(const std::vector<std::string>& phrases);

}  // namespace chatlearn::llm
