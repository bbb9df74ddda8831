#include "chatlearn/assist/engine.hpp"

#include <algorithm>

#include "chatlearn/llm/json_extract.hpp"
#include "chatlearn/llm/prompt.hpp"
#include "chatlearn/text/tokenizer.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::assist {

using llm::Placeholder;
using metrics::EventKind;

std::vector<ByteSpan> detect_l1_segments(std::string_view text) {
  std::vector<ByteSpan> spans;
  std::size_t i = 0;
  std::optional<std::size_t> start;
  while (i < text.size()) {
    const auto d = text::decode_at(text, i);
    if (text::is_han(d.code_point)) {
      if (!start) start = i;
    } else if (start) {
      spans.push_back({*start, i - *start});
      start.reset();
    }
    i += d.length;
  }
  if (start) spans.push_back({*start, text.size() - *start});
  return spans;
}

namespace {

std::string_view direction_name(Direction d) { return d == Direction::ToNative ? "to-native" : "to-target"; }

std::vector<core::MessageId> ids_of(std::span<const core::Message> messages) {
  std::vector<core::MessageId> ids;
  for (const auto& m : messages) ids.push_back(m.id);
  return ids;
}

void require_active(const core::Session& s) {
  if (s.state() != core::SessionState::Active) throw Error(Errc::session_closed, "session is not active");
}

}  // namespace

nlohmann::ordered_json TranslationResult::to_json() const {
  nlohmann::ordered_json j;
  j["source_text"] = source_text;
  j["translated_text"] = translated_text;
  j["direction"] = std::string(direction_name(direction));
  j["context_used"] = context_used;
  return j;
}

nlohmann::ordered_json Explanation::to_json() const {
  nlohmann::ordered_json j;
  j["selection"] = selection;
  j["explanation_text"] = explanation_text;
  j["source_message_id"] = source_message_id;
  return j;
}

nlohmann::ordered_json ExtractionMapping::to_json() const {
  nlohmann::ordered_json j;
  j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& [l1, l2] : pairs) j["pairs"].push_back({l1, l2});
  j["translated_text"] = translated_text;
  return j;
}

std::optional<TranslationResult> ComprehensionCache::get(core::MessageId id) const {
  std::lock_guard lock(mu_);
  if (auto it = results_.find(id); it != results_.end()) return it->second;
  return std::nullopt;
}

void ComprehensionCache::put(core::MessageId id, TranslationResult r) {
  std::lock_guard lock(mu_);
  results_.insert_or_assign(id, std::move(r));
}

std::string AssistEngine::translate(std::string_view text, std::string_view from_tag, std::string_view to_tag,
                                    std::span<const core::Message> context, metrics::EventLog* log) {
  const auto prompt = llm::render(llm::builtin_template(llm::TemplateName::Translate),
                                  {{Placeholder::NativeLanguage, core::language_name(from_tag)},
                                   {Placeholder::TargetLanguage, core::language_name(to_tag)},
                                   {Placeholder::Context, core::render_history(context)},
                                   {Placeholder::UserInput, std::string(text)}});
  const auto response = gateway_.complete(prompt, llm::OutputFormat::TranslatedTextObject);
  if (response.parsed) {
    if (auto t = llm::translated_text_of(*response.parsed)) return *t;
  }
  if (log) log->append(EventKind::Degradation, {{"reason", "translation-parse-failure"}});
  return text::trim(response.raw_text);
}

TranslationResult AssistEngine::comprehend_full(const SessionContext& ctx, core::MessageId message_id) {
  require_active(ctx.session);
  const auto message = ctx.session.find(message_id);
  if (!message || message->sender != core::Sender::NS) {
    throw Error(Errc::unknown_message, "no NS message with id " + std::to_string(message_id));
  }

  bool cached = true;
  auto result = ctx.cache.get(message_id);
  if (!result) {
    cached = false;
    const auto window = ctx.session.history_window();
    const auto& cfg = ctx.session.config();
    TranslationResult r;
    r.source_text = message->original_text;
    r.direction = Direction::ToNative;
    r.context_used = ids_of(window);
    r.translated_text = translate(message->original_text, cfg.target_language, cfg.native_language, window, &ctx.log);
    ctx.cache.put(message_id, r);
    result = std::move(r);
  }

  nlohmann::ordered_json payload;
  payload["message_id"] = message_id;
  payload["translated_text"] = result->translated_text;
  payload["context_used"] = result->context_used;
  payload["cached"] = cached;
  ctx.log.append(EventKind::FullComprehension, std::move(payload));
  return *result;
}

Explanation AssistEngine::explore_expression(const SessionContext& ctx, core::MessageId message_id,
                                             std::string_view selection) {
  const auto& cfg = ctx.session.config();
  if (!cfg.learning_enabled()) throw Error(Errc::feature_disabled, "Expression Explorer is not part of Baseline");
  require_active(ctx.session);
  const auto message = ctx.session.find(message_id);
  if (!message) throw Error(Errc::unknown_message, "no message with id " + std::to_string(message_id));
  if (text::trim(selection).empty() || message->original_text.find(selection) == std::string::npos) {
    throw Error(Errc::selection_not_found, "selection does not occur in message " + std::to_string(message_id));
  }

  const auto window = ctx.session.history_window();
  // Explanation in the user's first language, example in the target language.
  const auto prompt = llm::render(llm::builtin_template(llm::TemplateName::Explain),
                                  {{Placeholder::TargetLanguage, core::language_name(cfg.native_language)},
                                   {Placeholder::NativeLanguage, core::language_name(cfg.target_language)},
                                   {Placeholder::Phrase, std::string(selection)},
                                   {Placeholder::Context, core::render_history(window)}});
  const auto response = gateway_.complete(prompt, llm::OutputFormat::PlainText);

  Explanation e{std::string(selection), text::trim(response.raw_text), message_id};
  nlohmann::ordered_json payload;
  payload["message_id"] = message_id;
  payload["selection"] = e.selection;
  payload["explanation"] = e.explanation_text;
  ctx.log.append(EventKind::PartialComprehension, std::move(payload));
  ctx.store.capture(selection, message->original_text, review::Source::Comprehension, ctx.session.last_id());
  return e;
}

ExtractionMapping AssistEngine::extract_and_map(const ExtractionRequest& request, metrics::EventLog* log) {
  const auto native = core::language_name(request.native_language);
  const auto target = core::language_name(request.target_language);

  // Stage 1: extract native-language phrases.
  std::vector<std::string> phrases;
  {
    const auto prompt = llm::render(llm::builtin_template(llm::TemplateName::Extract),
                                    {{Placeholder::NativeLanguage, native},
                                     {Placeholder::TargetLanguage, target},
                                     {Placeholder::UserInput, request.draft}});
    std::optional<llm::ProviderResponse> response;
    try {
      response = gateway_.complete(prompt, llm::OutputFormat::StringArray);
    } catch (const Error& e) {
      if (e.code() != Errc::provider_unavailable && e.code() != Errc::timeout) throw;
      throw StageFailure(1, e.what());
    }
    auto list = response->parsed ? llm::strings_of(*response->parsed) : std::nullopt;
    if (!list) throw StageFailure(1, "expected a JSON array of strings");
    for (auto& p : *list) {
      auto t = text::trim(p);
      if (t.empty() || std::find(phrases.begin(), phrases.end(), t) != phrases.end()) continue;
      phrases.push_back(std::move(t));
    }
  }

  // Stage 2: translate the whole draft with the regular translation prompt.
  ExtractionMapping mapping;
  mapping.translated_text = translate(request.draft, request.native_language, request.target_language,
                                      request.context, log);
  if (phrases.empty()) return mapping;

  // Stage 3: map each phrase onto a span of the translation.
  std::vector<std::string> spans;
  {
    const auto prompt = llm::render(llm::builtin_template(llm::TemplateName::Map),
                                    {{Placeholder::NativeLanguage, native},
                                     {Placeholder::TargetLanguage, target},
                                     {Placeholder::ListOfPhrases, llm::format_phrase_list(phrases)},
                                     {Placeholder::TranslatedText, mapping.translated_text}});
    std::optional<llm::ProviderResponse> response;
    try {
      response = gateway_.complete(prompt, llm::OutputFormat::StringArray);
    } catch (const Error& e) {
      if (e.code() != Errc::provider_unavailable && e.code() != Errc::timeout) throw;
      throw StageFailure(3, e.what(), mapping.translated_text);
    }
    auto list = response->parsed ? llm::strings_of(*response->parsed) : std::nullopt;
    if (!list) throw StageFailure(3, "expected a JSON array of strings", mapping.translated_text);
    spans = std::move(*list);
  }

  if (spans.size() != phrases.size() && log) {
    log->append(EventKind::Degradation, {{"reason", "mapping-length-mismatch"},
                                         {"expected", phrases.size()},
                                         {"received", spans.size()}});
  }
  spans.resize(phrases.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    std::string span = spans[i];
    if (!span.empty() && mapping.translated_text.find(span) == std::string::npos) {
      if (log) {
        log->append(EventKind::Degradation,
                    {{"reason", "mapping-violation"}, {"phrase", phrases[i]}, {"claimed_span", span}});
      }
      span.clear();
    }
    mapping.pairs.emplace_back(phrases[i], std::move(span));
  }
  return mapping;
}

ExpressionBuild AssistEngine::build_expression(const SessionContext& ctx, std::string_view draft) {
  if (text::trim(draft).empty()) throw Error(Errc::empty_text, "draft is empty");
  require_active(ctx.session);
  const auto& cfg = ctx.session.config();
  const auto window = ctx.session.history_window();

  ExpressionBuild build;
  build.translation.source_text = std::string(draft);
  build.translation.direction = Direction::ToTarget;
  build.translation.context_used = ids_of(window);

  if (cfg.learning_enabled()) build.cards = ctx.store.retrieve_expression_driven(draft);

  const bool extract = cfg.learning_enabled() && !detect_l1_segments(draft).empty();
  if (extract) {
    ExtractionRequest req{std::string(draft), window, cfg.native_language, cfg.target_language};
    try {
      build.mapping = extract_and_map(req, &ctx.log);
      build.translation.translated_text = build.mapping->translated_text;
    } catch (const StageFailure& f) {
      build.degraded = true;
      ctx.log.append(EventKind::Degradation, {{"reason", "partial-pipeline-failure"},
                                              {"stage", f.stage()},
                                              {"detail", f.what()}});
      if (f.translated_text()) {
        build.translation.translated_text = *f.translated_text();
      } else {
        build.translation.translated_text =
            translate(draft, cfg.native_language, cfg.target_language, window, &ctx.log);
      }
    }
  } else {
    build.translation.translated_text = translate(draft, cfg.native_language, cfg.target_language, window, &ctx.log);
  }

  const auto counts = text::count_tokens(draft);
  nlohmann::ordered_json payload;
  payload["draft"] = std::string(draft);
  payload["translated_text"] = build.translation.translated_text;
  payload["l1_tokens"] = counts.native;
  payload["total_tokens"] = counts.total();
  payload["pairs"] = build.mapping ? build.mapping->to_json()["pairs"] : nlohmann::ordered_json::array();
  payload["degraded"] = build.degraded;
  ctx.log.append(EventKind::ExpressionSupport, std::move(payload));

  if (build.mapping) {
    const auto turn = ctx.session.last_id();
    for (const auto& [l1, l2] : build.mapping->pairs) {
      if (!l2.empty()) ctx.store.capture(l2, build.translation.translated_text, review::Source::Expression, turn);
    }
  }
  return build;
}

}  // namespace chatlearn::assist
