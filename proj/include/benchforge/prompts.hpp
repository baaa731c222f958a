#pragma once

#include <string>
#include <string_view>

// Prompt templates compiled in from assets/prompts/*.txt. Placeholders use
// `{name}` and are filled by text::render_template.
namespace benchforge::prompts {

std::string_view detect_language_template();  // {text}
std::string_view translate_template();  // {source_language} {source_lang} {target_language} {target_lang} {source_text}
std::string_view judge_template();  // {source_language} {target_language} {criteria} {score_format} {source_text} {translated_text}

/// Asset file names including their version suffix, e.g. "judge.v1".
std::string_view detect_language_version();
std::string_view translate_version();
std::string_view judge_version();

/// Display name for a language code ("vie_Latn" -> "Vietnamese"); falls back to the code.
std::string language_name(std::string_view code);

}  // namespace benchforge::prompts
