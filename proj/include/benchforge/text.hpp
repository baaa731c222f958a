#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace benchforge::text {

/// Unicode NFC. Throws std::runtime_error on invalid UTF-8.
std::string nfc(std::string_view utf8);
bool is_nfc(std::string_view utf8);

std::size_t code_point_count(std::string_view utf8);
/// Decodes UTF-8; invalid bytes map to U+FFFD.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

/// Splits on Unicode whitespace.
std::vector<std::string_view> split_whitespace(std::string_view utf8);
std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

std::string sha256_hex(std::string_view data);

/// Replaces `{name}` for every name present in `values` in a single pass.
/// Inserted text is never rescanned, and unknown braces pass through verbatim.
std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& values);

/// Contents between the last `<tag>` and the following `</tag>`, trimmed of
/// one leading and trailing newline.
std::string extract_tagged(std::string_view s, std::string_view tag);

}  // namespace benchforge::text
