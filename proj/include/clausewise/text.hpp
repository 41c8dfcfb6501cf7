#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared across modules. ASCII only.
namespace clausewise::text {

std::string lower(std::string_view s);
std::string upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool is_number(std::string_view s);

/// "first", "second", ... for 1-based ordinals; falls back to "1th"-style digits past twenty.
std::string ordinal_word(std::size_t n);
/// Inverse of ordinal_word; returns 0 when the word is not an ordinal.
std::size_t ordinal_value(std::string_view word);

}  // namespace clausewise::text
