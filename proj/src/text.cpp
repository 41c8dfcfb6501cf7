#include "clausewise/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace clausewise::text {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool is_number(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  bool digits = false, dot = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

namespace {
constexpr std::array<std::string_view, 20> kOrdinals = {
    "first",       "second",     "third",      "fourth",     "fifth",     "sixth",     "seventh",
    "eighth",      "ninth",      "tenth",      "eleventh",   "twelfth",   "thirteenth", "fourteenth",
    "fifteenth",   "sixteenth",  "seventeenth", "eighteenth", "nineteenth", "twentieth"};
}

std::string ordinal_word(std::size_t n) {
  if (n >= 1 && n <= kOrdinals.size()) return std::string(kOrdinals[n - 1]);
  return std::to_string(n) + "th";
}

std::size_t ordinal_value(std::string_view word) {
  for (std::size_t i = 0; i < kOrdinals.size(); ++i)
    if (iequals(kOrdinals[i], word)) return i + 1;
  if (word.size() > 2 && word.substr(word.size() - 2) == "th") {
    auto digits = word.substr(0, word.size() - 2);
    if (std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      return static_cast<std::size_t>(std::stoul(std::string(digits)));
  }
  return 0;
}

}  // namespace clausewise::text
