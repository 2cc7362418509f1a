#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wsckit {

// ASCII-only case folding; bytes >= 0x80 pass through untouched.
std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

// Trims and collapses every whitespace run to a single space.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Split on a single character, keeping empty fields.
std::vector<std::string> split(std::string_view s, char sep);

// Lowercase + collapsed whitespace. Used for noun matching, overlap removal
// and WNLI alignment.
std::string match_normalize(std::string_view s);

bool is_ascii_punct(char c);
bool is_ascii_upper(char c);
bool has_alnum(std::string_view s);

// True for the first byte of a UTF-8 code point.
inline bool is_utf8_boundary(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace wsckit
