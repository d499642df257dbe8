#pragma once

// UTF-8 decoding and character classes, backed by ICU's property tables.

#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace postimpact::unicode {

/// One decoded codepoint with its byte span in the source.
struct Codepoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

/// Decodes the codepoint starting at byte `pos`. Ill-formed bytes decode to
/// U+FFFD spanning one byte so scanning always makes progress.
inline Codepoint decode_at(std::string_view s, std::size_t pos) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = static_cast<int32_t>(pos);
  const auto n = static_cast<int32_t>(s.size());
  UChar32 c;
  U8_NEXT(bytes, i, n, c);
  if (c < 0) c = 0xFFFD;
  return {static_cast<char32_t>(c), pos, static_cast<std::size_t>(i) - pos};
}

/// Calls `f(Codepoint)` for every codepoint in `s`.
template <typename F>
void for_each_codepoint(std::string_view s, F&& f) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const Codepoint cp = decode_at(s, pos);
    f(cp);
    pos += cp.length;
  }
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for_each_codepoint(s, [&](const Codepoint&) { ++n; });
  return n;
}

inline void append_utf8(std::string& out, char32_t c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
  if (error) {
    out += "\xEF\xBF\xBD";
    return;
  }
  out.append(buf, static_cast<std::size_t>(len));
}

inline bool is_whitespace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
inline bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }
inline bool is_upper(char32_t c) { return u_isupper(static_cast<UChar32>(c)); }
inline bool is_lower(char32_t c) { return u_islower(static_cast<UChar32>(c)); }
inline bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }

/// Combining marks stay attached to the word they modify.
inline bool is_mark(char32_t c) {
  const auto cat = u_charType(static_cast<UChar32>(c));
  return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK || cat == U_ENCLOSING_MARK;
}

inline bool is_word_char(char32_t c) { return is_letter(c) || is_digit(c) || is_mark(c); }

inline char32_t to_lower(char32_t c) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))); }

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for_each_codepoint(s, [&](const Codepoint& cp) { append_utf8(out, to_lower(cp.value)); });
  return out;
}

/// Trims Unicode whitespace from both ends.
inline std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end) {
    const Codepoint cp = decode_at(s, begin);
    if (!is_whitespace(cp.value)) break;
    begin += cp.length;
  }
  // Walk forward to find the last non-whitespace codepoint; UTF-8 has no
  // cheap reverse decode that is also robust to ill-formed input.
  std::size_t last_end = begin;
  std::size_t pos = begin;
  while (pos < end) {
    const Codepoint cp = decode_at(s, pos);
    pos += cp.length;
    if (!is_whitespace(cp.value)) last_end = pos;
  }
  return s.substr(begin, last_end - begin);
}

}  // namespace postimpact::unicode
