#pragma once

// Tag normalization (urls, hashtags, emojis, mentions) and tokenization.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "unicode.hpp"

namespace postimpact {

inline constexpr std::string_view kUrlTag = "<url>";
inline constexpr std::string_view kHashtagTag = "<hashtag>";
inline constexpr std::string_view kEmojiTag = "<emoji>";
inline constexpr std::string_view kMentionTag = "<mentions>";

struct TagCounts {
  std::size_t urls = 0;
  std::size_t hashtags = 0;
  std::size_t emojis = 0;
  std::size_t mentions = 0;

  friend bool operator==(const TagCounts&, const TagCounts&) = default;
};

struct NormalizedText {
  std::string text;
  TagCounts counts;
};

using TokenStream = std::vector<std::string>;

namespace textprep_detail {

inline bool is_regional_indicator(char32_t c) { return c >= 0x1F1E6 && c <= 0x1F1FF; }

inline bool is_emoji_base(char32_t c) {
  return (c >= 0x1F300 && c <= 0x1F5FF)     // misc symbols & pictographs
         || (c >= 0x1F600 && c <= 0x1F64F)  // emoticons
         || (c >= 0x1F680 && c <= 0x1F6FF)  // transport & map
         || (c >= 0x1F900 && c <= 0x1F9FF)  // supplemental symbols & pictographs
         || (c >= 0x1FA70 && c <= 0x1FAFF)  // symbols & pictographs ext-A
         || (c >= 0x2600 && c <= 0x27BF)    // misc symbols, dingbats
         || is_regional_indicator(c);
}

inline bool is_emoji_modifier(char32_t c) {
  return c == 0xFE0E || c == 0xFE0F || c == 0x20E3 || (c >= 0x1F3FB && c <= 0x1F3FF);
}

inline constexpr char32_t kZwj = 0x200D;

/// Byte length of the emoji sequence starting at `pos`, or 0.
inline std::size_t emoji_length(std::string_view s, std::size_t pos) {
  const auto first = unicode::decode_at(s, pos);
  if (!is_emoji_base(first.value)) return 0;
  std::size_t end = pos + first.length;
  if (is_regional_indicator(first.value)) {
    if (end < s.size()) {
      const auto next = unicode::decode_at(s, end);
      if (is_regional_indicator(next.value)) end += next.length;
    }
    return end - pos;
  }
  while (end < s.size()) {
    const auto next = unicode::decode_at(s, end);
    if (is_emoji_modifier(next.value)) {
      end += next.length;
      continue;
    }
    if (next.value == kZwj && end + next.length < s.size()) {
      const auto joined = unicode::decode_at(s, end + next.length);
      if (is_emoji_base(joined.value) && !is_regional_indicator(joined.value)) {
        end += next.length + joined.length;
        continue;
      }
    }
    break;
  }
  return end - pos;
}

inline bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

inline bool is_url_trailing_punct(char32_t c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case ')': case ']': case '}':
    case '"': case '\'': case 0xBB: case 0x201D: case 0x2019:
      return true;
    default:
      return false;
  }
}

/// Byte length of a URL starting at `pos` (scheme-prefixed or bare www.), or 0.
inline std::size_t url_length(std::string_view s, std::size_t pos) {
  std::size_t prefix = 0;
  if (starts_with_ci(s, pos, "https://")) prefix = 8;
  else if (starts_with_ci(s, pos, "http://")) prefix = 7;
  else if (starts_with_ci(s, pos, "www.")) prefix = 4;
  else return 0;
  std::size_t end = pos + prefix;
  std::size_t last_keep = end;
  while (end < s.size()) {
    const auto cp = unicode::decode_at(s, end);
    if (unicode::is_whitespace(cp.value)) break;
    end += cp.length;
    if (!is_url_trailing_punct(cp.value)) last_keep = end;
  }
  if (last_keep == pos + prefix) return 0;
  return last_keep - pos;
}

inline bool is_tag_word_char(char32_t c) { return c == U'_' || unicode::is_word_char(c); }

/// Byte length of `#word` / `@word` at `pos`, or 0.
inline std::size_t sigil_word_length(std::string_view s, std::size_t pos) {
  std::size_t end = pos + 1;
  while (end < s.size()) {
    const auto cp = unicode::decode_at(s, end);
    if (!is_tag_word_char(cp.value)) break;
    end += cp.length;
  }
  return end == pos + 1 ? 0 : end - pos;
}

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

inline constexpr std::array<std::string_view, 4> kTags = {kUrlTag, kHashtagTag, kEmojiTag, kMentionTag};

}  // namespace textprep_detail

/// Replaces every url, hashtag, emoji and mention with its canonical tag.
/// Tags are separated from neighbouring text by one space. Counts are the
/// number of tags present in the result, so normalize(normalize(t)) == normalize(t).
inline NormalizedText normalize(std::string_view text) {
  using namespace textprep_detail;
  NormalizedText out;
  out.text.reserve(text.size());
  bool space_after_tag = false;
  char32_t prev = U' ';      // last input codepoint consumed
  char32_t last_out = U' ';  // last codepoint written

  auto emit_tag = [&](std::string_view tag) {
    if (!unicode::is_whitespace(last_out)) out.text += ' ';
    out.text += tag;
    last_out = U'>';
    space_after_tag = true;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto cp = unicode::decode_at(text, pos);
    std::size_t len = 0;
    std::string_view tag;
    if (!unicode::is_word_char(prev) && (len = url_length(text, pos)) > 0) {
      tag = kUrlTag;
    } else if (cp.value == U'#' && (len = sigil_word_length(text, pos)) > 0) {
      tag = kHashtagTag;
    } else if (cp.value == U'@' && (len = sigil_word_length(text, pos)) > 0) {
      tag = kMentionTag;
    } else if ((len = emoji_length(text, pos)) > 0) {
      tag = kEmojiTag;
    }

    if (len > 0) {
      emit_tag(tag);
      // A tag is always followed by a space in the output, so the next
      // codepoint sees a boundary regardless of how the span ended.
      prev = U' ';
      pos += len;
      continue;
    }

    if (space_after_tag && !unicode::is_whitespace(cp.value)) out.text += ' ';
    space_after_tag = false;
    out.text.append(text.substr(pos, cp.length));
    prev = last_out = cp.value;
    pos += cp.length;
  }

  out.counts.urls = count_occurrences(out.text, kUrlTag);
  out.counts.hashtags = count_occurrences(out.text, kHashtagTag);
  out.counts.emojis = count_occurrences(out.text, kEmojiTag);
  out.counts.mentions = count_occurrences(out.text, kMentionTag);
  return out;
}

/// Lowercased word tokens. Whitespace, punctuation and symbols separate
/// tokens and are dropped; the four canonical tags are emitted whole.
inline TokenStream tokenize(std::string_view text) {
  using namespace textprep_detail;
  TokenStream tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == '<') {
      bool matched = false;
      for (std::string_view tag : kTags) {
        if (text.substr(pos, tag.size()) == tag) {
          flush();
          tokens.emplace_back(tag);
          pos += tag.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    const auto cp = unicode::decode_at(text, pos);
    if (is_tag_word_char(cp.value)) unicode::append_utf8(current, unicode::to_lower(cp.value));
    else flush();
    pos += cp.length;
  }
  flush();
  return tokens;
}

inline TokenStream tokenize(const NormalizedText& text) { return tokenize(std::string_view(text.text)); }

}  // namespace postimpact
