#pragma once

#include <chrono>
#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace postimpact {

/// Calendar timestamp as written in the source record. Features use the
/// wall-clock fields directly; the UTC offset is kept only for round trips.
struct Timestamp {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;   // 0..23
  int minute = 0;
  int second = 0;
  std::optional<int> utc_offset_minutes;

  /// 0 = Sunday .. 6 = Saturday.
  int weekday() const {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    return static_cast<int>(std::chrono::weekday{sys_days{ymd}}.c_encoding());
  }

  std::string to_iso() const {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", year, month, day, hour, minute, second);
    std::string out = buf;
    if (utc_offset_minutes) {
      const int off = *utc_offset_minutes;
      if (off == 0) {
        out += 'Z';
      } else {
        const int a = off < 0 ? -off : off;
        std::snprintf(buf, sizeof buf, "%c%02d:%02d", off < 0 ? '-' : '+', a / 60, a % 60);
        out += buf;
      }
    }
    return out;
  }

  static Timestamp from_system(std::chrono::system_clock::time_point tp) {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(tp);
    const year_month_day ymd{days};
    const hh_mm_ss hms{floor<seconds>(tp - days)};
    Timestamp t;
    t.year = static_cast<int>(ymd.year());
    t.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    t.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    t.hour = static_cast<int>(hms.hours().count());
    t.minute = static_cast<int>(hms.minutes().count());
    t.second = static_cast<int>(hms.seconds().count());
    t.utc_offset_minutes = 0;
    return t;
  }

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

namespace detail {

inline bool parse_fixed(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  std::from_chars(s.data() + pos, s.data() + pos + width, out);
  return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|(+|-)HH[:]MM]`.
inline std::optional<Timestamp> parse_iso8601(std::string_view s) {
  using detail::parse_fixed;
  Timestamp t;
  if (!parse_fixed(s, 0, 4, t.year) || s.size() < 10 || s[4] != '-' || !parse_fixed(s, 5, 2, t.month) ||
      s[7] != '-' || !parse_fixed(s, 8, 2, t.day))
    return std::nullopt;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!parse_fixed(s, pos + 1, 2, t.hour) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !parse_fixed(s, pos + 4, 2, t.minute))
      return std::nullopt;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!parse_fixed(s, pos + 1, 2, t.second)) return std::nullopt;
      pos += 3;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
      }
    }
    if (pos < s.size()) {
      if (s[pos] == 'Z') {
        t.utc_offset_minutes = 0;
        ++pos;
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        int hh = 0, mm = 0;
        if (!parse_fixed(s, pos + 1, 2, hh)) return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (!parse_fixed(s, pos, 2, mm)) return std::nullopt;
        pos += 2;
        if (hh > 23 || mm > 59) return std::nullopt;
        t.utc_offset_minutes = sign * (hh * 60 + mm);
      }
    }
  }
  if (pos != s.size()) return std::nullopt;
  if (t.month < 1 || t.month > 12 || t.hour > 23 || t.minute > 59 || t.second > 60) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{t.year}, std::chrono::month{static_cast<unsigned>(t.month)},
                           std::chrono::day{static_cast<unsigned>(t.day)}};
  if (!ymd.ok()) return std::nullopt;
  return t;
}

}  // namespace postimpact
