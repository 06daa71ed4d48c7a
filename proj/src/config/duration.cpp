#include "cohort/config.hpp"
#include "cohort/errors.hpp"

#include <charconv>

namespace cohort {

namespace {

std::int64_t unit_seconds(char unit) {
  switch (unit) {
    case 's': return 1;
    case 'm': return 60;
    case 'h': return 3'600;
    case 'd': return 86'400;
    case 'w': return 604'800;
    default: return 0;
  }
}

bool is_space(char c) { return c == ' ' || c == '\t'; }

}  // namespace

Duration parse_duration(std::string_view text) {
  std::int64_t total = 0;
  std::size_t tokens = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::string_view token = text.substr(i, j - i);
    i = j;

    if (token.front() == '-') {
      throw ConfigError("negative duration '" + std::string(token) + "'");
    }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr == token.data()) {
      throw ConfigError("malformed duration token '" + std::string(token) + "'");
    }
    std::string_view unit(ptr, static_cast<std::size_t>(token.data() + token.size() - ptr));
    if (unit.size() != 1 || unit_seconds(unit.front()) == 0) {
      throw ConfigError("unknown duration unit '" + std::string(unit) + "' in '" +
                        std::string(token) + "' (expected one of s, m, h, d, w)");
    }
    std::int64_t seconds = 0;
    if (__builtin_mul_overflow(value, unit_seconds(unit.front()), &seconds) ||
        __builtin_add_overflow(total, seconds, &total)) {
      throw ConfigError("duration '" + std::string(text) + "' overflows");
    }
    ++tokens;
  }
  if (tokens == 0) throw ConfigError("empty duration");
  return Duration{total};
}

std::string format_duration(Duration d) {
  if (d.seconds == 0) return "0s";
  static constexpr std::pair<char, std::int64_t> units[] = {
      {'w', 604'800}, {'d', 86'400}, {'h', 3'600}, {'m', 60}, {'s', 1}};
  std::string out;
  std::int64_t rest = d.seconds;
  for (auto [unit, size] : units) {
    if (rest >= size) {
      if (!out.empty()) out += ' ';
      out += std::to_string(rest / size);
      out += unit;
      rest %= size;
    }
  }
  return out;
}

}  // namespace cohort
