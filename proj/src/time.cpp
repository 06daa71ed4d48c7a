#include "cohort/time.hpp"

#include "cohort/errors.hpp"

#include <chrono>
#include <cstdio>
#include <limits>

namespace cohort {

namespace {

std::string config_error_text(const std::string& message, std::size_t line, std::size_t column,
                              const std::string& source) {
  if (!source.empty()) {
    if (line == 0) return source + ": " + message;
    return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
  if (line == 0) return message;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line, std::size_t column, const std::string& source)
    : std::runtime_error(config_error_text(message, line, column, source)),
      message_(message),
      line_(line),
      column_(column),
      source_(source) {}

Timestamp add_seconds(Timestamp anchor, std::int64_t seconds) {
  std::int64_t delta = 0;
  std::int64_t result = 0;
  if (__builtin_mul_overflow(seconds, kMicrosPerSecond, &delta) ||
      __builtin_add_overflow(anchor.micros, delta, &result)) {
    throw std::overflow_error("timestamp overflow adding " + std::to_string(seconds) +
                              " s to " + std::to_string(anchor.micros) + " us");
  }
  return {result};
}

namespace {

bool take_digits(std::string_view& s, std::size_t n, int& out) {
  if (s.size() < n) return false;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  s.remove_prefix(n);
  return true;
}

bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  std::int64_t frac_us = 0;
  if (!take_digits(s, 4, y) || !take_char(s, '-') || !take_digits(s, 2, mo) ||
      !take_char(s, '-') || !take_digits(s, 2, d)) {
    return std::nullopt;
  }
  if (!s.empty() && (s.front() == 'T' || s.front() == ' ')) {
    s.remove_prefix(1);
    if (!take_digits(s, 2, h) || !take_char(s, ':') || !take_digits(s, 2, mi)) return std::nullopt;
    if (take_char(s, ':')) {
      if (!take_digits(s, 2, sec)) return std::nullopt;
      if (take_char(s, '.')) {
        std::size_t n = 0;
        std::int64_t scale = 100'000;
        while (!s.empty() && s.front() >= '0' && s.front() <= '9') {
          if (n < 6) {
            frac_us += (s.front() - '0') * scale;
            scale /= 10;
          }
          ++n;
          s.remove_prefix(1);
        }
        if (n == 0 || n > 9) return std::nullopt;
      }
    }
  }
  if (take_char(s, 'Z')) {
  } else if (s == "+00:00") {
    s.remove_prefix(6);
  }
  if (!s.empty()) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  std::int64_t secs = days * 86'400 + h * 3'600 + mi * 60 + sec;
  return Timestamp{secs * kMicrosPerSecond + frac_us};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  std::int64_t us = ts.micros;
  std::int64_t secs = us / kMicrosPerSecond;
  std::int64_t frac = us % kMicrosPerSecond;
  if (frac < 0) {
    frac += kMicrosPerSecond;
    secs -= 1;
  }
  std::int64_t days = secs / 86'400;
  std::int64_t rem = secs % 86'400;
  if (rem < 0) {
    rem += 86'400;
    days -= 1;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3'600), static_cast<int>(rem % 3'600 / 60),
                static_cast<int>(rem % 60), static_cast<long long>(frac));
  return buf;
}

}  // namespace cohort
