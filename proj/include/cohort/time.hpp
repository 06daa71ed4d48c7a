#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cohort {

/// UTC instant with microsecond resolution, counted from the Unix epoch.
struct Timestamp {
  std::int64_t micros = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;

constexpr Timestamp from_seconds(std::int64_t seconds) { return {seconds * kMicrosPerSecond}; }

/// anchor + seconds; throws std::overflow_error when the result leaves int64 range.
Timestamp add_seconds(Timestamp anchor, std::int64_t seconds);

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DD[T| ]HH:MM[:SS[.f{1,9}]]` with an optional
/// trailing `Z` or `+00:00`. Fractions beyond microseconds are truncated.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SS.ffffff`, always six fractional digits.
std::string format_timestamp(Timestamp ts);

}  // namespace cohort
