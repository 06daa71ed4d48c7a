#pragma once

// Seeded synthetic event streams: admission -> labs -> discharge/death
// episodes plus background outpatient events.

#include "cohort/config.hpp"
#include "cohort/events.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace cohort::synth {

inline constexpr std::string_view kGeneratorName = "splitmix64";

/// SplitMix64 with fixed integer-only derivations so streams are identical
/// across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// [0, 1) with 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Inclusive [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Independent child stream.
  SplitMix64 split() noexcept { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  std::int64_t n_subjects = 10;
  double event_rate = 1.0;  // background events per subject-day
  double admission_prob = 0.05;  // per subject-day while not admitted
  std::int64_t discharge_delay_min_hours = 12;
  std::int64_t discharge_delay_max_hours = 120;
  double death_prob = 0.1;  // per admission
  std::int64_t horizon_days = 365;
  std::int64_t tick_minutes = 1;  // timestamp granularity; coarse ticks create ties
  std::int64_t first_subject_id = 1;
  std::int64_t max_events_per_subject = 0;  // 0 = no cap; keeps the earliest events

  void validate() const;  // std::invalid_argument
};

struct SynthData {
  std::vector<EventRecord> events;  // subject order, time order within subject
  std::size_t static_rows = 0;  // one null-time row per subject in the written file
};

SynthData generate_events(const SynthSpec& spec);

/// Writes the MEDS-like file (format by extension) and a `<path>.synth.json`
/// sidecar with the generator name and parameters. Same spec, same bytes.
void write_synthetic(const SynthSpec& spec, const std::filesystem::path& path);

/// write_synthetic followed by load_source(path, meds, config).
CohortSource generate_synthetic(const SynthSpec& spec, const std::filesystem::path& path,
                                const TaskConfig& config);

}  // namespace cohort::synth
