#include "cohort/synth.hpp"

#include "cohort/table_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cohort::synth {

std::int64_t SplitMix64::uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
  const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(next());
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

void SynthSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  prob(admission_prob, "admission_prob");
  prob(death_prob, "death_prob");
  if (n_subjects < 0) throw std::invalid_argument("n_subjects must be nonnegative");
  if (horizon_days <= 0) throw std::invalid_argument("horizon_days must be positive");
  if (!(event_rate >= 0.0)) throw std::invalid_argument("event_rate must be nonnegative");
  if (max_events_per_subject < 0) throw std::invalid_argument("max_events_per_subject must be nonnegative");
  if (tick_minutes <= 0) throw std::invalid_argument("tick_minutes must be positive");
  if (discharge_delay_min_hours < 1 || discharge_delay_max_hours < discharge_delay_min_hours) {
    throw std::invalid_argument("discharge delay range must satisfy 1 <= min <= max");
  }
}

namespace {

// 2020-01-01T00:00:00Z
constexpr std::int64_t kEpochStart = 1577836800LL * kMicrosPerSecond;
constexpr std::int64_t kMinute = 60 * kMicrosPerSecond;

const char* const kBackgroundCodes[] = {
    "LAB//creatinine", "LAB//hemoglobin", "LAB//KIDNEY_PANEL", "PROC//ECG", "ECHO//LVEF",
    "DX//MI",          "DX//DIABETES",    "DX//CKD",           "LAB//glucose",
};

struct Emitter {
  std::int64_t subject;
  std::int64_t tick;
  std::vector<EventRecord>& out;

  std::int64_t snap(std::int64_t minutes) const { return minutes / tick * tick; }
  void emit(std::int64_t minutes, std::string code, std::optional<double> value = std::nullopt) {
    out.push_back(EventRecord{subject, Timestamp{kEpochStart + snap(minutes) * kMinute}, std::move(code), value});
  }
};

double tenth(double v) { return std::round(v * 10.0) / 10.0; }

std::optional<double> value_for(const std::string& code, SplitMix64& rng) {
  if (code == "LAB//creatinine") return tenth(0.4 + 3.6 * rng.uniform());
  if (code == "LAB//hemoglobin") return tenth(7.0 + 10.0 * rng.uniform());
  if (code == "LAB//glucose") return static_cast<double>(rng.uniform_int(60, 300));
  if (code == "ECHO//LVEF") return static_cast<double>(rng.uniform_int(15, 75));
  return std::nullopt;
}

void generate_subject(const SynthSpec& spec, std::int64_t subject, SplitMix64 rng, std::vector<EventRecord>& out) {
  const std::size_t begin = out.size();
  Emitter em{subject, spec.tick_minutes, out};
  const std::int64_t horizon = spec.horizon_days * 24 * 60;

  // Background outpatient events, roughly event_rate per day.
  const double mean = spec.event_rate * static_cast<double>(spec.horizon_days);
  const std::int64_t lo = static_cast<std::int64_t>(std::llround(0.5 * mean));
  const std::int64_t hi = static_cast<std::int64_t>(std::llround(1.5 * mean));
  const std::int64_t n_background = hi > 0 ? rng.uniform_int(lo, hi) : 0;

  // Episodes: walk day by day while not admitted.
  std::optional<std::int64_t> death_at;
  std::int64_t day = 0;
  while (day < spec.horizon_days && !death_at) {
    if (!rng.bernoulli(spec.admission_prob)) {
      ++day;
      continue;
    }
    const std::int64_t admit = day * 24 * 60 + rng.uniform_int(0, 24 * 60 - 1);
    const std::int64_t stay =
        rng.uniform_int(spec.discharge_delay_min_hours * 60, spec.discharge_delay_max_hours * 60);
    const std::int64_t leave = admit + stay;
    em.emit(admit, "event_type//ADMISSION");
    // Labs strictly inside the stay, on a tick grid offset from admission.
    const std::int64_t step = std::max<std::int64_t>(spec.tick_minutes, rng.uniform_int(60, 8 * 60));
    for (std::int64_t t = admit + step; t + spec.tick_minutes <= leave; t += step) {
      em.emit(t, "LAB//creatinine", value_for("LAB//creatinine", rng));
      if (rng.bernoulli(0.5)) em.emit(t, "LAB//hemoglobin", value_for("LAB//hemoglobin", rng));
    }
    if (stay > 6 * 60 && rng.bernoulli(0.2)) {
      const std::int64_t icu_in = admit + rng.uniform_int(60, stay / 3);
      const std::int64_t icu_out = icu_in + rng.uniform_int(60, std::max<std::int64_t>(61, leave - icu_in));
      em.emit(icu_in, "ICU//ADMISSION");
      if (icu_out < leave) em.emit(icu_out, "ICU//DISCHARGE");
    }
    if (rng.bernoulli(spec.death_prob)) {
      em.emit(leave, "event_type//DEATH");
      death_at = leave;
    } else {
      em.emit(leave, "event_type//DISCHARGE");
    }
    day = leave / (24 * 60) + 1;
  }

  for (std::int64_t i = 0; i < n_background; ++i) {
    const std::int64_t at = rng.uniform_int(0, horizon - 1);
    if (death_at && at >= *death_at) continue;
    const std::string code = kBackgroundCodes[rng.uniform_int(0, std::size(kBackgroundCodes) - 1)];
    em.emit(at, code, value_for(code, rng));
  }
  if (out.size() == begin) {
    em.emit(rng.uniform_int(0, horizon - 1), "LAB//hemoglobin", value_for("LAB//hemoglobin", rng));
  }
  std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(begin), out.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  if (spec.max_events_per_subject > 0 && out.size() - begin > static_cast<std::size_t>(spec.max_events_per_subject)) {
    out.resize(begin + static_cast<std::size_t>(spec.max_events_per_subject));
  }
}

}  // namespace

SynthData generate_events(const SynthSpec& spec) {
  spec.validate();
  SynthData data;
  SplitMix64 root(spec.seed);
  for (std::int64_t i = 0; i < spec.n_subjects; ++i) {
    generate_subject(spec, spec.first_subject_id + i, root.split(), data.events);
  }
  data.static_rows = static_cast<std::size_t>(spec.n_subjects);
  return data;
}

void write_synthetic(const SynthSpec& spec, const std::filesystem::path& path) {
  const SynthData data = generate_events(spec);
  using io::Column;
  using io::ColumnType;
  Column subject{.name = "subject_id", .type = ColumnType::int64};
  Column time{.name = "time", .type = ColumnType::timestamp};
  Column code{.name = "code", .type = ColumnType::string};
  Column value{.name = "numeric_value", .type = ColumnType::float64};
  auto push = [&](const EventRecord* e, std::int64_t sid) {
    subject.ints.push_back(sid);
    time.ints.push_back(e ? e->time.micros : 0);
    time.valid.push_back(e ? 1 : 0);
    code.strings.push_back(e ? e->code : std::string("GENDER//") + (sid % 2 ? "F" : "M"));
    const bool has_value = e && e->numeric_value;
    value.reals.push_back(has_value ? *e->numeric_value : 0.0);
    value.valid.push_back(has_value ? 1 : 0);
  };
  std::size_t i = 0;
  for (std::int64_t s = 0; s < spec.n_subjects; ++s) {
    const std::int64_t sid = spec.first_subject_id + s;
    push(nullptr, sid);  // static row first, as in MEDS
    for (; i < data.events.size() && data.events[i].subject_id == sid; ++i) push(&data.events[i], sid);
  }
  io::Table table;
  table.columns = {std::move(subject), std::move(time), std::move(code), std::move(value)};
  io::write_table(path, table);

  nlohmann::ordered_json meta;
  meta["generator"] = kGeneratorName;
  meta["seed"] = spec.seed;
  meta["n_subjects"] = spec.n_subjects;
  meta["event_rate"] = spec.event_rate;
  meta["admission_prob"] = spec.admission_prob;
  meta["discharge_delay_hours"] = {spec.discharge_delay_min_hours, spec.discharge_delay_max_hours};
  meta["death_prob"] = spec.death_prob;
  meta["horizon_days"] = spec.horizon_days;
  meta["tick_minutes"] = spec.tick_minutes;
  meta["first_subject_id"] = spec.first_subject_id;
  meta["max_events_per_subject"] = spec.max_events_per_subject;
  meta["events"] = data.events.size();
  meta["static_rows"] = data.static_rows;
  std::ofstream(path.string() + ".synth.json") << meta.dump(2) << '\n';
}

CohortSource generate_synthetic(const SynthSpec& spec, const std::filesystem::path& path, const TaskConfig& config) {
  write_synthetic(spec, path);
  return load_source(path, DataStandard::meds, config);
}

}  // namespace cohort::synth
