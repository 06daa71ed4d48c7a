#include "cohort/errors.hpp"
#include "cohort/events.hpp"
#include "cohort/table_io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace cohort;
using namespace cohort::testing;

namespace {

const char* const kHeader = "subject_id,time,code,numeric_value\n";

TaskConfig mortality_config() {
  return parse_task_config(R"yaml(predicates:
  admission: { code: "event_type//ADMISSION" }
  discharge: { code: "event_type//DISCHARGE" }
  death: { code: "event_type//DEATH" }
  death_or_discharge: { expr: "any_of(death, discharge)" }
  lab: { code: "LAB//*" }
  creat_high: { code: "LAB//creatinine", value_min: 1.5 }
  high_lab: { expr: "all_of(lab, creat_high)" }
trigger: admission
windows:
  w:
    start: trigger
    end: "start + 1d"
)yaml");
}

EventRecord ev(std::int64_t sid, std::int64_t h, std::string code, std::optional<double> v = std::nullopt) {
  return EventRecord{sid, hours(h), std::move(code), v};
}

std::size_t col(const CohortSource& s, std::string_view name) {
  const auto c = s.column(name);
  REQUIRE(c);
  return *c;
}

}  // namespace

TEST_CASE("load_events") {
  TempDir dir("ingest");
  SUBCASE("three rows") {
    write_file(dir / "a.csv", std::string(kHeader) +
                                  "1,2020-01-01T00:00:00,event_type//ADMISSION,\n"
                                  "1,2020-01-01T05:00:00,LAB//creatinine,1.2\n"
                                  "1,2020-01-02T00:00:00,event_type//DEATH,\n");
    const EventBatch b = load_events(dir / "a.csv");
    REQUIRE(b.records.size() == 3);
    CHECK(b.null_time_rows == 0);
    CHECK(b.records[0].code == "event_type//ADMISSION");
    CHECK_FALSE(b.records[0].numeric_value);
    CHECK(b.records[1].numeric_value == std::optional<double>(1.2));
    CHECK(b.records[2].time == parse_timestamp("2020-01-02T00:00:00"));
  }
  SUBCASE("null-time demographic row") {
    write_file(dir / "a.csv", std::string(kHeader) +
                                  "1,,GENDER//F,\n"
                                  "1,2020-01-01T00:00:00,event_type//ADMISSION,\n"
                                  "1,2020-01-01T05:00:00,LAB//creatinine,1.2\n"
                                  "1,2020-01-01T06:00:00,LAB//creatinine,1.3\n"
                                  "1,2020-01-02T00:00:00,event_type//DISCHARGE,\n");
    const EventBatch b = load_events(dir / "a.csv");
    CHECK(b.records.size() == 4);
    CHECK(b.null_time_rows == 1);
  }
  SUBCASE("empty file with a header") {
    write_file(dir / "a.csv", kHeader);
    const EventBatch b = load_events(dir / "a.csv");
    CHECK(b.records.empty());
    CHECK(b.null_time_rows == 0);
  }
  SUBCASE("numeric_value is optional") {
    write_file(dir / "a.csv", "subject_id,time,code\n3,2021-06-01T12:00:00,X\n");
    const EventBatch b = load_events(dir / "a.csv");
    REQUIRE(b.records.size() == 1);
    CHECK(b.records[0].subject_id == 3);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_events(dir / "missing.csv"), DataError);
    write_file(dir / "nocode.csv", "subject_id,time\n1,2020-01-01T00:00:00\n");
    CHECK_THROWS_WITH_AS(load_events(dir / "nocode.csv"), doctest::Contains("'code'"), DataError);
    write_file(dir / "badtime.csv", std::string(kHeader) + "1,yesterday,X,\n");
    CHECK_THROWS_AS(load_events(dir / "badtime.csv"), DataError);
    write_file(dir / "nullsubject.csv", std::string(kHeader) + ",2020-01-01T00:00:00,X,\n");
    CHECK_THROWS_AS(load_events(dir / "nullsubject.csv"), DataError);
  }
}

TEST_CASE("evaluate_plain_predicate") {
  const PlainPredicate admission{"admission", {"event_type//ADMISSION"}};
  const PlainPredicate creat{"creat", {"LAB//creatinine"}, 1.5};
  const PlainPredicate lab{"lab", {"LAB//*"}};
  const PlainPredicate band{"band", {"LAB//creatinine"}, 1.0, 2.0};
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "event_type//ADMISSION"}, admission) == 1);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine", 2.0}, creat) == 1);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine"}, creat) == 0);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine", 1.4}, creat) == 0);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "event_type//admission"}, admission) == 0);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "event_type//ADMISSION_X"}, admission) == 0);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//"}, lab) == 1);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LA"}, lab) == 0);
  // Bounds are inclusive on both ends.
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine", 1.0}, band) == 1);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine", 2.0}, band) == 1);
  CHECK(evaluate_plain_predicate(EventRecord{1, {}, "LAB//creatinine", 2.01}, band) == 0);
}

TEST_CASE("evaluate_derived_predicate") {
  const std::map<std::string, std::size_t> idx = {{"death", 0}, {"discharge", 1}};
  auto column_of = [&](const std::string& n) { return idx.at(n); };
  const DerivedPredicate any{"dd", Combinator::any_of, {"death", "discharge"}};
  const DerivedPredicate all{"dd", Combinator::all_of, {"death", "discharge"}};
  const std::vector<std::int64_t> death_only = {1, 0}, none = {0, 0}, both = {1, 1};
  CHECK(evaluate_derived_predicate(death_only, any, column_of) == 1);
  CHECK(evaluate_derived_predicate(none, any, column_of) == 0);
  CHECK(evaluate_derived_predicate(both, all, column_of) == 1);
  CHECK(evaluate_derived_predicate(death_only, all, column_of) == 0);
}

TEST_CASE("build_timeline examples") {
  const TaskConfig config = mortality_config();
  SUBCASE("equal timestamps merge") {
    const std::vector<EventRecord> events = {ev(1, 0, "event_type//ADMISSION"), ev(1, 10, "LAB//a"),
                                             ev(1, 10, "LAB//b")};
    const CohortSource s = build_timeline(events, config);
    REQUIRE(s.timelines.size() == 1);
    const SubjectTimeline& tl = s.timelines[0];
    REQUIRE(tl.size() == 2);
    CHECK(tl.time(0) == hours(0));
    CHECK(tl.time(1) == hours(10));
    const auto any = col(s, kAnyEvent);
    CHECK(tl.count(0, any) == 1);
    CHECK(tl.count(1, any) == 2);
    CHECK(tl.cumulative(0, any) == 1);
    CHECK(tl.cumulative(1, any) == 3);
    CHECK(tl.count(1, col(s, "lab")) == 2);
  }
  SUBCASE("single event") {
    const std::vector<EventRecord> events = {ev(4, 3, "event_type//DEATH")};
    const CohortSource s = build_timeline(events, config);
    REQUIRE(s.timelines.size() == 1);
    const auto& tl = s.timelines[0];
    CHECK(tl.size() == 1);
    for (std::size_t c = 0; c < tl.width(); ++c) CHECK(tl.count(0, c) == tl.cumulative(0, c));
    CHECK(tl.count(0, col(s, "death_or_discharge")) == 1);
  }
  SUBCASE("reverse order gives the same source") {
    std::vector<EventRecord> events = {ev(1, 0, "event_type//ADMISSION"), ev(1, 5, "LAB//creatinine", 2.0),
                                       ev(2, 1, "event_type//DEATH"), ev(1, 9, "event_type//DISCHARGE")};
    const CohortSource a = build_timeline(events, config);
    std::reverse(events.begin(), events.end());
    const CohortSource b = build_timeline(events, config);
    CHECK(a.timelines == b.timelines);
    CHECK(a.predicate_names == b.predicate_names);
  }
  SUBCASE("empty input") {
    const CohortSource s = build_timeline({}, config);
    CHECK(s.timelines.empty());
    CHECK(s.predicate_names == source_columns(config));
  }
  SUBCASE("derived predicates evaluate per event, not per row") {
    // creatinine 2.0 and an unrelated lab share a timestamp: all_of sees one
    // matching event, not two.
    const std::vector<EventRecord> events = {ev(1, 0, "LAB//creatinine", 2.0), ev(1, 0, "LAB//glucose", 90)};
    const CohortSource s = build_timeline(events, config);
    CHECK(s.timelines[0].count(0, col(s, "high_lab")) == 1);
    CHECK(s.timelines[0].count(0, col(s, "lab")) == 2);
  }
}

TEST_CASE("predicate columns follow dependency order plus _ANY_EVENT") {
  const TaskConfig config = mortality_config();
  std::vector<std::string> want = config.dependency_order;
  want.emplace_back(kAnyEvent);
  CHECK(source_columns(config) == want);
  CHECK(build_timeline({}, config).predicate_names == want);
}

TEST_CASE("load_direct_predicates") {
  TempDir dir("direct");
  const TaskConfig config = parse_task_config(R"yaml(predicates:
  admission: { code: "event_type//ADMISSION" }
  death: { code: "event_type//DEATH" }
  adm_or_death: { expr: "any_of(admission, death)" }
trigger: admission
windows:
  w: { start: trigger, end: "start + 1d" }
)yaml");
  SUBCASE("derived predicates are computed") {
    write_file(dir / "d.csv",
               "subject_id,time,admission,death\n"
               "1,2020-01-01T00:00:00,1,0\n"
               "1,2020-01-02T00:00:00,0,1\n"
               "2,2020-01-01T00:00:00,0,0\n");
    const CohortSource s = load_direct_predicates(dir / "d.csv", config);
    CHECK(s.format == "direct");
    REQUIRE(s.timelines.size() == 2);
    const auto& tl = s.timelines[0];
    CHECK(tl.count(0, col(s, "adm_or_death")) == 1);
    CHECK(tl.count(1, col(s, "adm_or_death")) == 1);
    CHECK(tl.cumulative(1, col(s, kAnyEvent)) == 2);
    CHECK(s.timelines[1].count(0, col(s, "adm_or_death")) == 0);
  }
  SUBCASE("missing predicate column names it") {
    write_file(dir / "d.csv", "subject_id,time,admission\n1,2020-01-01T00:00:00,1\n");
    CHECK_THROWS_WITH_AS(load_direct_predicates(dir / "d.csv", config), doctest::Contains("death"), DataError);
  }
  SUBCASE("equal timestamps sum") {
    write_file(dir / "d.csv",
               "subject_id,time,admission,death\n"
               "1,2020-01-01T00:00:00,1,0\n"
               "1,2020-01-01T00:00:00,1,0\n");
    const CohortSource s = load_direct_predicates(dir / "d.csv", config);
    REQUIRE(s.timelines[0].size() == 1);
    CHECK(s.timelines[0].count(0, col(s, "admission")) == 2);
    CHECK(s.timelines[0].count(0, col(s, kAnyEvent)) == 2);
  }
  SUBCASE("negative counts") {
    write_file(dir / "d.csv", "subject_id,time,admission,death\n1,2020-01-01T00:00:00,-1,0\n");
    CHECK_THROWS_WITH_AS(load_direct_predicates(dir / "d.csv", config), doctest::Contains("negative"), DataError);
  }
  SUBCASE("explicit _ANY_EVENT column") {
    write_file(dir / "d.csv", "subject_id,time,admission,death,_ANY_EVENT\n1,2020-01-01T00:00:00,1,0,7\n");
    const CohortSource s = load_direct_predicates(dir / "d.csv", config);
    CHECK(s.timelines[0].count(0, col(s, kAnyEvent)) == 7);
  }
}

TEST_CASE("timeline properties against a linear scan") {
  const TaskConfig config = mortality_config();
  synth::SplitMix64 rng(314);
  for (int trial = 0; trial < 60; ++trial) {
    auto spec = random_synth_spec(rng);
    auto events = synth::generate_events(spec).events;
    // Shuffle: the index must not depend on input order.
    for (std::size_t i = events.size(); i > 1; --i)
      std::swap(events[i - 1], events[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    const CohortSource s = build_timeline(events, config);

    std::map<std::int64_t, std::set<Timestamp>> distinct;
    for (const auto& e : events) distinct[e.subject_id].insert(e.time);
    REQUIRE(s.timelines.size() == distinct.size());

    for (const auto& tl : s.timelines) {
      CHECK(tl.size() == distinct[tl.subject_id()].size());
      for (std::size_t r = 1; r < tl.size(); ++r) CHECK(tl.time(r - 1) < tl.time(r));
      for (std::size_t c = 0; c < tl.width(); ++c) {
        std::int64_t running = 0;
        for (std::size_t r = 0; r < tl.size(); ++r) {
          CHECK(tl.count(r, c) >= 0);
          running += tl.count(r, c);
          CHECK(tl.cumulative(r, c) == running);
        }
      }
      // cumulative[last] equals the raw count of matching events.
      for (const auto& name : s.predicate_names) {
        const std::size_t c = col(s, name);
        std::int64_t raw = 0;
        for (const auto& e : events) {
          if (e.subject_id != tl.subject_id()) continue;
          if (name == kAnyEvent) {
            ++raw;
            continue;
          }
          const Predicate& p = *config.find_predicate(name);
          if (const auto* plain = std::get_if<PlainPredicate>(&p)) {
            raw += evaluate_plain_predicate(e, *plain);
          } else {
            const auto& d = std::get<DerivedPredicate>(p);
            std::vector<std::int64_t> ind;
            for (const auto& op : d.operands)
              ind.push_back(evaluate_plain_predicate(e, std::get<PlainPredicate>(*config.find_predicate(op))));
            std::int64_t v = d.combinator == Combinator::any_of ? 0 : 1;
            for (auto x : ind) v = d.combinator == Combinator::any_of ? std::max(v, x) : std::min(v, x);
            raw += v;
          }
        }
        CHECK(tl.cumulative(tl.size() - 1, c) == raw);
      }
      // any_of columns never exceed the sum of operands, nor fall below their max.
      const auto dd = col(s, "death_or_discharge");
      for (std::size_t r = 0; r < tl.size(); ++r) {
        const auto a = tl.count(r, col(s, "death")), b = tl.count(r, col(s, "discharge"));
        CHECK(tl.count(r, dd) >= std::max(a, b));
        CHECK(tl.count(r, dd) <= a + b);
      }
    }
  }
}

TEST_CASE("CSV and Parquet sources are identical") {
  if (!io::parquet_supported()) return;
  TempDir dir("ingest");
  synth::SynthSpec spec;
  spec.seed = 11;
  spec.n_subjects = 20;
  const TaskConfig config = mortality_config();
  const auto a = synth::generate_synthetic(spec, dir / "x.csv", config);
  const auto b = synth::generate_synthetic(spec, dir / "x.parquet", config);
  CHECK(a.timelines == b.timelines);
  CHECK(a.stats == b.stats);
  CHECK(a.stats.null_time_rows == 20);
}
