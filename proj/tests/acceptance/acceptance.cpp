// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cohort/cli.hpp"
#include "cohort/engine.hpp"
#include "cohort/errors.hpp"
#include "cohort/oracle.hpp"
#include "cohort/output.hpp"
#include "cohort/synth.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <thread>

using namespace cohort;
using namespace cohort::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  const auto t0 = Clock::now();
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
  failures += v.pass ? 0 : 1;
}

template <class... Args>
std::string cat(const Args&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

struct ChildRun {
  int status = -1;
  double wall_seconds = 0;
  long max_rss_kib = 0;
};

// fork/exec so the child's peak RSS comes back through wait4.
ChildRun spawn(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const auto t0 = Clock::now();
  const pid_t pid = fork();
  if (pid == 0) {
    execv(argv[0], argv.data());
    _exit(127);
  }
  ChildRun r;
  int status = 0;
  rusage usage{};
  wait4(pid, &status, 0, &usage);
  r.wall_seconds = seconds_since(t0);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.max_rss_kib = usage.ru_maxrss;
  return r;
}

nlohmann::json manifest_without_timings(const fs::path& path) {
  auto j = nlohmann::json::parse(read_file(path));
  j.erase("timings");
  return j;
}

std::vector<std::string> data_lines(const fs::path& csv) {
  std::istringstream in(read_file(csv));
  std::vector<std::string> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Ten shards of 60 subjects each, subject ids disjoint.
void write_ten_shards(const fs::path& dir) {
  fs::create_directories(dir);
  for (int i = 0; i < 10; ++i) {
    synth::SynthSpec spec;
    spec.seed = 9000 + static_cast<std::uint64_t>(i);
    spec.n_subjects = 60;
    spec.first_subject_id = 1 + i * 10'000;
    spec.horizon_days = 90;
    spec.admission_prob = 0.1;
    synth::write_synthetic(spec, dir / cat("shard_", i, ".csv"));
  }
}

cli::RunOptions shard_options(const fs::path& data, const fs::path& out, unsigned jobs) {
  cli::RunOptions o;
  o.config_path = fixture("inhospital_mortality_48h.yaml");
  o.data_path = data;
  o.shards = "shard_*.csv";
  o.output_path = out;
  o.jobs = jobs;
  o.include_window_stats = true;
  o.log_level = "off";
  return o;
}

Verdict mortality_fixture() {
  const auto t0 = Clock::now();
  const TaskConfig config = load_task_config(fixture("inhospital_mortality_48h.yaml"));
  const CohortSource source = load_source(fixture("mortality_fixture_events.csv"), DataStandard::meds, config);
  const auto rows = extract_cohort(source, config);
  const double elapsed = seconds_since(t0);
  const auto want = oracle::naive_extract(source, config);
  const Timestamp index = add_seconds(*parse_timestamp("2020-01-01T00:00:00"), 48 * 3600);
  const bool shape = rows.size() == 1 && rows[0].subject_id == 1 && rows[0].index_timestamp == index &&
                     rows[0].label == std::optional<std::int8_t>(1);
  const bool pass = shape && rows == want && elapsed < 1.0;
  return {pass, cat(rows.size(), " row(s)", rows.empty() ? "" : ": " + describe(rows[0]),
                    rows == want ? ", equals oracle" : ", DIFFERS from oracle", ", extraction ", elapsed * 1000.0,
                    " ms (limit 1 s)")};
}

Verdict differential() {
  TempDir dir("acceptance-diff");
  synth::SplitMix64 rng(20250101);
  constexpr int kTrials = 1000;
  int nonempty = 0;
  std::size_t rows = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::string text = random_config_text(rng, 5);
    const TaskConfig config = parse_task_config(text);
    const auto spec = random_synth_spec(rng);
    const auto source = synth::generate_synthetic(spec, dir / "trial.csv", config);
    ExtractOptions opts;
    opts.include_window_stats = rng.bernoulli(0.5);
    opts.multi_anchor = rng.bernoulli(0.2);
    opts.threads = static_cast<unsigned>(rng.uniform_int(1, 4));
    const auto got = extract_cohort(source, config, opts);
    const auto want = oracle::naive_extract(source, config, opts);
    const std::string diff = first_difference(got, want);
    if (!diff.empty()) return {false, cat("trial ", trial, " (seed ", spec.seed, "): ", diff, "\n", text)};
    nonempty += want.empty() ? 0 : 1;
    rows += want.size();
  }
  return {true, cat(kTrials, " trials identical; ", nonempty, " produced rows, ", rows, " rows total")};
}

Verdict task_corpus() {
  TempDir dir("acceptance-corpus");
  const auto files = corpus_configs();
  if (files.size() != 9) return {false, cat("expected 9 task configs, found ", files.size())};
  synth::SynthSpec spec;
  spec.seed = 31;
  spec.n_subjects = 400;
  spec.horizon_days = 2200;  // long enough for the five-year windows
  spec.event_rate = 0.15;
  spec.admission_prob = 0.01;
  spec.discharge_delay_max_hours = 336;
  std::ostringstream detail;
  bool pass = true;
  for (const auto& f : files) {
    const TaskConfig config = load_task_config(f);
    const WindowTree tree = build_tree(config);
    const bool tree_ok = tree.edges.size() + 1 == tree.nodes.size();
    const auto source = synth::generate_synthetic(spec, dir / "corpus.parquet", config);
    const auto rows = extract_cohort(source, config);
    const bool same = rows == oracle::naive_extract(source, config);
    pass = pass && tree_ok && same;
    detail << f.stem().string() << "=" << rows.size() << (same ? "" : "(oracle mismatch)") << (tree_ok ? "" : "(bad tree)")
           << " ";
  }
  std::string d = detail.str();
  d.pop_back();
  return {pass, "rows per task: " + d};
}

Verdict shard_decomposition() {
  TempDir dir("acceptance-shards");
  write_ten_shards(dir / "data");
  if (cli::run(shard_options(dir / "data", dir / "serial", 1)) != cli::ok) return {false, "serial run failed"};
  if (cli::run(shard_options(dir / "data", dir / "parallel", 4)) != cli::ok) return {false, "jobs=4 run failed"};

  // The union as one file: every shard's rows under one header.
  std::string union_text = read_file(dir / "data" / "shard_0.csv");
  for (int i = 1; i < 10; ++i) {
    const std::string text = read_file(dir / "data" / cat("shard_", i, ".csv"));
    union_text += text.substr(text.find('\n') + 1);
  }
  write_file(dir / "union.csv", union_text);
  cli::RunOptions single = shard_options(dir / "data", dir / "single.csv", 1);
  single.shards.reset();
  single.data_path = dir / "union.csv";
  if (cli::run(single) != cli::ok) return {false, "single run failed"};

  int byte_equal = 0;
  std::vector<std::string> concatenated;
  for (int i = 0; i < 10; ++i) {
    const std::string name = cat("shard_", i, ".csv");
    byte_equal += read_file(dir / "serial" / name) == read_file(dir / "parallel" / name);
    const auto lines = data_lines(dir / "serial" / name);
    concatenated.insert(concatenated.end(), lines.begin(), lines.end());
  }
  auto whole = data_lines(dir / "single.csv");
  std::sort(concatenated.begin(), concatenated.end());
  std::sort(whole.begin(), whole.end());
  const bool pass = byte_equal == 10 && concatenated == whole && !whole.empty();
  return {pass, cat(byte_equal, "/10 shard files byte-equal serial vs jobs=4; concatenation ",
                    concatenated == whole ? "equals" : "DIFFERS FROM", " the single run (", whole.size(), " rows)")};
}

Verdict micro_properties() {
  synth::SplitMix64 rng(4242);
  int count_cases = 0, count_bad = 0, bound_cases = 0, bound_bad = 0;
  while (count_cases < 10'000 || bound_cases < 10'000) {
    const SubjectTimeline tl = random_timeline(rng, 2, 80);
    const std::int64_t lo = tl.first_time().micros - 500 * kMicrosPerSecond;
    const std::int64_t hi = tl.last_time().micros + 500 * kMicrosPerSecond;
    auto probe = [&] {
      if (rng.bernoulli(0.4)) return tl.time(static_cast<std::size_t>(rng.uniform_int(0, tl.size() - 1)));
      return Timestamp{rng.uniform_int(lo, hi)};
    };
    for (int q = 0; q < 20; ++q) {
      Timestamp a = probe(), b = probe();
      if (b < a) std::swap(a, b);
      const bool si = rng.bernoulli(0.5), ei = rng.bernoulli(0.5);
      const auto c = static_cast<std::size_t>(rng.uniform_int(0, 1));
      if (count_cases < 10'000) {
        ++count_cases;
        count_bad += count_in_interval(tl, a, b, si, ei, c) != scan_count(tl, a, b, si, ei, c);
      }
      if (bound_cases < 10'000) {
        ++bound_cases;
        const auto dir = rng.bernoulli(0.5) ? SearchDirection::next : SearchDirection::previous;
        bound_bad += resolve_event_bound_endpoint(tl, a, c, dir) != scan_bound(tl, a, c, dir);
      }
    }
  }

  int monotone_trials = 0, monotone_bad = 0, shrank = 0;
  while (monotone_trials < 100) {
    const TaskConfig config = parse_task_config(random_config_text(rng, 5));
    const auto source = build_timeline(synth::generate_events(random_synth_spec(rng)).events, config);
    TaskConfig tighter = config;
    auto& w = tighter.windows[static_cast<std::size_t>(rng.uniform_int(0, tighter.windows.size() - 1))];
    const std::string& pred =
        kRandomPredicates[static_cast<std::size_t>(rng.uniform_int(0, kRandomPredicates.size() - 1))];
    if (std::any_of(w.constraints.begin(), w.constraints.end(), [&](const auto& c) { return c.predicate == pred; }))
      continue;
    ConstraintBound bound{pred};
    if (rng.bernoulli(0.5)) bound.min = rng.uniform_int(0, 2);
    bound.max = rng.uniform_int(bound.min.value_or(0), 6);
    w.constraints.push_back(bound);
    const auto before = extract_cohort(source, config).size();
    const auto after = extract_cohort(source, tighter).size();
    ++monotone_trials;
    monotone_bad += after > before;
    shrank += after < before;
  }
  const bool pass = count_bad == 0 && bound_bad == 0 && monotone_bad == 0;
  return {pass, cat("count_in_interval ", count_cases - count_bad, "/", count_cases, " match; event bound ",
                    bound_cases - bound_bad, "/", bound_cases, " match; monotone filtering ",
                    monotone_trials - monotone_bad, "/", monotone_trials, " hold (", shrank, " strictly shrank)")};
}

Verdict performance() {
  TempDir dir("acceptance-perf");
  synth::SynthSpec spec;
  spec.seed = 2024;
  spec.n_subjects = 5000;
  spec.horizon_days = 365;
  spec.event_rate = 2.0;
  spec.admission_prob = 0.03;
  spec.death_prob = 0.0;              // no early truncation
  spec.max_events_per_subject = 200;  // >= 365 background events each, so every subject hits the cap
  const fs::path data = dir / (io::parquet_supported() ? "perf.parquet" : "perf.csv");
  synth::write_synthetic(spec, data);
  const auto meta = nlohmann::json::parse(read_file(data.string() + ".synth.json"));
  const auto events = meta["events"].get<std::size_t>();

  const unsigned jobs = std::min(4u, std::max(1u, std::thread::hardware_concurrency()));
  const fs::path out = dir / (io::parquet_supported() ? "out.parquet" : "out.csv");
  const std::vector<std::string> args = {COHORT_EXTRACT_BIN, "--config", fixture("inhospital_mortality_48h.yaml").string(),
                                         "--data", data.string(), "--output", out.string(),
                                         "--jobs", std::to_string(jobs), "--log-level", "warn"};
  const ChildRun warm = spawn(args);  // warm the page cache
  if (warm.status != 0) return {false, cat("warm-up run exited ", warm.status)};
  const ChildRun run = spawn(args);
  const double gib = static_cast<double>(run.max_rss_kib) / (1024.0 * 1024.0);
  const auto manifest = nlohmann::json::parse(read_file(out.string() + ".manifest.json"));
  const bool pass = run.status == 0 && events == 1'000'000 && run.wall_seconds <= 10.0 && gib <= 2.0;
  return {pass, cat(events, " events / ", spec.n_subjects, " subjects, ", manifest["total_rows"].get<std::size_t>(),
                    " cohort rows; wall ", run.wall_seconds, " s (limit 10), peak RSS ", run.max_rss_kib / 1024,
                    " MiB (limit 2048), jobs=", jobs, " on ", std::thread::hardware_concurrency(), " core(s)")};
}

Verdict determinism() {
  TempDir dir("acceptance-det");
  std::vector<std::string> problems;
  int compared = 0;
  auto same_file = [&](const fs::path& a, const std::string& before) {
    ++compared;
    if (read_file(a) != before) problems.push_back(a.filename().string());
  };
  auto same_manifest = [&](const fs::path& a, const nlohmann::json& before) {
    ++compared;
    if (manifest_without_timings(a) != before) problems.push_back(a.filename().string());
  };

  // Single-file fixture run, twice through the binary.
  const std::vector<std::string> args = {COHORT_EXTRACT_BIN, "--config", fixture("inhospital_mortality_48h.yaml").string(),
                                         "--data", fixture("mortality_fixture_events.csv").string(), "--output",
                                         (dir / "fixture.parquet").string(), "--include-window-stats",
                                         "--log-level", "off"};
  if (spawn(args).status != 0) return {false, "fixture run failed"};
  const std::string out1 = read_file(dir / "fixture.parquet");
  const auto man1 = manifest_without_timings(dir / "fixture.parquet.manifest.json");
  if (spawn(args).status != 0) return {false, "fixture rerun failed"};
  same_file(dir / "fixture.parquet", out1);
  same_manifest(dir / "fixture.parquet.manifest.json", man1);

  // Shard runs, serial and parallel, each twice.
  write_ten_shards(dir / "data");
  for (unsigned jobs : {1u, 4u}) {
    const fs::path out = dir / cat("shards_j", jobs);
    if (cli::run(shard_options(dir / "data", out, jobs)) != cli::ok) return {false, "shard run failed"};
    std::vector<std::string> first;
    for (int i = 0; i < 10; ++i) first.push_back(read_file(out / cat("shard_", i, ".csv")));
    const auto man = manifest_without_timings(out / "manifest.json");
    if (cli::run(shard_options(dir / "data", out, jobs)) != cli::ok) return {false, "shard rerun failed"};
    for (int i = 0; i < 10; ++i) same_file(out / cat("shard_", i, ".csv"), first[static_cast<std::size_t>(i)]);
    same_manifest(out / "manifest.json", man);
  }

  // Generator output, CSV and Parquet.
  synth::SynthSpec spec;
  spec.seed = 5;
  spec.n_subjects = 100;
  for (const char* name : {"gen.csv", "gen.parquet"}) {
    synth::write_synthetic(spec, dir / name);
    const std::string first = read_file(dir / name);
    synth::write_synthetic(spec, dir / name);
    same_file(dir / name, first);
  }

  std::string detail = cat(compared, " artifacts compared across reruns");
  if (!problems.empty()) {
    detail += "; differing:";
    for (const auto& p : problems) detail += " " + p;
  }
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  // Null-time warnings from every synthetic load would drown the verdicts.
  spdlog::set_level(spdlog::level::err);
  report("mortality_fixture", mortality_fixture);
  report("differential_1000_trials", differential);
  report("task_corpus", task_corpus);
  report("shard_decomposition", shard_decomposition);
  report("aggregation_micro_properties", micro_properties);
  report("performance_1M_events", performance);
  report("determinism", determinism);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
