#include "cohort/simd/kernels.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cohort;
using namespace cohort::simd;
using cohort::synth::SplitMix64;

namespace {

std::int64_t draw(SplitMix64& rng) {
  switch (rng.uniform_int(0, 3)) {
    case 0: return rng.uniform_int(0, 5);
    case 1: return rng.uniform_int(-1000, 1000);
    case 2: return rng.uniform_int(INT64_MIN / 4, INT64_MAX / 4);
    default: return rng.bernoulli(0.5) ? INT64_MAX - rng.uniform_int(0, 3) : INT64_MIN + rng.uniform_int(0, 3);
  }
}

std::vector<std::int64_t> vec(SplitMix64& rng, std::size_t n, bool small) {
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = small ? rng.uniform_int(0, 9) : draw(rng);
  return v;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  for (Isa isa : available_isas())
    if (isa != Isa::scalar) out.push_back(table_for(isa));
  return out;
}

}  // namespace

TEST_CASE("dispatch") {
  const auto isas = available_isas();
  REQUIRE_FALSE(isas.empty());
  CHECK(isas.front() == Isa::scalar);
  CHECK(table_for(Isa::scalar) == &detail::scalar_table);
  CHECK(std::find(isas.begin(), isas.end(), active().isa) != isas.end());
  for (Isa isa : isas) CHECK(table_for(isa)->isa == isa);
  CHECK(isa_name(Isa::avx2) == "avx2");
  MESSAGE("active kernels: ", std::string(isa_name(active().isa)), ", variants under test: ", variants().size());
}

TEST_CASE("accumulate_rows matches scalar") {
  SplitMix64 rng(1);
  const auto& ref = detail::scalar_table;
  for (int trial = 0; trial < 500; ++trial) {
    const auto width = static_cast<std::size_t>(rng.uniform_int(1, 19));
    const auto rows = static_cast<std::size_t>(rng.uniform_int(0, 40));
    const auto counts = vec(rng, rows * width, true);
    std::vector<std::int64_t> want(rows * width, -7);
    ref.accumulate_rows(counts.data(), want.data(), rows, width);
    // The scalar reference itself against a plain loop.
    for (std::size_t c = 0; c < width; ++c) {
      std::int64_t s = 0;
      for (std::size_t r = 0; r < rows; ++r) CHECK(want[r * width + c] == (s += counts[r * width + c]));
    }
    for (const KernelTable* k : variants()) {
      std::vector<std::int64_t> got(rows * width, 99);
      k->accumulate_rows(counts.data(), got.data(), rows, width);
      CHECK(got == want);
    }
  }
}

TEST_CASE("row_difference matches scalar") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 37));
    const auto hi = vec(rng, n, true), lo = vec(rng, n, true);
    std::vector<std::int64_t> want(n), want_null(n);
    detail::scalar_table.row_difference(hi.data(), lo.data(), want.data(), n);
    detail::scalar_table.row_difference(hi.data(), nullptr, want_null.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(want[i] == hi[i] - lo[i]);
      CHECK(want_null[i] == hi[i]);
    }
    for (const KernelTable* k : variants()) {
      std::vector<std::int64_t> got(n), got_null(n);
      k->row_difference(hi.data(), lo.data(), got.data(), n);
      k->row_difference(hi.data(), nullptr, got_null.data(), n);
      CHECK(got == want);
      CHECK(got_null == want_null);
    }
  }
}

TEST_CASE("within_bounds matches scalar") {
  SplitMix64 rng(3);
  int accepted = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 23));
    std::vector<std::int64_t> v(n), lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = rng.uniform_int(0, 6);
      lo[i] = rng.bernoulli(0.7) ? INT64_MIN : rng.uniform_int(0, 3);
      hi[i] = rng.bernoulli(0.7) ? INT64_MAX : rng.uniform_int(2, 8);
    }
    bool want = true;
    for (std::size_t i = 0; i < n; ++i) want = want && lo[i] <= v[i] && v[i] <= hi[i];
    CHECK(detail::scalar_table.within_bounds(v.data(), lo.data(), hi.data(), n) == want);
    for (const KernelTable* k : variants()) CHECK(k->within_bounds(v.data(), lo.data(), hi.data(), n) == want);
    accepted += want;
  }
  CHECK(accepted > 300);
  CHECK(accepted < 2700);
}

TEST_CASE("offset_all matches scalar, including overflow") {
  SplitMix64 rng(4);
  int overflows = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 21));
    const auto in = vec(rng, n, false);
    const std::int64_t delta = draw(rng);
    bool want_ok = true;
    std::vector<std::int64_t> want(n);
    for (std::size_t i = 0; i < n; ++i) want_ok = want_ok && !__builtin_add_overflow(in[i], delta, &want[i]);
    std::vector<std::int64_t> ref(n);
    CHECK(detail::scalar_table.offset_all(in.data(), delta, ref.data(), n) == want_ok);
    if (want_ok) CHECK(ref == want);
    for (const KernelTable* k : variants()) {
      std::vector<std::int64_t> got(n);
      CHECK(k->offset_all(in.data(), delta, got.data(), n) == want_ok);
      if (want_ok) CHECK(got == want);
    }
    overflows += !want_ok;
  }
  CHECK(overflows > 100);
}

TEST_CASE("span wrappers use the active table") {
  const std::vector<std::int64_t> counts = {1, 0, 2, 1, 0, 3};
  std::vector<std::int64_t> cum(6);
  accumulate_rows(counts, cum, 2);
  CHECK(cum == std::vector<std::int64_t>{1, 0, 3, 1, 3, 4});
  const std::vector<std::int64_t> lo = {0, 1}, hi = {5, 1};
  CHECK(within_bounds(std::vector<std::int64_t>{5, 1}, lo, hi));
  CHECK_FALSE(within_bounds(std::vector<std::int64_t>{5, 2}, lo, hi));
}
