#include "cohort/simd/kernels.hpp"

namespace cohort::simd::detail {

namespace {

void accumulate_rows(const std::int64_t* counts, std::int64_t* cumulative, std::size_t rows,
                     std::size_t width) {
  if (rows == 0) return;
  for (std::size_t c = 0; c < width; ++c) cumulative[c] = counts[c];
  for (std::size_t r = 1; r < rows; ++r) {
    const std::int64_t* prev = cumulative + (r - 1) * width;
    const std::int64_t* cur = counts + r * width;
    std::int64_t* out = cumulative + r * width;
    for (std::size_t c = 0; c < width; ++c) out[c] = prev[c] + cur[c];
  }
}

void row_difference(const std::int64_t* hi, const std::int64_t* lo, std::int64_t* out,
                    std::size_t width) {
  for (std::size_t c = 0; c < width; ++c) out[c] = hi[c] - (lo ? lo[c] : 0);
}

bool within_bounds(const std::int64_t* values, const std::int64_t* lo, const std::int64_t* hi,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (values[i] < lo[i] || values[i] > hi[i]) return false;
  return true;
}

bool offset_all(const std::int64_t* in, std::int64_t delta, std::int64_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (__builtin_add_overflow(in[i], delta, &out[i])) return false;
  return true;
}

}  // namespace

const KernelTable scalar_table{Isa::scalar, accumulate_rows, row_difference, within_bounds, offset_all};

}  // namespace cohort::simd::detail
