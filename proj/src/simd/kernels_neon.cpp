#include "cohort/simd/kernels.hpp"

#include <arm_neon.h>

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
    std::size_t c = 0;
    for (; c + 2 <= width; c += 2) vst1q_s64(out + c, vaddq_s64(vld1q_s64(prev + c), vld1q_s64(cur + c)));
    for (; c < width; ++c) out[c] = prev[c] + cur[c];
  }
}

void row_difference(const std::int64_t* hi, const std::int64_t* lo, std::int64_t* out,
                    std::size_t width) {
  std::size_t c = 0;
  if (lo) {
    for (; c + 2 <= width; c += 2) vst1q_s64(out + c, vsubq_s64(vld1q_s64(hi + c), vld1q_s64(lo + c)));
    for (; c < width; ++c) out[c] = hi[c] - lo[c];
  } else {
    for (; c < width; ++c) out[c] = hi[c];
  }
}

bool within_bounds(const std::int64_t* values, const std::int64_t* lo, const std::int64_t* hi,
                   std::size_t n) {
  std::size_t i = 0;
  uint64x2_t bad = vdupq_n_u64(0);
  for (; i + 2 <= n; i += 2) {
    const int64x2_t v = vld1q_s64(values + i);
    bad = vorrq_u64(bad, vcltq_s64(v, vld1q_s64(lo + i)));
    bad = vorrq_u64(bad, vcgtq_s64(v, vld1q_s64(hi + i)));
  }
  if ((vgetq_lane_u64(bad, 0) | vgetq_lane_u64(bad, 1)) != 0) return false;
  for (; i < n; ++i)
    if (values[i] < lo[i] || values[i] > hi[i]) return false;
  return true;
}

bool offset_all(const std::int64_t* in, std::int64_t delta, std::int64_t* out, std::size_t n) {
  const int64x2_t d = vdupq_n_s64(delta);
  int64x2_t overflow = vdupq_n_s64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const int64x2_t a = vld1q_s64(in + i);
    const int64x2_t r = vaddq_s64(a, d);
    overflow = vorrq_s64(overflow, vandq_s64(veorq_s64(a, r), veorq_s64(d, r)));
    vst1q_s64(out + i, r);
  }
  if ((vgetq_lane_s64(overflow, 0) | vgetq_lane_s64(overflow, 1)) < 0) return false;
  for (; i < n; ++i)
    if (__builtin_add_overflow(in[i], delta, &out[i])) return false;
  return true;
}

}  // namespace

const KernelTable neon_table{Isa::neon, accumulate_rows, row_difference, within_bounds, offset_all};

}  // namespace cohort::simd::detail
