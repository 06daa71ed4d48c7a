// Built with -mavx2; only reached after a runtime CPU check.
#include "cohort/simd/kernels.hpp"

#include <immintrin.h>

namespace cohort::simd::detail {

namespace {

inline __m256i load(const std::int64_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }
inline void store(std::int64_t* p, __m256i v) { _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v); }

void accumulate_rows(const std::int64_t* counts, std::int64_t* cumulative, std::size_t rows,
                     std::size_t width) {
  if (rows == 0) return;
  for (std::size_t c = 0; c < width; ++c) cumulative[c] = counts[c];
  for (std::size_t r = 1; r < rows; ++r) {
    const std::int64_t* prev = cumulative + (r - 1) * width;
    const std::int64_t* cur = counts + r * width;
    std::int64_t* out = cumulative + r * width;
    std::size_t c = 0;
    for (; c + 4 <= width; c += 4) store(out + c, _mm256_add_epi64(load(prev + c), load(cur + c)));
    for (; c < width; ++c) out[c] = prev[c] + cur[c];
  }
}

void row_difference(const std::int64_t* hi, const std::int64_t* lo, std::int64_t* out,
                    std::size_t width) {
  std::size_t c = 0;
  if (lo) {
    for (; c + 4 <= width; c += 4) store(out + c, _mm256_sub_epi64(load(hi + c), load(lo + c)));
    for (; c < width; ++c) out[c] = hi[c] - lo[c];
  } else {
    for (; c < width; ++c) out[c] = hi[c];
  }
}

bool within_bounds(const std::int64_t* values, const std::int64_t* lo, const std::int64_t* hi,
                   std::size_t n) {
  std::size_t i = 0;
  __m256i bad = _mm256_setzero_si256();
  for (; i + 4 <= n; i += 4) {
    const __m256i v = load(values + i);
    bad = _mm256_or_si256(bad, _mm256_cmpgt_epi64(load(lo + i), v));
    bad = _mm256_or_si256(bad, _mm256_cmpgt_epi64(v, load(hi + i)));
  }
  if (!_mm256_testz_si256(bad, bad)) return false;
  for (; i < n; ++i)
    if (values[i] < lo[i] || values[i] > hi[i]) return false;
  return true;
}

// Signed overflow in a + b happens iff both operands share a sign that the
// result does not: ((a ^ r) & (b ^ r)) < 0.
bool offset_all(const std::int64_t* in, std::int64_t delta, std::int64_t* out, std::size_t n) {
  const __m256i d = _mm256_set1_epi64x(delta);
  __m256i overflow = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i a = load(in + i);
    const __m256i r = _mm256_add_epi64(a, d);
    overflow = _mm256_or_si256(overflow, _mm256_and_si256(_mm256_xor_si256(a, r), _mm256_xor_si256(d, r)));
    store(out + i, r);
  }
  if (_mm256_movemask_pd(_mm256_castsi256_pd(overflow)) != 0) return false;
  for (; i < n; ++i)
    if (__builtin_add_overflow(in[i], delta, &out[i])) return false;
  return true;
}

}  // namespace

const KernelTable avx2_table{Isa::avx2, accumulate_rows, row_difference, within_bounds, offset_all};

}  // namespace cohort::simd::detail
