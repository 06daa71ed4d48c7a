#pragma once

// Data-parallel inner loops of timeline construction and window evaluation.
//
// Every kernel has a scalar reference implementation; AVX2 (x86-64) and NEON
// (AArch64) variants are compiled when the target supports them and picked
// at runtime. The environment variable COHORT_FORGE_SIMD=scalar|avx2|neon
// pins a variant (falling back to scalar when unavailable).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cohort::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  // cumulative[r] = cumulative[r-1] + counts[r], row-major with `width` columns.
  void (*accumulate_rows)(const std::int64_t* counts, std::int64_t* cumulative, std::size_t rows,
                          std::size_t width);
  // out[i] = hi[i] - lo[i]; a null `lo` means zeros.
  void (*row_difference)(const std::int64_t* hi, const std::int64_t* lo, std::int64_t* out,
                         std::size_t width);
  // true iff lo[i] <= values[i] <= hi[i] for every i.
  bool (*within_bounds)(const std::int64_t* values, const std::int64_t* lo, const std::int64_t* hi,
                        std::size_t n);
  // out[i] = in[i] + delta; false when any lane overflows (out is then unspecified).
  bool (*offset_all)(const std::int64_t* in, std::int64_t delta, std::int64_t* out, std::size_t n);
};

/// Kernels selected for this process.
const KernelTable& active() noexcept;

/// A specific variant, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* table_for(Isa isa) noexcept;

std::vector<Isa> available_isas();

void accumulate_rows(std::span<const std::int64_t> counts, std::span<std::int64_t> cumulative,
                     std::size_t width);
bool within_bounds(std::span<const std::int64_t> values, std::span<const std::int64_t> lo,
                   std::span<const std::int64_t> hi);

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace cohort::simd
