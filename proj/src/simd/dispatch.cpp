#include "cohort/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace cohort::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "scalar";
}

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (__builtin_cpu_supports("avx2")) return &detail::avx2_table;
#endif
      return nullptr;
    case Isa::neon:
#if defined(__aarch64__)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
    if (table_for(isa)) out.push_back(isa);
  return out;
}

namespace {

const KernelTable& select() noexcept {
  if (const char* pinned = std::getenv("COHORT_FORGE_SIMD")) {
    std::string_view want = pinned;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == isa_name(isa)) {
        const KernelTable* t = table_for(isa);
        return t ? *t : detail::scalar_table;
      }
    }
  }
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (const KernelTable* t = table_for(isa)) return *t;
  return detail::scalar_table;
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

void accumulate_rows(std::span<const std::int64_t> counts, std::span<std::int64_t> cumulative,
                     std::size_t width) {
  if (counts.size() != cumulative.size() || (width && counts.size() % width))
    throw std::invalid_argument("accumulate_rows: shape mismatch");
  if (width == 0) return;
  active().accumulate_rows(counts.data(), cumulative.data(), counts.size() / width, width);
}

bool within_bounds(std::span<const std::int64_t> values, std::span<const std::int64_t> lo,
                   std::span<const std::int64_t> hi) {
  if (values.size() != lo.size() || values.size() != hi.size())
    throw std::invalid_argument("within_bounds: length mismatch");
  return active().within_bounds(values.data(), lo.data(), hi.data(), values.size());
}

}  // namespace cohort::simd
