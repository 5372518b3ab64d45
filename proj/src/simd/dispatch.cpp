#include <atomic>
#include <cstdlib>
#include <string_view>

#include "dumbbell/simd/kernels.hpp"

namespace dumbbell::simd {

#ifndef DUMBBELL_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("DUMBBELL_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return &scalar_kernels();
  }
  if (avx2_kernels() != nullptr && cpu_has_avx2()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(Isa isa) {
  if (isa == Isa::Scalar) {
    slot().store(&scalar_kernels(), std::memory_order_release);
    return true;
  }
  if (avx2_kernels() == nullptr || !cpu_has_avx2()) return false;
  slot().store(avx2_kernels(), std::memory_order_release);
  return true;
}

}  // namespace dumbbell::simd
