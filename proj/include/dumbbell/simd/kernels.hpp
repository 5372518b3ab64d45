#pragma once

#include <cstddef>
#include <string_view>

// Dense inner loops of the solver (Krylov reorthogonalization and element
// quadrature). Each kernel has a portable scalar reference and, where the
// build supports it, an AVX2/FMA variant chosen at runtime.
namespace dumbbell::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // c[j] = sum_i V[j * ld + i] * z[i] for j < m (V stores m columns of length n).
  void (*project)(const double* V, std::size_t ld, std::size_t m, const double* z, std::size_t n, double* c);

  // w[i] -= sum_j V[j * ld + i] * c[j]
  void (*subtract_combination)(const double* V, std::size_t ld, std::size_t m, const double* c, std::size_t n,
                               double* w);

  // K[i * 16 + j] += weight * sum_r A[r * 16 + i] * B[r * 16 + j]  (16 x 16 element block)
  void (*outer_accumulate16)(const double* A, const double* B, std::size_t rows, double weight, double* K);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

/// True when the running CPU reports AVX2 and FMA.
bool cpu_has_avx2();

/// Kernels used by the library. Defaults to the best supported ISA; the
/// environment variable DUMBBELL_SIMD=scalar forces the reference path.
const KernelTable& active();

/// Overrides the dispatch (used by equivalence tests). Returns false if the
/// requested ISA is unavailable on this build or CPU.
bool select(Isa isa);

}  // namespace dumbbell::simd
