#include "dumbbell/simd/kernels.hpp"

namespace dumbbell::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void project_scalar(const double* V, std::size_t ld, std::size_t m, const double* z, std::size_t n, double* c) {
  for (std::size_t j = 0; j < m; ++j) c[j] = dot_scalar(V + j * ld, z, n);
}

void subtract_combination_scalar(const double* V, std::size_t ld, std::size_t m, const double* c, std::size_t n,
                                 double* w) {
  for (std::size_t j = 0; j < m; ++j) axpy_scalar(-c[j], V + j * ld, w, n);
}

void outer_accumulate16_scalar(const double* A, const double* B, std::size_t rows, double weight, double* K) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = A + r * 16;
    const double* b = B + r * 16;
    for (std::size_t i = 0; i < 16; ++i) {
      const double ai = weight * a[i];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < 16; ++j) K[i * 16 + j] += ai * b[j];
    }
  }
}

constexpr KernelTable kScalar{Isa::Scalar,           "scalar",
                              &dot_scalar,           &axpy_scalar,
                              &project_scalar,       &subtract_combination_scalar,
                              &outer_accumulate16_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace dumbbell::simd
