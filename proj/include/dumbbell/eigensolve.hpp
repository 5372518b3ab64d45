#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dumbbell/geometry.hpp"
#include "dumbbell/sparse.hpp"

namespace dumbbell {

struct SpectrumMeta {
  std::string domain_kind;
  double epsilon = 0.0;
  MaterialParams params;
  std::string resolution;
  std::string solver;
};

/// Ascending eigenpairs of K x = lambda M x with M-orthonormal vectors.
struct Spectrum {
  std::vector<double> values;
  std::vector<Vector> vectors;
  std::vector<double> residuals;  // ||K x - lambda M x|| / ||K x||
  SpectrumMeta meta;

  std::size_t size() const { return values.size(); }
};

/// Start-vector seed used when none is configured.
inline constexpr std::uint64_t kDefaultSeed = 0x5eed2024ULL;

struct SolverOptions {
  int k = 6;
  double tol = 1e-6;
  // Largest Krylov basis (columns); 0 picks max(8k + 8 block, 160) capped at n.
  int max_iters = 0;
  std::uint64_t seed = kDefaultSeed;
  // Columns per Lanczos block; blocks resolve exactly repeated eigenvalues.
  int block_size = 4;
  // Optional stiffness Gram a(z_i, z_j) (row-major) for the final Rayleigh-Ritz
  // step; defaults to z_i^T K z_j.
  std::function<std::vector<double>(const std::vector<Vector>&)> stiffness_gram;
};

/// k smallest eigenpairs by block shift-invert Lanczos at shift 0 (sparse
/// Cholesky of K) with full M-reorthogonalization.
Spectrum solve_smallest(const SparseSym& K, const SparseSym& M, const SolverOptions& options);

/// Full spectrum by dense reduction (Cholesky of K, symmetric eigensolve of
/// L^{-1} M L^{-T}, eigenvalues inverted).
/// Limited to dimension <= 2000.
Spectrum dense_reference_solve(const SparseSym& K, const SparseSym& M);

/// ||K x - lambda M x||_2 / ||K x||_2 per pair, recomputed from scratch.
std::vector<double> residual_report(const SparseSym& K, const SparseSym& M, const Spectrum& spectrum);

/// Runs of eigenvalues agreeing to relative `rel_tol`, as [first, last) index ranges.
std::vector<std::pair<std::size_t, std::size_t>> clusters(const std::vector<double>& values, double rel_tol = 1e-8);

/// Flips each eigenvector so that its first entry of magnitude above
/// 1e-8 * max|x| among `candidate` indices (all entries when empty) is positive.
void normalize_signs(Spectrum& spectrum, const std::vector<std::size_t>& candidate = {});

}  // namespace dumbbell
