#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dumbbell {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix holding only the upper triangle (col >= row) in
/// compressed-row form; the lower triangle is implied.
class SparseSym {
 public:
  SparseSym() = default;

  /// Sums duplicate entries after a stable sort on (row, col), so the result
  /// does not depend on how the caller ordered contributions of distinct entries.
  /// Entries with col < row are mirrored into the upper triangle.
  static SparseSym from_triplets(int n, std::vector<Triplet> triplets);
  static SparseSym identity(int n);
  static SparseSym block_diagonal(std::span<const std::vector<double>> blocks, int block_size);

  int dim() const { return n_; }
  std::size_t nnz_upper() const { return values_.size(); }
  bool symmetric() const { return true; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry (i, j) from either triangle; zero if not stored.
  double at(int i, int j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector multiply(std::span<const double> x) const;
  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  /// Dense row-major copy (both triangles).
  std::vector<double> to_dense() const;

  /// Matrix Market coordinate format, symmetric, lower triangle (1-based).
  std::string to_matrix_market() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double norm2(std::span<const double> a);

}  // namespace dumbbell
