#include "dumbbell/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dumbbell/error.hpp"
#include "dumbbell/simd/kernels.hpp"

namespace dumbbell {

SparseSym SparseSym::from_triplets(int n, std::vector<Triplet> triplets) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative matrix dimension");
  for (auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
      throw Error(ErrorKind::DimensionMismatch, "triplet index out of range");
    }
    if (t.col < t.row) std::swap(t.row, t.col);
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
  });
  SparseSym m;
  m.n_ = n;
  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const int r = triplets[k].row;
    const int c = triplets[k].col;
    double v = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) v += triplets[k].value;
    m.col_idx_.push_back(c);
    m.values_.push_back(v);
    ++m.row_ptr_[static_cast<std::size_t>(r) + 1];
  }
  for (int i = 0; i < n; ++i) m.row_ptr_[static_cast<std::size_t>(i) + 1] += m.row_ptr_[static_cast<std::size_t>(i)];
  return m;
}

SparseSym SparseSym::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, std::move(t));
}

SparseSym SparseSym::block_diagonal(std::span<const std::vector<double>> blocks, int block_size) {
  std::vector<Triplet> t;
  const auto bs = static_cast<std::size_t>(block_size);
  t.reserve(blocks.size() * bs * (bs + 1) / 2);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size() != bs * bs) throw Error(ErrorKind::DimensionMismatch, "block has wrong size");
    const int off = static_cast<int>(b * bs);
    for (std::size_t i = 0; i < bs; ++i) {
      for (std::size_t j = i; j < bs; ++j) {
        t.push_back({off + static_cast<int>(i), off + static_cast<int>(j), blocks[b][i * bs + j]});
      }
    }
  }
  return from_triplets(static_cast<int>(blocks.size() * bs), std::move(t));
}

double SparseSym::at(int i, int j) const {
  if (j < i) std::swap(i, j);
  const auto begin = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
  const auto end = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseSym::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(n_) || y.size() != static_cast<std::size_t>(n_)) {
    throw Error(ErrorKind::DimensionMismatch, "matrix-vector size mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double acc = 0.0;
    const double xi = x[ui];
    for (int k = row_ptr_[ui]; k < row_ptr_[ui + 1]; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const auto j = static_cast<std::size_t>(col_idx_[uk]);
      acc += values_[uk] * x[j];
      if (j != ui) y[j] += values_[uk] * xi;
    }
    y[ui] += acc;
  }
}

Vector SparseSym::multiply(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(n_));
  multiply(x, y);
  return y;
}

double SparseSym::bilinear(std::span<const double> x, std::span<const double> y) const {
  const Vector ay = multiply(y);
  return dot(x, ay);
}

std::vector<double> SparseSym::to_dense() const {
  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)]);
      d[i * n + j] = values_[static_cast<std::size_t>(k)];
      d[j * n + i] = values_[static_cast<std::size_t>(k)];
    }
  }
  return d;
}

std::string SparseSym::to_matrix_market() const {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << n_ << ' ' << n_ << ' ' << values_.size() << '\n';
  char buf[64];
  // Symmetric Matrix Market stores the lower triangle: emit (col, row).
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", values_[static_cast<std::size_t>(k)]);
      os << col_idx_[static_cast<std::size_t>(k)] + 1 << ' ' << i + 1 << ' ' << buf << '\n';
    }
  }
  return os.str();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "dot size mismatch");
  return simd::active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "axpy size mismatch");
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace dumbbell
