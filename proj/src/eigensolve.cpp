#include "dumbbell/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "dumbbell/error.hpp"
#include "dumbbell/simd/kernels.hpp"

namespace dumbbell {

namespace {

Eigen::SparseMatrix<double> to_eigen_upper(const SparseSym& a) {
  const int n = a.dim();
  // Row-major upper triangle == column-major lower triangle of the transpose;
  // map it row-major and let Eigen convert.
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> mapped(
      n, n, static_cast<int>(a.nnz_upper()), a.row_ptr().data(), a.col_idx().data(), a.values().data());
  return Eigen::SparseMatrix<double>(mapped);
}

class KrylovBasis {
 public:
  KrylovBasis(const SparseSym& m, std::size_t n, std::size_t capacity)
      : m_(m), n_(n), capacity_(capacity), data_(n * capacity), mw_(n) {}

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const double* column(std::size_t j) const { return data_.data() + j * n_; }
  const double* data() const { return data_.data(); }

  /// Two passes of classical Gram-Schmidt in the M inner product. Coefficients
  /// are accumulated into `coeff` (length >= size()) when non-null. Returns the
  /// remaining M-norm.
  double orthogonalize(std::vector<double>& w, double* coeff) {
    const auto& kern = simd::active();
    std::vector<double> c(size_);
    for (int pass = 0; pass < 2; ++pass) {
      m_.multiply(w, mw_);
      if (size_ > 0) {
        kern.project(data_.data(), n_, size_, mw_.data(), n_, c.data());
        kern.subtract_combination(data_.data(), n_, size_, c.data(), n_, w.data());
        if (coeff != nullptr) {
          for (std::size_t i = 0; i < size_; ++i) coeff[i] += c[i];
        }
      }
    }
    m_.multiply(w, mw_);
    return std::sqrt(std::max(0.0, kern.dot(w.data(), mw_.data(), n_)));
  }

  void append(const std::vector<double>& w, double norm) {
    double* dst = data_.data() + size_ * n_;
    const double inv = 1.0 / norm;
    for (std::size_t i = 0; i < n_; ++i) dst[i] = w[i] * inv;
    ++size_;
  }

 private:
  const SparseSym& m_;
  std::size_t n_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::vector<double> data_;
  std::vector<double> mw_;
};

double m_norm(const SparseSym& m, const std::vector<double>& w) {
  const Vector mw = m.multiply(w);
  return std::sqrt(std::max(0.0, simd::active().dot(w.data(), mw.data(), w.size())));
}

// Reduced problem T s = mu s on the first `m` basis columns.
struct RitzState {
  Eigen::VectorXd mu;       // ascending
  Eigen::MatrixXd vectors;  // columns
  std::vector<double> estimate;
};

// Rayleigh-Ritz on span(Z): returns ascending values and M-orthonormal vectors.
void rayleigh_ritz(const SparseSym& K, const SparseSym& M, std::vector<Vector>& Z, std::vector<double>& values,
                   const SolverOptions& options) {
  const auto k = static_cast<Eigen::Index>(Z.size());
  const auto& kern = simd::active();
  std::vector<Vector> kz(Z.size());
  std::vector<Vector> mz(Z.size());
  for (std::size_t i = 0; i < Z.size(); ++i) {
    kz[i] = K.multiply(Z[i]);
    mz[i] = M.multiply(Z[i]);
  }
  Eigen::MatrixXd Kp(k, k);
  Eigen::MatrixXd Mp(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const std::size_t len = Z[ui].size();
      Kp(i, j) = Kp(j, i) = 0.5 * (kern.dot(Z[ui].data(), kz[uj].data(), len) + kern.dot(Z[uj].data(), kz[ui].data(), len));
      Mp(i, j) = Mp(j, i) = 0.5 * (kern.dot(Z[ui].data(), mz[uj].data(), len) + kern.dot(Z[uj].data(), mz[ui].data(), len));
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(Mp);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "refinement basis lost rank");
  if (options.stiffness_gram) {
    const std::vector<double> g = options.stiffness_gram(Z);
    if (g.size() != Z.size() * Z.size()) throw Error(ErrorKind::DimensionMismatch, "stiffness Gram has the wrong size");
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) Kp(i, j) = g[static_cast<std::size_t>(i * k + j)];
  }
  Eigen::MatrixXd C = llt.matrixL().solve(Kp);
  C = llt.matrixL().solve(C.transpose()).eval();
  C = 0.5 * (C + C.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const Eigen::MatrixXd S = llt.matrixU().solve(es.eigenvectors());
  const std::size_t n = Z.empty() ? 0 : Z[0].size();
  std::vector<Vector> out(Z.size(), Vector(n, 0.0));
  values.assign(Z.size(), 0.0);
  for (Eigen::Index c = 0; c < k; ++c) {
    auto& x = out[static_cast<std::size_t>(c)];
    for (Eigen::Index j = 0; j < k; ++j) kern.axpy(S(j, c), Z[static_cast<std::size_t>(j)].data(), x.data(), n);
    values[static_cast<std::size_t>(c)] = es.eigenvalues()[c];
  }
  Z = std::move(out);
}

}  // namespace

Spectrum solve_smallest(const SparseSym& K, const SparseSym& M, const SolverOptions& options) {
  const int n = K.dim();
  if (M.dim() != n) throw Error(ErrorKind::DimensionMismatch, "K and M have different dimensions");
  if (options.k < 1 || options.k >= n) {
    throw Error(ErrorKind::InvalidArgument, "requested k = " + std::to_string(options.k) + " must satisfy 1 <= k < n = " + std::to_string(n));
  }
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "solver tolerance must be positive");

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Upper, Eigen::AMDOrdering<int>> llt;
  llt.compute(to_eigen_upper(K));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::FactorizationFailed, "sparse Cholesky of K failed (K not positive definite)");
  }

  const auto un = static_cast<std::size_t>(n);
  const auto k = static_cast<std::size_t>(options.k);
  const std::size_t block = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.block_size)), 1, un);
  std::size_t max_cols = options.max_iters > 0 ? static_cast<std::size_t>(options.max_iters)
                                               : std::max<std::size_t>(8 * k + 8 * block, 160);
  max_cols = std::clamp(max_cols, std::min(un, k + block), un);
  const std::size_t capacity = std::min(un, max_cols + block);

  KrylovBasis basis(M, un, capacity);
  // H(i, q): coefficient of basis column i in A v_q, A = K^{-1} M.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(max_cols));

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  auto random_column = [&] {
    std::vector<double> r(un);
    for (auto& v : r) v = uniform(rng);
    return r;
  };
  // Extends the basis with a fresh random direction; false once the space is full.
  auto inject_random = [&] {
    for (int attempt = 0; attempt < 4 && basis.size() < capacity; ++attempt) {
      std::vector<double> r = random_column();
      const double before = m_norm(M, r);
      const double after = basis.orthogonalize(r, nullptr);
      if (after > 1e-8 * before) {
        basis.append(r, after);
        return true;
      }
    }
    return false;
  };

  for (std::size_t j = 0; j < block; ++j) inject_random();

  Eigen::VectorXd rhs(n);
  Eigen::VectorXd sol(n);
  std::vector<double> w(un);
  std::vector<double> coeff(capacity);
  const double ritz_tol = std::min(options.tol * 1e-2, 1e-10);

  Spectrum result;
  std::size_t q = 0;
  std::size_t last_check = 0;
  while (true) {
    const bool can_expand = q < basis.size() && q < max_cols;
    if (can_expand) {
      const Vector mv = M.multiply(std::span<const double>(basis.column(q), un));
      for (int i = 0; i < n; ++i) rhs[i] = mv[static_cast<std::size_t>(i)];
      sol = llt.solve(rhs);
      for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = sol[i];
      const double before = m_norm(M, w);
      std::fill(coeff.begin(), coeff.end(), 0.0);
      const std::size_t prior = basis.size();
      const double after = basis.orthogonalize(w, coeff.data());
      for (std::size_t i = 0; i < prior; ++i) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = coeff[i];
      if (basis.size() < capacity) {
        if (after > 1e-8 * before) {
          H(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(q)) = after;
          basis.append(w, after);
        } else {
          inject_random();
        }
      }
      ++q;
    }

    const std::size_t m = q;
    const bool exhausted = !can_expand || (q >= basis.size());
    const bool due = m >= k + block && (m - last_check >= block || exhausted);
    if (!due && !exhausted) continue;
    if (m < k) {
      if (exhausted) throw Error(ErrorKind::NoConvergence, "Krylov space exhausted before k vectors were built");
      continue;
    }
    last_check = m;

    const auto em = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd T = H.topLeftCorner(em, em);
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
    const Eigen::Index rows_left = static_cast<Eigen::Index>(basis.size()) - em;
    bool ritz_ok = true;
    for (std::size_t i = 0; i < k; ++i) {
      const Eigen::Index col = em - 1 - static_cast<Eigen::Index>(i);
      const double mu = tes.eigenvalues()[col];
      double est = 0.0;
      if (rows_left > 0) est = (H.block(em, 0, rows_left, em) * tes.eigenvectors().col(col)).norm();
      if (!(mu > 0.0) || est > ritz_tol * mu) ritz_ok = false;
    }
    if (!ritz_ok && !exhausted) continue;

    // Assemble Ritz vectors, refine by one inverse-iteration sweep plus
    // Rayleigh-Ritz, then verify true residuals.
    Spectrum trial;
    trial.values.resize(k);
    trial.vectors.resize(k);
    const auto& kern = simd::active();
    for (std::size_t i = 0; i < k; ++i) {
      const Eigen::Index col = em - 1 - static_cast<Eigen::Index>(i);
      const double mu = tes.eigenvalues()[col];
      std::vector<double> s(m);
      for (std::size_t j = 0; j < m; ++j) s[j] = -tes.eigenvectors()(static_cast<Eigen::Index>(j), col);
      Vector x(un, 0.0);
      kern.subtract_combination(basis.data(), un, m, s.data(), un, x.data());
      const double nrm = m_norm(M, x);
      for (auto& v : x) v /= nrm;
      trial.values[i] = 1.0 / mu;
      trial.vectors[i] = std::move(x);
    }
    for (auto& x : trial.vectors) {
      const Vector mx = M.multiply(x);
      for (int i = 0; i < n; ++i) rhs[i] = mx[static_cast<std::size_t>(i)];
      sol = llt.solve(rhs);
      for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = sol[i];
    }
    rayleigh_ritz(K, M, trial.vectors, trial.values, options);
    trial.residuals = residual_report(K, M, trial);
    const bool residual_ok = std::all_of(trial.residuals.begin(), trial.residuals.end(),
                                         [&](double r) { return r <= options.tol; });
    if (residual_ok) {
      result = std::move(trial);
      break;
    }
    if (exhausted) {
      const double worst = *std::max_element(trial.residuals.begin(), trial.residuals.end());
      char buf[160];
      std::snprintf(buf, sizeof buf, "Lanczos stopped after %zu basis vectors (max_iters) with residual %.3e > tol %.3e", m,
                    worst, options.tol);
      throw Error(ErrorKind::NoConvergence, buf);
    }
  }

  normalize_signs(result);
  result.meta.solver = "block-shift-invert-lanczos";
  return result;
}

Spectrum dense_reference_solve(const SparseSym& K, const SparseSym& M) {
  const int n = K.dim();
  if (M.dim() != n) throw Error(ErrorKind::DimensionMismatch, "K and M have different dimensions");
  if (n > 2000) throw Error(ErrorKind::TooLarge, "dense reference limited to 2000 DOFs, got " + std::to_string(n));
  const std::vector<double> kd = K.to_dense();
  const std::vector<double> md = M.to_dense();
  const Eigen::MatrixXd Kd = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(kd.data(), n, n);
  const Eigen::MatrixXd Md = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(md.data(), n, n);
  // Reduce to the standard problem C y = y / lambda, C = L^{-1} M L^{-T},
  // K = L L^T, so the smallest lambda come from the best-resolved end.
  const Eigen::LLT<Eigen::MatrixXd> llt(Kd);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::FactorizationFailed, "dense Cholesky of K failed");
  Eigen::MatrixXd C = llt.matrixL().solve(Md);
  C = llt.matrixL().solve(C.transpose()).eval();
  C = 0.5 * (C + C.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "dense symmetric eigensolve failed");
  const Eigen::MatrixXd Y = llt.matrixU().solve(es.eigenvectors());
  Spectrum s;
  const auto un = static_cast<std::size_t>(n);
  s.values.resize(un);
  s.vectors.resize(un);
  for (int i = 0; i < n; ++i) {
    // Eigenvalues of C ascend, so mu_{n-1} is the largest 1/lambda.
    const Eigen::Index col = n - 1 - i;
    const double mu = es.eigenvalues()[col];
    if (!(mu > 0.0)) throw Error(ErrorKind::FactorizationFailed, "M is not positive definite");
    s.values[static_cast<std::size_t>(i)] = 1.0 / mu;
    // Y columns are K-orthonormal; rescale to M-orthonormal.
    const double scale = std::sqrt(1.0 / mu);
    Vector x(un);
    for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = Y(j, col) * scale;
    s.vectors[static_cast<std::size_t>(i)] = std::move(x);
  }
  s.residuals = residual_report(K, M, s);
  normalize_signs(s);
  s.meta.solver = "dense-generalized";
  return s;
}

std::vector<double> residual_report(const SparseSym& K, const SparseSym& M, const Spectrum& spectrum) {
  std::vector<double> out;
  out.reserve(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const Vector& x = spectrum.vectors[i];
    const Vector kx = K.multiply(x);
    const Vector mx = M.multiply(x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double r = kx[j] - spectrum.values[i] * mx[j];
      num += r * r;
      den += kx[j] * kx[j];
    }
    out.push_back(den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> clusters(const std::vector<double>& values, double rel_tol) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    const bool split = i == values.size() ||
                       std::abs(values[i] - values[i - 1]) > rel_tol * std::max(std::abs(values[i]), std::abs(values[i - 1]));
    if (split) {
      if (i > start) out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

void normalize_signs(Spectrum& spectrum, const std::vector<std::size_t>& candidate) {
  for (auto& x : spectrum.vectors) {
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    const double thresh = 1e-8 * mx;
    auto flip_if = [&](double v) {
      if (v < 0.0) {
        for (auto& e : x) e = -e;
      }
    };
    if (candidate.empty()) {
      for (double v : x) {
        if (std::abs(v) > thresh) {
          flip_if(v);
          break;
        }
      }
    } else {
      for (std::size_t idx : candidate) {
        if (idx < x.size() && std::abs(x[idx]) > thresh) {
          flip_if(x[idx]);
          break;
        }
      }
    }
  }
}

}  // namespace dumbbell
