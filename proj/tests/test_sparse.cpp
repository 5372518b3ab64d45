#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "dumbbell/error.hpp"
#include "dumbbell/sparse.hpp"

using namespace dumbbell;

TEST_CASE("triplet assembly sums duplicates and mirrors the lower triangle") {
  const SparseSym A = SparseSym::from_triplets(3, {{0, 0, 1.0}, {1, 0, 2.0}, {0, 1, 0.5}, {2, 2, 4.0}, {0, 0, 1.0}});
  CHECK(A.dim() == 3);
  CHECK(A.nnz_upper() == 3);
  CHECK(A.at(0, 0) == 2.0);
  CHECK(A.at(0, 1) == 2.5);
  CHECK(A.at(1, 0) == 2.5);
  CHECK(A.at(1, 1) == 0.0);
  CHECK(A.at(2, 2) == 4.0);

  const auto d = A.to_dense();
  CHECK(d == std::vector<double>{2.0, 2.5, 0.0, 2.5, 0.0, 0.0, 0.0, 0.0, 4.0});

  CHECK_THROWS_AS(SparseSym::from_triplets(2, {{0, 2, 1.0}}), Error);
}

TEST_CASE("assembly is independent of triplet order") {
  std::vector<Triplet> t;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> idx(0, 19);
  std::uniform_int_distribution<int> val(-8, 8);
  for (int k = 0; k < 400; ++k) t.push_back({idx(rng), idx(rng), 0.25 * val(rng)});
  const SparseSym a = SparseSym::from_triplets(20, t);
  std::shuffle(t.begin(), t.end(), rng);
  const SparseSym b = SparseSym::from_triplets(20, t);
  CHECK(a.values() == b.values());
  CHECK(a.col_idx() == b.col_idx());
}

TEST_CASE("matrix-vector product uses both triangles") {
  const SparseSym A = SparseSym::from_triplets(3, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 1, 2.0}, {1, 2, -1.0}, {2, 2, 2.0}});
  const Vector y = A.multiply(Vector{1.0, 2.0, 3.0});
  CHECK(y == Vector{0.0, 0.0, 4.0});
  CHECK(A.bilinear(Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}) == -1.0);
  Vector out(2);
  CHECK_THROWS_AS(A.multiply(Vector{1.0, 2.0}, out), Error);
}

TEST_CASE("identity and block diagonal") {
  const SparseSym I = SparseSym::identity(4);
  CHECK(I.multiply(Vector{1, 2, 3, 4}) == Vector{1, 2, 3, 4});
  const std::vector<std::vector<double>> blocks{{1.0, 2.0, 2.0, 3.0}, {4.0, 0.0, 0.0, 5.0}};
  const SparseSym B = SparseSym::block_diagonal(blocks, 2);
  CHECK(B.dim() == 4);
  CHECK(B.at(0, 1) == 2.0);
  CHECK(B.at(1, 2) == 0.0);
  CHECK(B.at(3, 3) == 5.0);
}

TEST_CASE("Matrix Market output") {
  const SparseSym A = SparseSym::from_triplets(2, {{0, 0, 1.0}, {0, 1, 0.5}, {1, 1, 3.0}});
  std::istringstream in(A.to_matrix_market());
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  int r = 0, c = 0, nnz = 0;
  in >> r >> c >> nnz;
  CHECK(r == 2);
  CHECK(nnz == 3);
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    in >> i >> j >> v;
    CHECK(i >= j);
    sum += v;
  }
  CHECK(sum == 4.5);
}

TEST_CASE("vector helpers") {
  const Vector a{3.0, 4.0};
  CHECK(norm2(a) == 5.0);
  CHECK(dot(a, Vector{1.0, 1.0}) == 7.0);
  Vector y{1.0, 1.0};
  axpy(2.0, a, y);
  CHECK(y == Vector{7.0, 9.0});
}
