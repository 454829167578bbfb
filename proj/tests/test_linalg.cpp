// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dense_oracle.hpp"
#include "dwr/linalg.hpp"

using namespace dwr;

namespace {

SparseMatrix tridiag(int n, double lo, double di, double up) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, di});
    if (i > 0) t.push_back({i, i - 1, lo});
    if (i + 1 < n) t.push_back({i, i + 1, up});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

TEST_CASE("spmv basic cases") {
  const SparseMatrix I3 = SparseMatrix::identity(3);
  CHECK(spmv(I3, {1.0, 2.0, 3.0}) == Vector{1.0, 2.0, 3.0});

  const SparseMatrix Z = SparseMatrix::from_triplets(2, 2, {});
  CHECK(spmv(Z, {5.0, 7.0}) == Vector{0.0, 0.0});

  const SparseMatrix T = tridiag(3, -1.0, 2.0, -1.0);
  const Vector y = spmv(T, {1.0, 1.0, 1.0});
  const auto D = oracle::from_sparse(T);
  const auto y_ref = oracle::matvec(D, {1.0, 1.0, 1.0});
  CHECK(y == Vector{1.0, 0.0, 1.0});
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(y_ref[i]));

  CHECK_THROWS_AS(spmv(T, Vector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("spmv matches dense oracle on random sparse matrices") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 64);
    std::vector<Triplet> t;
    const int nnz = 1 + static_cast<int>(rng() % (4 * n));
    for (int k = 0; k < nnz; ++k)
      t.push_back({static_cast<int>(rng() % n), static_cast<int>(rng() % n), val(rng)});
    const SparseMatrix A = SparseMatrix::from_triplets(n, n, t);
    Vector x(static_cast<std::size_t>(n));
    for (double& v : x) v = val(rng);
    const Vector y = spmv(A, x);
    const auto y_ref = oracle::matvec(oracle::from_sparse(A), x);
    for (std::size_t i = 0; i < y.size(); ++i)
      CHECK(std::abs(y[i] - y_ref[i]) <= 1e-14 * (1.0 + std::abs(y_ref[i])));
  }
}

TEST_CASE("vector operations") {
  CHECK(dot({1.0, 0.0}, {0.0, 1.0}) == 0.0);
  CHECK(norm2({3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(axpy(2.0, {1.0, 1.0}, {1.0, 0.0}) == Vector{3.0, 2.0});
  CHECK_THROWS_AS(dot({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("cg_solve identity and diagonal cases") {
  const SparseMatrix I4 = SparseMatrix::identity(4);
  const Vector b{1.0, 2.0, 3.0, 4.0};
  const Vector x = cg_solve(I4, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i]));

  const SparseMatrix D =
      SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
  const Vector xd = cg_solve(D, {2.0, 4.0});
  CHECK(xd[0] == doctest::Approx(1.0));
  CHECK(xd[1] == doctest::Approx(1.0));
}

TEST_CASE("cg_solve matches dense LU on the 1D Poisson matrix") {
  const SparseMatrix T = tridiag(5, -1.0, 2.0, -1.0);
  const Vector b(5, 1.0);
  const Vector x = cg_solve(T, b);
  const auto x_ref = oracle::lu_solve(oracle::from_sparse(T), b);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(x[i] - x_ref[i]) <= 1e-10);
}

TEST_CASE("cg_solve residual contract on random SPD systems") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  SolverConfig cfg;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng() % 200;
    oracle::Mat M = oracle::zeros(n, n);
    for (auto& row : M)
      for (double& v : row) v = val(rng);
    // A = M^T M + I is SPD.
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = (i == j) ? 1.0 : 0.0;
        for (std::size_t k = 0; k < n; ++k) s += M[k][i] * M[k][j];
        t.push_back({static_cast<int>(i), static_cast<int>(j), s});
      }
    const SparseMatrix A = SparseMatrix::from_triplets(
        static_cast<int>(n), static_cast<int>(n), std::move(t));
    CHECK(A.is_symmetric());
    Vector b(n);
    for (double& v : b) v = val(rng);
    const Vector x = cg_solve(A, b, cfg);

    Vector r = b;
    add_scaled(r, -1.0, A.multiply(x));
    CHECK(norm2(r) <= cfg.rel_tolerance * norm2(b) * (1.0 + 1e-3));

    const auto x_ref = oracle::lu_solve(oracle::from_sparse(A), b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += (x[i] - x_ref[i]) * (x[i] - x_ref[i]);
      den += x_ref[i] * x_ref[i];
    }
    CHECK(std::sqrt(num) <= 1e-9 * std::max(1.0, std::sqrt(den)));
  }
}

TEST_CASE("cg_solve failure reporting") {
  // Indefinite matrix: CG detects a non-positive curvature direction.
  const SparseMatrix A =
      SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  CHECK_THROWS_AS(cg_solve(A, {1.0, 1.0}), SolverError);

  // Iteration cap: achieved residual is reported.
  const SparseMatrix T = tridiag(50, -1.0, 2.0, -1.0);
  SolverConfig tight;
  tight.max_iterations = 2;
  try {
    cg_solve(T, Vector(50, 1.0), tight);
    CHECK(false);
  } catch (const SolverError& e) {
    CHECK(e.iterations == 2);
    CHECK(e.achieved_residual > 0.0);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }

  CHECK_THROWS_AS(cg_solve(T, Vector(3, 1.0)), std::invalid_argument);
}

TEST_CASE("combine shares and merges sparsity patterns") {
  const SparseMatrix T = tridiag(4, -1.0, 2.0, -1.0);
  const SparseMatrix S = tridiag(4, 1.0, 1.0, 1.0);
  const SparseMatrix C = SparseMatrix::combine(2.0, T, 3.0, S);
  const auto D = oracle::from_sparse(C);
  CHECK(D[0][0] == doctest::Approx(7.0));
  CHECK(D[1][0] == doctest::Approx(1.0));

  const SparseMatrix I4 = SparseMatrix::identity(4);
  const SparseMatrix C2 = SparseMatrix::combine(1.0, T, 1.0, I4);
  const auto D2 = oracle::from_sparse(C2);
  CHECK(D2[0][0] == doctest::Approx(3.0));
  CHECK(D2[0][1] == doctest::Approx(-1.0));
}
