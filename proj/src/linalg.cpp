// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dwr {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SparseMatrix::SparseMatrix(int n_rows, int n_cols,
                           std::vector<std::size_t> row_ptr,
                           std::vector<int> cols, std::vector<double> vals)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      cols_(std::move(cols)),
      vals_(std::move(vals)) {
  require(row_ptr_.size() == static_cast<std::size_t>(n_rows_) + 1,
          "row pointer length mismatch");
  require(cols_.size() == vals_.size(), "index/value length mismatch");
}

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         std::vector<Triplet> triplets) {
  require(n_rows >= 0 && n_cols >= 0, "negative matrix dimension");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<std::size_t> row_ptr(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const int r = triplets[i].row;
    const int c = triplets[i].col;
    require(r >= 0 && r < n_rows && c >= 0 && c < n_cols,
            "triplet index out of range");
    double sum = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      sum += triplets[i].value;
      ++i;
    }
    cols.push_back(c);
    vals.push_back(sum);
    ++row_ptr[static_cast<std::size_t>(r) + 1];
  }
  for (int r = 0; r < n_rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return SparseMatrix(n_rows, n_cols, std::move(row_ptr), std::move(cols),
                      std::move(vals));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

Vector SparseMatrix::multiply(const Vector& x) const {
  require(x.size() == static_cast<std::size_t>(n_cols_),
          "spmv dimension mismatch");
  Vector y(static_cast<std::size_t>(n_rows_), 0.0);
  for (int r = 0; r < n_rows_; ++r) {
    double sum = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      sum += vals_[k] * x[static_cast<std::size_t>(cols_[k])];
    y[static_cast<std::size_t>(r)] = sum;
  }
  return y;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

Vector SparseMatrix::diagonal() const {
  Vector d(static_cast<std::size_t>(n_rows_), 0.0);
  for (int r = 0; r < n_rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (cols_[k] == r) d[static_cast<std::size_t>(r)] = vals_[k];
  return d;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (n_rows_ != n_cols_) return false;
  const double tol = rel_tol * std::max(max_abs(), 1e-300);
  // Gather transpose entries row by row via a column cursor sweep.
  std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
  for (int r = 0; r < n_rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int c = cols_[k];
      // Find entry (c, r).
      double a_cr = 0.0;
      for (std::size_t j = row_ptr_[c]; j < row_ptr_[c + 1]; ++j) {
        if (cols_[j] == r) {
          a_cr = vals_[j];
          break;
        }
      }
      if (std::abs(vals_[k] - a_cr) > tol) return false;
    }
  }
  (void)cursor;
  return true;
}

SparseMatrix SparseMatrix::combine(double a, const SparseMatrix& A, double b,
                                   const SparseMatrix& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(),
          "combine: shape mismatch");
  if (A.row_ptr_ == B.row_ptr_ && A.cols_ == B.cols_) {
    SparseMatrix C = A;
    for (std::size_t k = 0; k < C.vals_.size(); ++k)
      C.vals_[k] = a * A.vals_[k] + b * B.vals_[k];
    return C;
  }
  std::vector<Triplet> t;
  t.reserve(A.nnz() + B.nnz());
  for (int r = 0; r < A.rows(); ++r) {
    for (std::size_t k = A.row_ptr_[r]; k < A.row_ptr_[r + 1]; ++k)
      t.push_back({r, A.cols_[k], a * A.vals_[k]});
    for (std::size_t k = B.row_ptr_[r]; k < B.row_ptr_[r + 1]; ++k)
      t.push_back({r, B.cols_[k], b * B.vals_[k]});
  }
  return from_triplets(A.rows(), A.cols(), std::move(t));
}

Vector spmv(const SparseMatrix& A, const Vector& x) { return A.multiply(x); }

double dot(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "dot dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector axpy(double alpha, const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "axpy dimension mismatch");
  Vector z(y);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] += alpha * x[i];
  return z;
}

void add_scaled(Vector& y, double alpha, const Vector& x) {
  require(x.size() == y.size(), "add_scaled dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector cg_solve(const SparseMatrix& A, const Vector& b,
                const SolverConfig& cfg, const Vector* initial) {
  require(A.rows() == A.cols(), "cg_solve: matrix not square");
  require(b.size() == static_cast<std::size_t>(A.rows()),
          "cg_solve: rhs dimension mismatch");
  require(cfg.rel_tolerance > 0.0, "cg_solve: tolerance must be positive");

  const std::size_t n = b.size();
  const double norm_b = norm2(b);
  if (norm_b == 0.0) return Vector(n, 0.0);
  const double target = cfg.rel_tolerance * norm_b;
  const std::size_t max_it =
      cfg.max_iterations > 0 ? cfg.max_iterations : 10 * std::max<std::size_t>(n, 1);

  Vector inv_diag;
  if (cfg.preconditioner == SolverConfig::Preconditioner::Diagonal) {
    inv_diag = A.diagonal();
    for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
  }
  auto apply_precond = [&](const Vector& r) {
    if (inv_diag.empty()) return r;
    Vector z(r);
    for (std::size_t i = 0; i < n; ++i) z[i] *= inv_diag[i];
    return z;
  };

  Vector x = initial ? *initial : Vector(n, 0.0);
  if (initial) require(initial->size() == n, "cg_solve: guess dimension mismatch");

  Vector r = b;
  if (initial) {
    Vector Ax = A.multiply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= Ax[i];
  }
  double res = norm2(r);
  if (res <= target) return x;

  Vector z = apply_precond(r);
  Vector p = z;
  double rz = dot(r, z);

  for (std::size_t it = 0; it < max_it; ++it) {
    const Vector Ap = A.multiply(p);
    const double p_ap = dot(p, Ap);
    if (!(p_ap > 0.0) || !std::isfinite(p_ap)) {
      std::ostringstream os;
      os << "cg_solve: matrix not positive definite (p'Ap = " << p_ap << ")";
      throw SolverError(os.str(), res / norm_b, it);
    }
    const double alpha = rz / p_ap;
    add_scaled(x, alpha, p);
    add_scaled(r, -alpha, Ap);
    res = norm2(r);
    if (!std::isfinite(res))
      throw SolverError("cg_solve: NaN detected in residual", res, it);
    if (res <= target) return x;
    z = apply_precond(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::ostringstream os;
  os << "cg_solve: no convergence in " << max_it
     << " iterations, achieved relative residual " << res / norm_b;
  throw SolverError(os.str(), res / norm_b, max_it);
}

}  // namespace dwr
