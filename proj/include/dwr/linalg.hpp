// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_LINALG_HPP
#define DWR_LINALG_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dwr {

using Vector = std::vector<double>;

/// Entry of a coordinate-format accumulator used during assembly.
struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and duplicates are merged at compression time.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols, std::vector<std::size_t> row_ptr,
               std::vector<int> cols, std::vector<double> vals);

  /// Compress a triplet list; duplicate (row, col) pairs are summed.
  /// Structural zeros are kept so that matrices assembled on the same
  /// mesh share a sparsity pattern.
  static SparseMatrix from_triplets(int n_rows, int n_cols,
                                    std::vector<Triplet> triplets);

  static SparseMatrix identity(int n);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  std::size_t nnz() const { return vals_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_index() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }
  std::vector<double>& values() { return vals_; }

  Vector multiply(const Vector& x) const;

  /// Largest entry magnitude; 0 for an empty matrix.
  double max_abs() const;

  Vector diagonal() const;

  /// ‖A − Aᵀ‖_max ≤ tol · ‖A‖_max. All systems assembled in this project
  /// are symmetric; the check runs in tests and debug paths.
  bool is_symmetric(double rel_tol = 1e-12) const;

  /// a·A + b·B for matrices sharing one sparsity pattern (same mesh, same
  /// assembly order). Falls back to a triplet merge otherwise.
  static SparseMatrix combine(double a, const SparseMatrix& A, double b,
                              const SparseMatrix& B);

private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
};

Vector spmv(const SparseMatrix& A, const Vector& x);

struct SolverConfig {
  double rel_tolerance = 1e-12;
  /// 0 selects the default of 10·n iterations.
  std::size_t max_iterations = 0;
  enum class Preconditioner { None, Diagonal };
  Preconditioner preconditioner = Preconditioner::Diagonal;
};

/// Thrown when CG fails to reach the requested residual reduction.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double achieved_residual,
              std::size_t iterations)
      : std::runtime_error(what),
        achieved_residual(achieved_residual),
        iterations(iterations) {}
  double achieved_residual;
  std::size_t iterations;
};

/// Preconditioned conjugate gradients for SPD systems. Returns x with
/// ‖b − A x‖₂ ≤ rel_tolerance · ‖b‖₂. An optional initial guess warm-starts
/// the iteration.
Vector cg_solve(const SparseMatrix& A, const Vector& b,
                const SolverConfig& cfg = {}, const Vector* initial = nullptr);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

/// Returns alpha·x + y.
Vector axpy(double alpha, const Vector& x, const Vector& y);

/// y += alpha·x in place.
void add_scaled(Vector& y, double alpha, const Vector& x);

}  // namespace dwr

#endif  // DWR_LINALG_HPP
