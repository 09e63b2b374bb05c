#pragma once

#include <span>
#include <vector>

namespace efem {

/// Compressed-row matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Pattern from per-row column lists (sorted and deduplicated here); values start at zero.
  explicit CsrMatrix(const std::vector<std::vector<int>>& rows);
  CsrMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values);

  int size() const { return n_; }
  std::size_t nonzeros() const { return cols_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Position of (i,j) in the value array, or -1 when not in the pattern.
  int find(int i, int j) const;
  /// Value at (i,j), zero outside the pattern.
  double at(int i, int j) const;
  /// Accumulate into an existing pattern entry; throws if (i,j) is not stored.
  void add(int i, int j, double v);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  bool same_pattern(const CsrMatrix& other) const;
  /// Row-major dense copy (small systems only).
  std::vector<double> to_dense() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Symmetric diagonal scaling S A S y = S b with S = |diag(A)|^(-1/2). Returns S;
/// the original unknowns are x = S y.
std::vector<double> equilibrate(CsrMatrix& a, std::vector<double>& b);

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // ||b - Ax|| / ||b||, recomputed from the returned x
  bool converged = false;
  int restarts = 0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0 selects 10 n
  bool precondition = true;
};

/// Diagonal (Jacobi) scaling operator.
class JacobiPreconditioner {
 public:
  explicit JacobiPreconditioner(const CsrMatrix& a);
  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  std::vector<double> inv_diag_;
};

/// Right-preconditioned BiCGSTAB; x holds the initial guess on entry.
SolveReport bicgstab(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const SolverOptions& options = {});

double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b);

inline constexpr int dense_solve_limit = 2000;

/// Dense LU with partial pivoting on a row-major n x n matrix.
std::vector<double> dense_lu_solve(std::vector<double> a, int n, std::vector<double> b);
/// Dense LU fallback for assembled systems up to dense_solve_limit unknowns.
std::vector<double> dense_lu_solve(const CsrMatrix& a, std::span<const double> b);

}  // namespace efem
