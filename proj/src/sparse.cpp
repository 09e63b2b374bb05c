#include "sparse.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"

namespace efem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

CsrMatrix::CsrMatrix(const std::vector<std::vector<int>>& rows) : n_(static_cast<int>(rows.size())) {
  row_ptr_.assign(rows.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<int> r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    cols_.insert(cols_.end(), r.begin(), r.end());
    row_ptr_[i + 1] = static_cast<int>(cols_.size());
  }
  values_.assign(cols_.size(), 0.0);
}

CsrMatrix::CsrMatrix(int n, std::vector<int> row_ptr, std::vector<int> cols, std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (static_cast<int>(row_ptr_.size()) != n_ + 1 || cols_.size() != values_.size() ||
      row_ptr_.back() != static_cast<int>(cols_.size())) {
    throw Error(ErrorCode::invalid_argument, "inconsistent CSR arrays");
  }
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (cols_[k] < 0 || cols_[k] >= n_ || (k > row_ptr_[i] && cols_[k] <= cols_[k - 1])) {
        throw Error(ErrorCode::invalid_argument, "CSR column indices must be in range and strictly increasing");
      }
    }
  }
}

int CsrMatrix::find(int i, int j) const {
  const auto first = cols_.begin() + row_ptr_[i];
  const auto last = cols_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? static_cast<int>(it - cols_.begin()) : -1;
}

double CsrMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

void CsrMatrix::add(int i, int j, double v) {
  const int k = find(i, j);
  if (k < 0) throw Error(ErrorCode::invalid_argument, "entry outside sparsity pattern");
  values_[k] += v;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(n_));
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const {
  return n_ == other.n_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> a(static_cast<std::size_t>(n_) * n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) a[static_cast<std::size_t>(i) * n_ + cols_[k]] = values_[k];
  }
  return a;
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a) {
  inv_diag_ = a.diagonal();
  for (std::size_t i = 0; i < inv_diag_.size(); ++i) {
    if (inv_diag_[i] == 0.0) {
      throw Error(ErrorCode::invalid_argument, "zero diagonal entry in row " + std::to_string(i));
    }
    inv_diag_[i] = 1.0 / inv_diag_[i];
  }
}

void JacobiPreconditioner::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < inv_diag_.size(); ++i) out[i] = inv_diag_[i] * in[i];
}

double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
  std::vector<double> r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bn = norm2(b);
  return bn == 0.0 ? norm2(r) : norm2(r) / bn;
}

SolveReport bicgstab(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const SolverOptions& options) {
  const int n = a.size();
  if (static_cast<int>(b.size()) != n) throw Error(ErrorCode::invalid_argument, "rhs size mismatch");
  x.resize(static_cast<std::size_t>(n), 0.0);
  SolveReport report;
  const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * std::max(n, 1);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }

  std::optional<JacobiPreconditioner> jacobi;
  if (options.precondition) jacobi.emplace(a);
  auto precond = [&](std::span<const double> in, std::span<double> out) {
    if (jacobi) {
      jacobi->apply(in, out);
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> r(un), rhat(un), p(un), v(un), s(un), t(un), y(un), z(un);
  // Breakdown guard for the scalar denominators.
  constexpr double tiny = 1e-300;

  auto restart = [&]() {
    a.multiply(x, r);
    for (std::size_t i = 0; i < un; ++i) r[i] = b[i] - r[i];
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
  };
  restart();
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  if (norm2(r) / bnorm <= options.tol) {
    report.converged = true;
    report.residual = relative_residual(a, x, b);
    return report;
  }

  bool broke_down = false;
  while (report.iterations < max_iter) {
    ++report.iterations;
    const double rho_new = dot(rhat, r);
    const double rnorm = norm2(r);
    if (std::abs(rho_new) <= 1e-30 * rnorm * norm2(rhat) + tiny) {
      broke_down = true;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      for (std::size_t i = 0; i < un; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      precond(p, y);
      a.multiply(y, v);
      const double rv = dot(rhat, v);
      if (std::abs(rv) <= tiny) {
        broke_down = true;
      } else {
        alpha = rho / rv;
        for (std::size_t i = 0; i < un; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) / bnorm <= options.tol) {
          for (std::size_t i = 0; i < un; ++i) x[i] += alpha * y[i];
          if (relative_residual(a, x, b) <= options.tol) break;
          restart();
          rho = alpha = omega = 1.0;
          continue;
        }
        precond(s, z);
        a.multiply(z, t);
        const double tt = dot(t, t);
        omega = tt > tiny ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < un; ++i) x[i] += alpha * y[i] + omega * z[i];
        for (std::size_t i = 0; i < un; ++i) r[i] = s[i] - omega * t[i];
        if (norm2(r) / bnorm <= options.tol) {
          // Guard against drift between the recurrence and the true residual.
          if (relative_residual(a, x, b) <= options.tol) break;
          restart();
          rho = alpha = omega = 1.0;
          continue;
        }
        if (std::abs(omega) <= tiny) broke_down = true;
      }
    }
    if (broke_down) {
      if (report.restarts >= 1) break;
      ++report.restarts;
      broke_down = false;
      restart();
      rho = alpha = omega = 1.0;
    }
  }
  report.residual = relative_residual(a, x, b);
  report.converged = report.residual <= options.tol;
  return report;
}

std::vector<double> dense_lu_solve(std::vector<double> a, int n, std::vector<double> b) {
  const auto N = static_cast<std::size_t>(n);
  if (a.size() != N * N || b.size() != N) throw Error(ErrorCode::invalid_argument, "dense solve size mismatch");
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < N; ++i) {
      if (std::abs(a[i * N + k]) > std::abs(a[piv * N + k])) piv = i;
    }
    if (a[piv * N + k] == 0.0) throw Error(ErrorCode::singular_system, "singular matrix in dense solve");
    if (piv != k) {
      for (std::size_t j = 0; j < N; ++j) std::swap(a[k * N + j], a[piv * N + j]);
      std::swap(b[k], b[piv]);
    }
    const double akk = a[k * N + k];
    for (std::size_t i = k + 1; i < N; ++i) {
      const double f = a[i * N + k] / akk;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < N; ++j) a[i * N + j] -= f * a[k * N + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(N);
  for (std::size_t ii = N; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < N; ++j) s -= a[ii * N + j] * x[j];
    x[ii] = s / a[ii * N + ii];
  }
  return x;
}

std::vector<double> dense_lu_solve(const CsrMatrix& a, std::span<const double> b) {
  if (a.size() > dense_solve_limit) {
    throw Error(ErrorCode::invalid_argument, "dense solve limited to " + std::to_string(dense_solve_limit) +
                                                 " unknowns, system has " + std::to_string(a.size()));
  }
  return dense_lu_solve(a.to_dense(), a.size(), std::vector<double>(b.begin(), b.end()));
}

std::vector<double> equilibrate(CsrMatrix& a, std::vector<double>& b) {
  if (b.size() != static_cast<std::size_t>(a.size())) throw Error(ErrorCode::invalid_argument, "rhs size mismatch");
  std::vector<double> scale = a.diagonal();
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (scale[i] == 0.0) throw Error(ErrorCode::singular_system, "zero diagonal entry in row " + std::to_string(i));
    scale[i] = 1.0 / std::sqrt(std::abs(scale[i]));
  }
  auto& v = a.values();
  const auto& rp = a.row_ptr();
  const auto& cols = a.cols();
  for (int i = 0; i < a.size(); ++i) {
    for (int k = rp[i]; k < rp[i + 1]; ++k) v[k] *= scale[i] * scale[cols[k]];
    b[i] *= scale[i];
  }
  return scale;
}

}  // namespace efem
