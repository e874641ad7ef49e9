#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gdfactor/matrix.hpp"
#include "gdfactor/rng.hpp"

namespace gdfactor {

/// Full SVD M = left * diag(singular_values) * right^T.
///
/// left is m x m, right is n x n, both orthogonal; singular_values has
/// length min(m, n) and is nonincreasing. Sigma (the leading r x r block)
/// and Sigma-tilde (the trailing block) are slices of this object.
struct SpectralFrame {
  DenseMatrix left;
  std::vector<double> singular_values;
  DenseMatrix right;

  std::size_t m() const noexcept { return left.rows(); }
  std::size_t n() const noexcept { return right.rows(); }

  /// diag(sigma_1..sigma_r), r x r.
  DenseMatrix leading_sigma(std::size_t r) const;
  /// (m-r) x (n-r) diagonal of sigma_{r+1}, ..., sigma_min(m,n).
  DenseMatrix trailing_sigma(std::size_t r) const;
  /// The m x n diagonal matrix Sigma_X.
  DenseMatrix sigma_matrix() const;
  /// left * diag(sigma) * right^T.
  DenseMatrix reconstruct() const;
};

struct SvdOptions {
  double off_diagonal_tol = 1e-12;
  int max_sweeps = 60;
};

/// Entries i.i.d. N(0, variance) drawn from `rng` in row-major order.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double variance, RngStream& rng);

/// sqrt of the sum of squares, Neumaier-compensated.
double frobenius_norm(const DenseMatrix& m);
double frobenius_norm(std::span<const double> v);

/// Largest singular value by power iteration on M^T M from a fixed seeded
/// start vector; stops when the Rayleigh quotient stagnates.
double operator_norm(const DenseMatrix& m);

/// One-sided (Hestenes) Jacobi SVD. Each left singular vector paired with a
/// positive singular value has its largest-magnitude entry nonnegative (the
/// right vector follows); completion vectors are normalized the same way.
/// Throws NumericalFailure when the sweep budget is exhausted.
SpectralFrame svd(const DenseMatrix& m, const SvdOptions& opts = {});

/// Singular values only (same algorithm, no frame completion).
std::vector<double> singular_values(const DenseMatrix& m, const SvdOptions& opts = {});

/// The i-th singular value (1-based); 0 when i exceeds min(rows, cols).
double nth_singular_value(const DenseMatrix& m, std::size_t i);

/// Best rank-r approximation left_r * diag(sigma_1..r) * right_r^T.
DenseMatrix truncate_rank(const SpectralFrame& frame, std::size_t r);

/// Householder QR. q is rows x p (orthonormal columns), r is p x cols with
/// p = min(rows, cols); diag(r) >= 0.
struct QrResult {
  DenseMatrix q;
  DenseMatrix r;
};
QrResult householder_qr(const DenseMatrix& a);

/// Square orthogonal factor of a square matrix's QR with positive diag(R).
DenseMatrix orthogonal_factor(const DenseMatrix& square);

/// Singular values of L * R^T (L: m x c, R: n x c) without forming the
/// m x n product: QR of both factors, then Jacobi SVD of the small core.
std::vector<double> product_singular_values(const DenseMatrix& l, const DenseMatrix& r);
/// Operator norm of L * R^T via product_singular_values.
double product_operator_norm(const DenseMatrix& l, const DenseMatrix& r);

/// X = Q_L diag(s) Q_R^T with Q_L, Q_R orthogonal factors of seeded m x m
/// and n x n Gaussian matrices. Returns X together with its exact frame.
std::pair<DenseMatrix, SpectralFrame> synth_matrix(std::size_t m, std::size_t n,
                                                   std::span<const double> singular_values,
                                                   RngStream& rng);

}  // namespace gdfactor
