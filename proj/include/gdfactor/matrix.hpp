#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdfactor {

/// Row-major dense real matrix. Zero-row or zero-column matrices are
/// allowed so that degenerate blocks (e.g. J when r == m) stay total.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  /// Zero-filled rows x cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of row-major data; throws InvalidArgument when the
  /// length is not rows*cols or an entry is not finite.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  /// rows x cols matrix with `diag` on the main diagonal (extra entries
  /// beyond min(rows, cols) are rejected).
  static DenseMatrix diagonal(std::span<const double> diag, std::size_t rows, std::size_t cols);
  static DenseMatrix diagonal(std::span<const double> diag) {
    return diagonal(diag, diag.size(), diag.size());
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  DenseMatrix transpose() const;
  /// Copy of the nr x nc block starting at (r0, c0).
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  DenseMatrix top_rows(std::size_t n) const { return block(0, 0, n, cols_); }
  DenseMatrix left_cols(std::size_t n) const { return block(0, 0, rows_, n); }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s) noexcept;
  /// this += s * other
  DenseMatrix& add_scaled(double s, const DenseMatrix& other);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a);
DenseMatrix operator*(double s, DenseMatrix a);

/// A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// A^T * B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// A * B^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

/// Vertical concatenation [top; bottom]; column counts must agree.
DenseMatrix vstack(const DenseMatrix& top, const DenseMatrix& bottom);
/// Horizontal concatenation [left, right]; row counts must agree.
DenseMatrix hstack(const DenseMatrix& left, const DenseMatrix& right);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace gdfactor
