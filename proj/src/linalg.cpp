#include "gdfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gdfactor/error.hpp"

namespace gdfactor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::uint64_t kPowerIterationSeed = 0x6a09e667f3bcc909ULL;

using Column = std::vector<double>;

double dot(const Column& a, const Column& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale(Column& a, double s) {
  for (double& v : a) v *= s;
}

// Columns of a matrix stored contiguously, the natural layout for
// one-sided Jacobi rotations.
std::vector<Column> to_columns(const DenseMatrix& a) {
  std::vector<Column> cols(a.cols(), Column(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) cols[j][i] = a(i, j);
  }
  return cols;
}

DenseMatrix from_columns(const std::vector<Column>& cols, std::size_t rows) {
  DenseMatrix out(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.set_column(j, cols[j]);
  return out;
}

// Orthogonalizes w's columns in place (A V = W). V is accumulated when
// `v` is non-null.
void jacobi_sweeps(std::vector<Column>& w, std::vector<Column>* v, const SvdOptions& opts) {
  const std::size_t n = w.size();
  // columns below rounding level of the whole matrix count as zero
  double total = 0.0;
  for (const Column& c : w) total += dot(c, c);
  const double negligible = total * kEps * kEps;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Column& wp = w[p];
        Column& wq = w[q];
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        const double gamma = dot(wp, wq);
        if (alpha <= negligible || beta <= negligible) continue;
        if (std::abs(gamma) <= opts.off_diagonal_tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < wp.size(); ++i) {
          const double x = wp[i];
          const double y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        if (v != nullptr) {
          Column& vp = (*v)[p];
          Column& vq = (*v)[q];
          for (std::size_t i = 0; i < vp.size(); ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - s * y;
            vq[i] = s * x + c * y;
          }
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalFailure("svd: one-sided Jacobi did not converge within " +
                         std::to_string(opts.max_sweeps) + " sweeps");
}

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return idx;
}

// Projects `x` off the accepted columns twice (classical Gram-Schmidt with
// re-orthogonalization) and returns the residual norm.
double orthogonalize(Column& x, const std::vector<Column>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Column& b : basis) {
      const double c = dot(b, x);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * b[i];
    }
  }
  return std::sqrt(dot(x, x));
}

// Extends `basis` (orthonormal columns of length dim) to `target` columns,
// each time picking the coordinate axis least covered by the current basis.
void complete_basis(std::vector<Column>& basis, std::size_t dim, std::size_t target,
                    std::vector<double>& row_weight) {
  while (basis.size() < target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dim; ++i) {
      if (row_weight[i] < row_weight[best]) best = i;
    }
    Column e(dim, 0.0);
    e[best] = 1.0;
    const double norm = orthogonalize(e, basis);
    if (norm < 1e-8) {
      // Numerically covered already; never chosen again.
      row_weight[best] = std::numeric_limits<double>::infinity();
      continue;
    }
    scale(e, 1.0 / norm);
    for (std::size_t i = 0; i < dim; ++i) row_weight[i] += e[i] * e[i];
    basis.push_back(std::move(e));
  }
}

std::size_t argmax_abs(const Column& x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) > std::abs(x[best])) best = i;
  }
  return best;
}

// Full SVD of a tall (rows >= cols) matrix.
SpectralFrame tall_svd(const DenseMatrix& a, const SvdOptions& opts) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Column> w = to_columns(a);
  std::vector<Column> v(n, Column(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;
  jacobi_sweeps(w, &v, opts);

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(dot(w[j], w[j]));
  const auto order = descending_order(norms);
  const double sigma_max = n > 0 ? norms[order[0]] : 0.0;
  const double zero_tol = sigma_max * static_cast<double>(std::max(m, n)) * kEps;

  SpectralFrame frame;
  frame.singular_values.resize(n);
  std::vector<Column> right(n);
  std::vector<Column> left;
  std::vector<bool> paired(n, false);
  std::vector<Column> pending_left(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    frame.singular_values[k] = norms[j];
    right[k] = v[j];
    if (norms[j] > zero_tol && norms[j] > 0.0) {
      Column u = w[j];
      scale(u, 1.0 / norms[j]);
      pending_left[k] = std::move(u);
      paired[k] = true;
    }
  }

  // Left vectors for positive singular values, re-orthogonalized in
  // decreasing order; the rest is completed from coordinate axes.
  std::vector<double> row_weight(m, 0.0);
  std::vector<Column> accepted;
  std::vector<std::size_t> slot_of_accepted;
  for (std::size_t k = 0; k < n; ++k) {
    if (!paired[k]) continue;
    Column u = pending_left[k];
    const double norm = orthogonalize(u, accepted);
    if (norm < 0.5) {
      paired[k] = false;
      continue;
    }
    scale(u, 1.0 / norm);
    for (std::size_t i = 0; i < m; ++i) row_weight[i] += u[i] * u[i];
    accepted.push_back(std::move(u));
    slot_of_accepted.push_back(k);
  }
  const std::size_t n_paired = accepted.size();
  complete_basis(accepted, m, m, row_weight);

  left.assign(m, Column());
  std::size_t next_extra = n_paired;
  for (std::size_t a_idx = 0; a_idx < n_paired; ++a_idx) left[slot_of_accepted[a_idx]] = accepted[a_idx];
  for (std::size_t k = 0; k < m; ++k) {
    if (k < n && paired[k]) continue;
    left[k] = accepted[next_extra++];
  }

  for (std::size_t k = 0; k < m; ++k) {
    Column& u = left[k];
    if (u[argmax_abs(u)] < 0.0) {
      scale(u, -1.0);
      if (k < n && paired[k]) scale(right[k], -1.0);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (paired[k]) continue;
    if (right[k][argmax_abs(right[k])] < 0.0) scale(right[k], -1.0);
  }

  frame.left = from_columns(left, m);
  frame.right = from_columns(right, n);
  return frame;
}

void require_nonempty(const DenseMatrix& m, const char* op) {
  if (m.rows() == 0 || m.cols() == 0) throw InvalidArgument(std::string(op) + ": empty matrix");
}

}  // namespace

DenseMatrix SpectralFrame::leading_sigma(std::size_t r) const {
  if (r > singular_values.size()) throw InvalidArgument("leading_sigma: r out of range");
  return DenseMatrix::diagonal(std::span<const double>(singular_values).first(r));
}

DenseMatrix SpectralFrame::trailing_sigma(std::size_t r) const {
  if (r > singular_values.size()) throw InvalidArgument("trailing_sigma: r out of range");
  return DenseMatrix::diagonal(std::span<const double>(singular_values).subspan(r), m() - r, n() - r);
}

DenseMatrix SpectralFrame::sigma_matrix() const {
  return DenseMatrix::diagonal(singular_values, m(), n());
}

DenseMatrix SpectralFrame::reconstruct() const {
  DenseMatrix scaled = left.left_cols(singular_values.size());
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= singular_values[j];
  }
  return matmul_nt(scaled, right.left_cols(singular_values.size()));
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double variance, RngStream& rng) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("gaussian_matrix: variance must be positive");
  }
  const double sd = std::sqrt(variance);
  DenseMatrix m(rows, cols);
  for (double& x : m.data()) x = sd * rng.next_gaussian();
  return m;
}

double frobenius_norm(std::span<const double> v) {
  double scale_by = 0.0;
  for (double x : v) scale_by = std::max(scale_by, std::abs(x));
  if (scale_by == 0.0) return 0.0;
  // Neumaier summation of (x / scale)^2.
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double y = x / scale_by;
    const double term = y * y;
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return scale_by * std::sqrt(sum + comp);
}

double frobenius_norm(const DenseMatrix& m) { return frobenius_norm(m.data()); }

double operator_norm(const DenseMatrix& m) {
  require_nonempty(m, "operator_norm");
  const double amax = m.max_abs();
  if (amax == 0.0) return 0.0;
  // Work on M / max|m_ij| so that squares neither overflow nor underflow.
  DenseMatrix a = m;
  a *= 1.0 / amax;

  RngStream rng(kPowerIterationSeed);
  std::vector<double> v(a.cols());
  for (double& x : v) x = rng.next_gaussian();
  double nv = frobenius_norm(v);
  for (double& x : v) x /= nv;

  std::vector<double> w(a.rows());
  std::vector<double> z(a.cols());
  double lambda_prev = 0.0;
  double lambda = 0.0;
  int stagnant = 0;
  constexpr int kMaxIterations = 200000;
  for (int it = 0; it < kMaxIterations; ++it) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      auto row = a.row(i);
      for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * v[j];
      w[i] = s;
    }
    // Rayleigh quotient of M^T M at unit v.
    const double nw = frobenius_norm(w);
    lambda = nw * nw;
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      auto row = a.row(i);
      for (std::size_t j = 0; j < a.cols(); ++j) z[j] += row[j] * w[i];
    }
    const double nz = frobenius_norm(z);
    if (nz == 0.0) break;
    for (std::size_t j = 0; j < z.size(); ++j) v[j] = z[j] / nz;
    if (it > 0 && lambda <= lambda_prev * (1.0 + 4.0 * kEps)) {
      if (++stagnant >= 2) break;
    } else {
      stagnant = 0;
    }
    lambda_prev = std::max(lambda_prev, lambda);
  }
  return amax * std::sqrt(std::max(lambda, lambda_prev));
}

SpectralFrame svd(const DenseMatrix& m, const SvdOptions& opts) {
  require_nonempty(m, "svd");
  if (!m.all_finite()) throw InvalidArgument("svd: non-finite entry");
  if (m.rows() >= m.cols()) return tall_svd(m, opts);
  SpectralFrame t = tall_svd(m.transpose(), opts);
  SpectralFrame frame{std::move(t.right), std::move(t.singular_values), std::move(t.left)};
  // Re-apply the sign convention on the new left vectors.
  const std::size_t p = frame.singular_values.size();
  const double zero_tol = (p > 0 ? frame.singular_values[0] : 0.0) *
                          static_cast<double>(std::max(m.rows(), m.cols())) * kEps;
  for (std::size_t k = 0; k < frame.left.cols(); ++k) {
    Column u = frame.left.column(k);
    if (u[argmax_abs(u)] >= 0.0) continue;
    scale(u, -1.0);
    frame.left.set_column(k, u);
    if (k < p && frame.singular_values[k] > zero_tol && frame.singular_values[k] > 0.0) {
      Column vr = frame.right.column(k);
      scale(vr, -1.0);
      frame.right.set_column(k, vr);
    }
  }
  return frame;
}

std::vector<double> singular_values(const DenseMatrix& m, const SvdOptions& opts) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  std::vector<Column> w = to_columns(m.rows() >= m.cols() ? m : m.transpose());
  jacobi_sweeps(w, nullptr, opts);
  std::vector<double> s(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) s[j] = std::sqrt(dot(w[j], w[j]));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

double nth_singular_value(const DenseMatrix& m, std::size_t i) {
  if (i == 0) throw InvalidArgument("nth_singular_value: index is 1-based");
  const auto s = singular_values(m);
  return i <= s.size() ? s[i - 1] : 0.0;
}

DenseMatrix truncate_rank(const SpectralFrame& frame, std::size_t r) {
  const std::size_t p = frame.singular_values.size();
  if (r < 1 || r > p) {
    throw InvalidArgument("truncate_rank: r=" + std::to_string(r) + " outside [1, " + std::to_string(p) + "]");
  }
  DenseMatrix scaled = frame.left.left_cols(r);
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) scaled(i, j) *= frame.singular_values[j];
  }
  return matmul_nt(scaled, frame.right.left_cols(r));
}

QrResult householder_qr(const DenseMatrix& a) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const std::size_t p = std::min(rows, cols);
  DenseMatrix r = a;
  std::vector<Column> reflectors(p);
  std::vector<double> work(cols);

  for (std::size_t j = 0; j < p; ++j) {
    Column v(rows - j);
    for (std::size_t i = j; i < rows; ++i) v[i - j] = r(i, j);
    const double xnorm = frobenius_norm(v);
    if (xnorm == 0.0) continue;
    const double alpha = v[0] >= 0.0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm = frobenius_norm(v);
    if (vnorm == 0.0) continue;
    scale(v, 1.0 / vnorm);
    // R[j:, j:] -= 2 v (v^T R[j:, j:])
    std::fill(work.begin(), work.end(), 0.0);
    for (std::size_t i = j; i < rows; ++i) {
      const double vi = v[i - j];
      auto row = r.row(i);
      for (std::size_t c = j; c < cols; ++c) work[c] += vi * row[c];
    }
    for (std::size_t i = j; i < rows; ++i) {
      const double vi = 2.0 * v[i - j];
      auto row = r.row(i);
      for (std::size_t c = j; c < cols; ++c) row[c] -= vi * work[c];
    }
    for (std::size_t i = j + 1; i < rows; ++i) r(i, j) = 0.0;
    reflectors[j] = std::move(v);
  }

  DenseMatrix q(rows, p);
  for (std::size_t j = 0; j < p; ++j) q(j, j) = 1.0;
  std::vector<double> qwork(p);
  for (std::size_t jj = p; jj-- > 0;) {
    const Column& v = reflectors[jj];
    if (v.empty()) continue;
    std::fill(qwork.begin(), qwork.end(), 0.0);
    for (std::size_t i = jj; i < rows; ++i) {
      const double vi = v[i - jj];
      auto row = q.row(i);
      for (std::size_t c = 0; c < p; ++c) qwork[c] += vi * row[c];
    }
    for (std::size_t i = jj; i < rows; ++i) {
      const double vi = 2.0 * v[i - jj];
      auto row = q.row(i);
      for (std::size_t c = 0; c < p; ++c) row[c] -= vi * qwork[c];
    }
  }

  DenseMatrix r_out = r.top_rows(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (r_out(j, j) >= 0.0) continue;
    for (double& x : r_out.row(j)) x = -x;
    for (std::size_t i = 0; i < rows; ++i) q(i, j) = -q(i, j);
  }
  return {std::move(q), std::move(r_out)};
}

DenseMatrix orthogonal_factor(const DenseMatrix& square) {
  if (square.rows() != square.cols()) throw InvalidArgument("orthogonal_factor: matrix must be square");
  return householder_qr(square).q;
}

std::vector<double> product_singular_values(const DenseMatrix& l, const DenseMatrix& r) {
  if (l.cols() != r.cols()) throw InvalidArgument("product_singular_values: inner dimension mismatch");
  if (l.rows() == 0 || r.rows() == 0 || l.cols() == 0) return {};
  const DenseMatrix rl = householder_qr(l).r;
  const DenseMatrix rr = householder_qr(r).r;
  return singular_values(matmul_nt(rl, rr));
}

double product_operator_norm(const DenseMatrix& l, const DenseMatrix& r) {
  const auto s = product_singular_values(l, r);
  return s.empty() ? 0.0 : s.front();
}

std::pair<DenseMatrix, SpectralFrame> synth_matrix(std::size_t m, std::size_t n,
                                                   std::span<const double> singular_values,
                                                   RngStream& rng) {
  if (m == 0 || n == 0) throw InvalidArgument("synth_matrix: empty dimensions");
  const std::size_t p = std::min(m, n);
  if (singular_values.size() > p) throw InvalidArgument("synth_matrix: more singular values than min(m, n)");
  for (std::size_t i = 0; i < singular_values.size(); ++i) {
    if (!(singular_values[i] >= 0.0) || !std::isfinite(singular_values[i])) {
      throw InvalidArgument("synth_matrix: singular values must be finite and nonnegative");
    }
    if (i > 0 && singular_values[i] > singular_values[i - 1]) {
      throw InvalidArgument("synth_matrix: singular values must be nonincreasing");
    }
  }
  SpectralFrame frame;
  frame.left = orthogonal_factor(gaussian_matrix(m, m, 1.0, rng));
  frame.right = orthogonal_factor(gaussian_matrix(n, n, 1.0, rng));
  frame.singular_values.assign(p, 0.0);
  std::copy(singular_values.begin(), singular_values.end(), frame.singular_values.begin());

  const std::size_t s = singular_values.size();
  DenseMatrix x(m, n);
  if (s > 0) {
    DenseMatrix scaled = frame.left.left_cols(s);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < s; ++j) scaled(i, j) *= singular_values[j];
    }
    x = matmul_nt(scaled, frame.right.left_cols(s));
  }
  return {std::move(x), std::move(frame)};
}

}  // namespace gdfactor
