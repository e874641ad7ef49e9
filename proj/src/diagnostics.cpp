#include "gdfactor/diagnostics.hpp"

#include <algorithm>
#include <string>

#include "gdfactor/error.hpp"

namespace gdfactor {

namespace {

double spectral_norm(const DenseMatrix& m) {
  const auto s = singular_values(m);
  return s.empty() ? 0.0 : s.front();
}

void require_square_sigma(const DenseMatrix& sigma, std::size_t r, const char* op) {
  if (sigma.rows() != r || sigma.cols() != r) {
    throw InvalidArgument(std::string(op) + ": Sigma must be " + std::to_string(r) + "x" + std::to_string(r));
  }
}

}  // namespace

FactorPair align(const SpectralFrame& frame, const FactorPair& pair) {
  pair.validate();
  if (frame.left.rows() != pair.F.rows() || frame.right.rows() != pair.G.rows()) {
    throw InvalidArgument("align: frame dimensions do not match the factor pair");
  }
  return {matmul_tn(frame.left, pair.F), matmul_tn(frame.right, pair.G)};
}

BlockSplit split(const FactorPair& aligned, std::size_t r) {
  aligned.validate();
  const std::size_t m = aligned.F.rows();
  const std::size_t n = aligned.G.rows();
  if (r > std::min(m, n)) {
    throw InvalidArgument("split: r=" + std::to_string(r) + " exceeds min(m, n)");
  }
  const std::size_t k = aligned.inner_dim();
  return {aligned.F.block(0, 0, r, k), aligned.F.block(r, 0, m - r, k), aligned.G.block(0, 0, r, k),
          aligned.G.block(r, 0, n - r, k)};
}

SymmetrizedState symmetrize(const BlockSplit& blocks, const DenseMatrix& sigma) {
  require_square_sigma(sigma, blocks.r(), "symmetrize");
  SymmetrizedState s;
  s.A = blocks.U + blocks.V;
  s.A *= 0.5;
  s.B = blocks.U - blocks.V;
  s.B *= 0.5;
  s.P = sigma - matmul_nt(s.A, s.A) + matmul_nt(s.B, s.B);
  s.Q = matmul_nt(s.A, s.B) - matmul_nt(s.B, s.A);
  return s;
}

BlockSplit predicted_block_step(const BlockSplit& b, const DenseMatrix& sigma, const DenseMatrix& sigma_tilde,
                                double eta) {
  const std::size_t r = b.r();
  require_square_sigma(sigma, r, "predicted_block_step");
  if (sigma_tilde.rows() != b.J.rows() || sigma_tilde.cols() != b.K.rows()) {
    throw InvalidArgument("predicted_block_step: SigmaTilde must be (m-r)x(n-r)");
  }
  const DenseMatrix gram_g = matmul_tn(b.V, b.V) + matmul_tn(b.K, b.K);  // G^T G
  const DenseMatrix gram_f = matmul_tn(b.U, b.U) + matmul_tn(b.J, b.J);  // F^T F

  BlockSplit next = b;
  next.U.add_scaled(eta, matmul(sigma, b.V)).add_scaled(-eta, matmul(b.U, gram_g));
  next.V.add_scaled(eta, matmul(sigma, b.U)).add_scaled(-eta, matmul(b.V, gram_f));
  next.J.add_scaled(eta, matmul(sigma_tilde, b.K)).add_scaled(-eta, matmul(b.J, gram_g));
  next.K.add_scaled(eta, matmul_tn(sigma_tilde, b.J)).add_scaled(-eta, matmul(b.K, gram_f));
  return next;
}

SymmetrizedState predicted_symmetrized_step(const SymmetrizedState& st, const BlockSplit& blocks,
                                            const DenseMatrix& sigma, double eta) {
  const std::size_t r = st.A.rows();
  require_square_sigma(sigma, r, "predicted_symmetrized_step");
  const DenseMatrix& A = st.A;
  const DenseMatrix& B = st.B;
  const DenseMatrix& P = st.P;

  const DenseMatrix ktk = matmul_tn(blocks.K, blocks.K);
  const DenseMatrix jtj = matmul_tn(blocks.J, blocks.J);
  DenseMatrix half_sum = ktk + jtj;
  half_sum *= 0.5;
  DenseMatrix half_diff = ktk - jtj;
  half_diff *= 0.5;

  const DenseMatrix abt = matmul_nt(A, B);
  const DenseMatrix bat = matmul_nt(B, A);
  DenseMatrix c = matmul(bat, B) - matmul(abt, B) - matmul(A, half_sum) - matmul(B, half_diff);
  DenseMatrix d = matmul(abt, A) - matmul(bat, A) - matmul(A, half_diff) - matmul(B, half_sum);

  const DenseMatrix pa = matmul(P, A);
  const DenseMatrix pb = matmul(P, B);

  SymmetrizedState next;
  next.A = A;
  next.A.add_scaled(eta, pa).add_scaled(eta, c);
  next.B = B;
  next.B.add_scaled(-eta, pb).add_scaled(eta, d);

  DenseMatrix a_lift = A;  // A + eta P A
  a_lift.add_scaled(eta, pa);
  DenseMatrix b_drop = B;  // B - eta P B
  b_drop.add_scaled(-eta, pb);
  const DenseMatrix sigma_minus_p = sigma - P;
  const DenseMatrix bbt = matmul_nt(B, B);

  next.P = P;
  next.P.add_scaled(-eta, matmul(P, sigma_minus_p))
      .add_scaled(-eta, matmul(sigma_minus_p, P))
      .add_scaled(eta * eta, matmul(matmul(P, P), P) - matmul(matmul(P, sigma), P))
      .add_scaled(-2.0 * eta, matmul(bbt, P))
      .add_scaled(-2.0 * eta, matmul(P, bbt))
      .add_scaled(-eta, matmul_nt(a_lift, c))
      .add_scaled(-eta, matmul_nt(c, a_lift))
      .add_scaled(-eta * eta, matmul_nt(c, c))
      .add_scaled(eta, matmul_nt(b_drop, d))
      .add_scaled(eta, matmul_nt(d, b_drop))
      .add_scaled(eta * eta, matmul_nt(d, d));
  next.Q = matmul_nt(next.A, next.B) - matmul_nt(next.B, next.A);
  return next;
}

SignalRatio signal_ratio(const DenseMatrix& f, const DenseMatrix& g, const SpectralFrame& frame, std::size_t r) {
  if (r < 1 || r > std::min(frame.m(), frame.n())) {
    throw InvalidArgument("signal_ratio: r out of range");
  }
  const BlockSplit blocks = split(align(frame, FactorPair{f, g}), r);
  const double numerator = std::min(nth_singular_value(blocks.U, r), nth_singular_value(blocks.V, r));
  const double denominator = std::max(spectral_norm(blocks.J), spectral_norm(blocks.K));
  const double scale = std::max(frobenius_norm(f), frobenius_norm(g));
  if (scale > 0.0 && denominator <= 1e-14 * scale) {
    return {SignalRatio::Kind::kInfinite, 0.0};
  }
  if (denominator == 0.0) return {SignalRatio::Kind::kFinite, 0.0};
  return {SignalRatio::Kind::kFinite, numerator / denominator};
}

BlockNorms block_norms(const BlockSplit& blocks, const SymmetrizedState& state, const DenseMatrix& sigma) {
  const std::size_t r = blocks.r();
  require_square_sigma(sigma, r, "block_norms");
  BlockNorms out;
  out.signal_residual = r > 0 ? spectral_norm(matmul_nt(blocks.U, blocks.V) - sigma) : 0.0;
  out.uk = product_operator_norm(blocks.U, blocks.K);
  out.jv = product_operator_norm(blocks.J, blocks.V);
  out.jk = product_operator_norm(blocks.J, blocks.K);
  out.p = r > 0 ? spectral_norm(state.P) : 0.0;
  out.q = r > 0 ? spectral_norm(state.Q) : 0.0;
  out.b_fro = frobenius_norm(state.B);
  out.sigma_r_a = r > 0 ? nth_singular_value(state.A, r) : 0.0;
  return out;
}

BlockNorms trajectory_block_norms(const SpectralFrame& frame, const FactorPair& pair, std::size_t r) {
  const BlockSplit blocks = split(align(frame, pair), r);
  const DenseMatrix sigma = frame.leading_sigma(r);
  return block_norms(blocks, symmetrize(blocks, sigma), sigma);
}

}  // namespace gdfactor
