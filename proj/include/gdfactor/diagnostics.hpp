#pragma once

#include <cstddef>

#include "gdfactor/factor_pair.hpp"
#include "gdfactor/linalg.hpp"
#include "gdfactor/matrix.hpp"

namespace gdfactor {

/// Row blocks of a frame-aligned pair: F = [U; J], G = [V; K].
struct BlockSplit {
  DenseMatrix U;  // r x k
  DenseMatrix J;  // (m - r) x k
  DenseMatrix V;  // r x k
  DenseMatrix K;  // (n - r) x k

  std::size_t r() const noexcept { return U.rows(); }
};

/// A = (U+V)/2, B = (U-V)/2, P = Sigma - AA^T + BB^T, Q = AB^T - BA^T.
/// Sigma - UV^T == P + Q.
struct SymmetrizedState {
  DenseMatrix A;
  DenseMatrix B;
  DenseMatrix P;
  DenseMatrix Q;
};

/// Operator norms of the pieces that bound ||FG^T - X_r||.
struct BlockNorms {
  double signal_residual = 0.0;  // ||UV^T - Sigma||
  double uk = 0.0;               // ||UK^T||
  double jv = 0.0;               // ||JV^T||
  double jk = 0.0;               // ||JK^T||
  double p = 0.0;                // ||P||
  double q = 0.0;                // ||Q||
  double b_fro = 0.0;            // ||B||_F
  double sigma_r_a = 0.0;        // sigma_r(A)

  /// ||UV^T - Sigma|| + ||UK^T|| + ||JV^T|| + ||JK^T||
  double error_bound() const noexcept { return signal_residual + uk + jv + jk; }
};

/// Relative signal; `infinite` when the complement projection vanishes.
struct SignalRatio {
  enum class Kind { kFinite, kInfinite };
  Kind kind = Kind::kFinite;
  double value = 0.0;

  bool infinite() const noexcept { return kind == Kind::kInfinite; }
};

/// (Phi^T F, Psi^T G).
FactorPair align(const SpectralFrame& frame, const FactorPair& pair);

/// Pure slicing of an aligned pair at row r.
BlockSplit split(const FactorPair& aligned, std::size_t r);

/// sigma: the r x r diagonal Sigma.
SymmetrizedState symmetrize(const BlockSplit& blocks, const DenseMatrix& sigma);

/// One gradient step expressed on the blocks:
///   U+ = U + eta Sigma V - eta U (V^T V + K^T K)
///   V+ = V + eta Sigma U - eta V (U^T U + J^T J)
///   J+ = J + eta SigmaTilde K - eta J (V^T V + K^T K)
///   K+ = K + eta SigmaTilde^T J - eta K (U^T U + J^T J)
BlockSplit predicted_block_step(const BlockSplit& blocks, const DenseMatrix& sigma,
                                const DenseMatrix& sigma_tilde, double eta);

/// Closed-form one-step update of (A, B, P); Q+ is recomputed from A+, B+.
///   A+ = A + eta P A + eta C,  B+ = B - eta P B + eta D
///   C = -AB^T B + BA^T B - A(K^TK + J^TJ)/2 - B(K^TK - J^TJ)/2
///   D =  AB^T A - BA^T A - A(K^TK - J^TJ)/2 - B(K^TK + J^TJ)/2
///   P+ = P - eta P(Sigma-P) - eta (Sigma-P)P + eta^2 (PPP - P Sigma P)
///        - 2 eta BB^T P - 2 eta P BB^T
///        - eta (A + eta PA) C^T - eta C (A + eta PA)^T - eta^2 CC^T
///        + eta (B - eta PB) D^T + eta D (B - eta PB)^T + eta^2 DD^T
SymmetrizedState predicted_symmetrized_step(const SymmetrizedState& state, const BlockSplit& blocks,
                                            const DenseMatrix& sigma, double eta);

/// min{sigma_r(U_X^T F), sigma_r(V_X^T G)} / max{||(I - U_X U_X^T) F||, ||(I - V_X V_X^T) G||}
/// with U_X, V_X the leading r singular vectors of the frame.
SignalRatio signal_ratio(const DenseMatrix& f, const DenseMatrix& g, const SpectralFrame& frame,
                         std::size_t r);

BlockNorms block_norms(const BlockSplit& blocks, const SymmetrizedState& state, const DenseMatrix& sigma);

/// align + split + symmetrize + block_norms in one call.
BlockNorms trajectory_block_norms(const SpectralFrame& frame, const FactorPair& pair, std::size_t r);

}  // namespace gdfactor
