#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gdfactor/diagnostics.hpp"
#include "gdfactor/factor_pair.hpp"
#include "gdfactor/linalg.hpp"
#include "gdfactor/matrix.hpp"

namespace gdfactor {

struct GdConfig {
  double eta = 0.05;
  double rho = 1e-6;
  std::size_t k = 10;
  std::size_t max_iters = 1000;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  /// Draw one Gaussian matrix and use it for both factors (requires m == n).
  bool symmetric_init = false;

  /// Throws InvalidArgument unless eta > 0, rho > 0, k >= 1, record_every >= 1.
  void validate() const;
};

/// 1 when m + n <= 200, else 10.
std::size_t default_record_every(std::size_t m, std::size_t n) noexcept;

/// F0 = rho / (3 sqrt(m+n+k)) * Ftilde, Ftilde entries N(0, sigma1) (variance),
/// drawn from split(0) of the config seed; G uses split(1).
FactorPair init_factors(std::size_t m, std::size_t n, const GdConfig& cfg, double sigma1);

/// (F + eta (X - FG^T) G, G + eta (X - FG^T)^T F).
/// Throws InvalidArgument on shape mismatch and NumericalOverflow (iteration 0)
/// when the result is not finite.
FactorPair gd_step(const FactorPair& pair, const DenseMatrix& x, double eta);

/// Low-rank reference X_ref = left * right^T that test errors are measured against.
struct LowRankReference {
  DenseMatrix left;   // m x s
  DenseMatrix right;  // n x s
};

/// Phi_r Sigma_r and Psi_r, i.e. the truncated SVD X_r in factored form.
LowRankReference truncated_reference(const SpectralFrame& frame, std::size_t r);

struct RunOptions {
  bool block_diagnostics = false;
  /// Record test_error_op and leading_singulars (QR + small SVD per record).
  bool spectral_metrics = true;
  /// Initialization variance; defaults to the frame's sigma_1.
  std::optional<double> sigma1;
  /// Start from this pair instead of init_factors.
  std::optional<FactorPair> initial;
  /// Measure test errors against this instead of truncate_rank(frame, r).
  std::optional<LowRankReference> reference;
};

struct TrajectoryRecord {
  std::vector<std::size_t> iterations;
  std::vector<double> train_error_fro;  // ||F G^T - X||_F
  std::vector<double> test_error_fro;   // ||F G^T - X_r||_F
  std::vector<double> test_error_op;    // ||F G^T - X_r||, empty without spectral metrics
  /// First r + 2 singular values of F G^T (zero-padded).
  std::vector<std::vector<double>> leading_singulars;
  std::vector<BlockNorms> block_norms;  // empty unless requested
  FactorPair final_pair;

  std::size_t size() const noexcept { return iterations.size(); }
  bool empty() const noexcept { return iterations.empty(); }
};

/// Runs cfg.max_iters steps, recording at t = 0, every cfg.record_every
/// steps, and at the last step. NumericalOverflow carries the index of the
/// step that produced the non-finite iterate.
TrajectoryRecord run(const DenseMatrix& x, const SpectralFrame& frame, std::size_t r, const GdConfig& cfg,
                     const RunOptions& options);
TrajectoryRecord run(const DenseMatrix& x, const SpectralFrame& frame, std::size_t r, const GdConfig& cfg,
                     bool with_block_diagnostics = false);

enum class ErrorKind { kOperator, kFrobenius };

struct EarlyStop {
  std::size_t iteration = 0;
  double error = 0.0;
  std::size_t index = 0;  // position in the record
};

/// Recorded iterate with the smallest test error; ties go to the earliest.
/// Throws InvalidArgument when the record (or the requested error series) is empty.
EarlyStop select_early_stop(const TrajectoryRecord& record, ErrorKind kind = ErrorKind::kOperator);

}  // namespace gdfactor
