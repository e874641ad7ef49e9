#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gdfactor {

/// Diagonal dynamics f_i <- f_i (1 + eta lambda_i - eta f_i^2) for PSD X.
struct ScalarDynamicsState {
  std::vector<double> lambdas;  // nonincreasing, nonnegative
  std::vector<double> f;
  double eta = 0.0;
  std::size_t t = 0;

  /// Throws InvalidArgument on bad spectrum, negative f, size mismatch, or
  /// eta outside (0, 1/(3 lambda_1)].
  void validate() const;
};

ScalarDynamicsState make_scalar_state(std::vector<double> lambdas, std::vector<double> f, double eta);

ScalarDynamicsState scalar_step(const ScalarDynamicsState& state);

struct PsdToyResult {
  ScalarDynamicsState state;  // at t = T
  std::int64_t T = 0;
  double bound = 0.0;              // sqrt(rho) sqrt(lambda_1)
  double max_signal_error = 0.0;   // max_{i<=r} |f_i - sqrt(lambda_i)|
  double max_tail = 0.0;           // max_{i>r} |f_i|, 0 when r == m
  double diag_op_error = 0.0;      // max_i |f_i^2 - lambda_i [i<=r]|
  bool signal_bound_holds = false;
  bool tail_bound_holds = false;
  /// f values at t = 0..T, filled when requested.
  std::vector<std::vector<double>> trajectory;

  bool holds() const noexcept { return signal_bound_holds && tail_bound_holds; }
};

/// Starts from f_i = rho sqrt(lambda_1) and runs exactly
/// psd_toy_stopping_time(lambda_1, lambda_r, rho, eta) steps. Bound failures
/// are reported in the result, not thrown. Requires lambda_{r+1} <= gap_ratio * lambda_r.
PsdToyResult run_to_schedule(const std::vector<double>& lambdas, std::size_t r, double rho, double eta,
                             double gap_ratio = 0.1, bool keep_trajectory = false);

struct ContractionReport {
  std::size_t signal_checks = 0;
  std::size_t tail_checks = 0;
  std::size_t contraction_violations = 0;  // |f+ - sqrt(l_i)| > (1 - eta l_r/2) |f - sqrt(l_i)|
  std::size_t growth_violations = 0;       // f+ < (1 + eta l_r/2) f while f < sqrt(l_i/2)
  std::size_t tail_violations = 0;         // f+ > (1 + eta gap_ratio l_r) f
  double worst_contraction = 0.0;          // max observed |f+ - sqrt(l_i)| / |f - sqrt(l_i)|
  double worst_tail_growth = 0.0;          // max observed f+ / f

  bool clean() const noexcept { return contraction_violations == 0 && growth_violations == 0 && tail_violations == 0; }
};

/// Samples `trials` random admissible states and checks the one-step
/// inequalities coordinatewise with zero tolerance: for i <= r, f drawn in
/// [0, sqrt(2 lambda_1)] (contraction when f >= sqrt(lambda_i/2), growth
/// below); for i > r, lambda drawn in [0, gap_ratio lambda_r] and f in
/// [0, sqrt(2 lambda_1)].
ContractionReport contraction_check(const std::vector<double>& lambdas, std::size_t r, double eta,
                                    std::size_t trials, std::uint64_t seed = 1, double gap_ratio = 0.1);

}  // namespace gdfactor
