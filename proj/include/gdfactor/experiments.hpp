#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gdfactor/config.hpp"
#include "gdfactor/dynamics.hpp"
#include "gdfactor/linalg.hpp"

namespace gdfactor {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kIo = 1;
inline constexpr int kConfig = 2;
inline constexpr int kNumerical = 3;
inline constexpr int kAssertion = 4;
}  // namespace exit_code

/// Runs job(i) for i in [0, jobs) on up to `parallel` threads. Results must
/// be written to per-index slots; the first exception (by index) is rethrown.
void parallel_for(std::size_t jobs, unsigned parallel, const std::function<void(std::size_t)>& job);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
/// Ordinary least squares y ~ a x + b.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---- synthetic targets -------------------------------------------------

struct Target {
  DenseMatrix x;
  SpectralFrame frame;
};

/// Rank-3, sigma proportional to (1, 1, 1 - delta), unit Frobenius norm.
Target overfit_target(std::size_t m, std::size_t n, double delta, std::uint64_t seed);
/// Spectrum (kappa, sqrt(kappa), 1, 1 - delta): rank 4 with sigma_3 = 1.
std::vector<double> sweep_spectrum(double kappa, double delta);

// ---- parameter sweeps --------------------------------------------------

struct SweepPoint {
  std::size_t dim = 100;  // m = n
  double rho = 1e-8;
  double delta = 0.5;
  double kappa = 1.0;
  double eta = 0.25;

  friend auto operator<=>(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepSettings {
  std::size_t k = 10;
  std::size_t iters = 500;
  std::size_t trials = 10;
  std::uint64_t master_seed = 1;
  unsigned parallel = 1;
};

struct SweepRow {
  SweepPoint point;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t t0 = 0;            // argmin iteration of the Frobenius test error
  double eps = 0.0;              // min ||FG^T - X_3||_F / ||X_3||_F
  double final_train = 0.0;      // ||FG^T - X||_F at the last iteration
  double final_test = 0.0;       // ||FG^T - X_3||_F at the last iteration
};

struct SweepSummary {
  SweepPoint point;
  std::size_t trials = 0;
  double mean_eps = 0.0;
  double mean_t0 = 0.0;
};

/// Cross product of the axes, in lexicographic (dim, rho, delta, kappa, eta) order.
std::vector<SweepPoint> sweep_grid(const std::vector<std::size_t>& dims, const std::vector<double>& rhos,
                                   const std::vector<double>& deltas, const std::vector<double>& kappas,
                                   const std::vector<double>& etas);
/// Seed of one (point, trial) job.
std::uint64_t sweep_seed(std::uint64_t master, const SweepPoint& p, std::size_t trial);
/// One job: build X from sweep_spectrum, run GD for settings.iters steps.
SweepRow run_sweep_job(const SweepPoint& p, std::size_t trial, const SweepSettings& settings);
/// All jobs; rows sorted by (point, seed) regardless of parallelism.
std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& points, const SweepSettings& settings);
/// Trial averages per point, in point order.
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

// ---- demos -------------------------------------------------------------

struct OverfitSettings {
  std::size_t m = 250;
  std::size_t n = 200;
  std::size_t k = 50;
  std::size_t r = 2;
  double delta = 0.5;
  double rho = 1e-6;
  double eta = 0.05;
  std::size_t iters = 2000;
  std::size_t record_every = 10;
  std::uint64_t seed = 1;
};

struct OverfitResult {
  TrajectoryRecord record;
  double sigma3 = 0.0;
  double x_fro = 0.0;
  bool interior_minimum = false;  // min test error below both the first and last record
};
OverfitResult run_overfit(const OverfitSettings& s);

struct InitCompareResult {
  TrajectoryRecord small;
  TrajectoryRecord moderate;
  /// First recorded iteration with train error below the threshold (npos if never).
  std::size_t small_hit = 0;
  std::size_t moderate_hit = 0;
  bool small_faster = false;
};
/// Exactly rank-2 target sigma = (1, 1)/sqrt(2); same seeds for both runs.
InitCompareResult run_init_compare(const OverfitSettings& s, double rho_moderate, double threshold);

// ---- command dispatch --------------------------------------------------

struct CommandContext {
  std::string command;
  Config config;  // file values with flag overrides applied
  std::filesystem::path out_dir = ".";
  unsigned parallel = 1;
};

struct CommandOutcome {
  int exit_code = exit_code::kOk;
  std::vector<std::string> summary;
  std::vector<std::filesystem::path> files;
};

const std::vector<std::string>& command_names();
/// Throws ConfigError, InvalidArgument, NumericalFailure or IoError.
CommandOutcome run_command(const CommandContext& ctx);

}  // namespace gdfactor
