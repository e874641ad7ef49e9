#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gdfactor {

struct ScheduleInput {
  std::vector<double> singular_values;  // nonincreasing, nonnegative
  std::size_t r = 1;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t k = 1;
  double c_rho = 0.5;
  double delta_cap = 0.9;

  /// Throws InvalidArgument (GapAbsent when sigma_r == sigma_{r+1}).
  void validate() const;
  double sigma1() const { return singular_values.at(0); }
  double sigma_r() const { return singular_values.at(r - 1); }
  /// sigma_{r+1}, or 0 when r == min(m, n) or the list is shorter.
  double sigma_next() const;
  std::size_t total_dim() const noexcept { return m + n + k; }
};

/// min(delta_cap, (sigma_r - sigma_{r+1}) / sigma_r).
double relative_gap(std::span<const double> singular_values, std::size_t r, double delta_cap = 1.0);
double relative_gap(const ScheduleInput& in);

/// min(gamma sigma_r^2 / (600 sigma_1^3), (1 - gamma) sigma_r / (20 sigma_1^2)), gamma = 1 - delta.
double stepsize_cap(const ScheduleInput& in);

struct RhoCap {
  double log10_value = 0.0;
  /// 10^log10_value; underflows to 0 for realistic inputs.
  double value = 0.0;
  /// log10 of each of the four competing bounds.
  std::array<double, 4> terms_log10{};
};

/// Minimum of the four initialization-size bounds, evaluated in log space.
RhoCap rho_cap(const ScheduleInput& in);

struct GdSchedule {
  double delta = 0.0;
  double gamma = 0.0;
  double kappa_r = 0.0;
  double eta_max = 0.0;
  double log10_rho_max = 0.0;
  double rho_max = 0.0;

  double eta = 0.0;
  double log10_rho = 0.0;

  std::int64_t T1 = 0;
  std::int64_t T2 = 0;
  std::int64_t T3 = 0;
  std::int64_t T0 = 0;  // T1 + T2 + T3
  std::int64_t T = 0;
  /// Unfloored quotients behind T1, T2, T3, T.
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double qT = 0.0;

  /// (8 + 4 sqrt(2r)) sigma_1 rho^((1-gamma)/(2(1+gamma)))
  double error_bound = 0.0;
  double log10_error_bound = 0.0;
};

/// Iteration counts and final error bound for a given (eta, rho). Does not
/// enforce the caps (compare against eta_max / log10_rho_max); requires
/// 0 < eta, 1.5 eta sigma_r < 1, and 0 < rho < 1.
GdSchedule iteration_counts(const ScheduleInput& in, double eta, double rho);
GdSchedule iteration_counts_log10(const ScheduleInput& in, double eta, double log10_rho);

/// log10 of c3 (c_rho / ((m+n+k) sqrt(delta)))^(1/3), c3 = (1/3)^10 (1/48)^60.
double window_rho_bound_log10(const ScheduleInput& in);

struct WindowTrend {
  double eta = 0.0;
  double log10_rho = 0.0;
  std::vector<double> gamma;
  std::vector<std::int64_t> T;
  std::vector<std::int64_t> T0;
  std::vector<double> ratio;  // T0 / T
  bool t_increasing = false;
  bool ratio_decreasing = false;
  bool ratio_within_bound = false;  // T0 / T <= 73 gamma at every point

  bool holds() const noexcept { return t_increasing && ratio_decreasing && ratio_within_bound; }
};

/// Evaluates schedules along a family whose sigma_{r+1} strictly decreases.
/// Without explicit (eta, rho) it uses the smallest stepsize cap over the
/// family and the smallest of rho_cap and the window bound.
WindowTrend window_trend(std::span<const ScheduleInput> family, std::optional<double> eta = std::nullopt,
                         std::optional<double> log10_rho = std::nullopt);

/// The family sigma_{r+1} = f * sigma_r for f in `fractions`, delta_cap = 1.
std::vector<ScheduleInput> gap_family(const ScheduleInput& base, std::span<const double> fractions);

/// floor(log(sqrt(l_r) / (rho sqrt(2 l_1))) / log(1 + eta l_r / 2))
///   + floor(log(sqrt(rho)) / log(1 - eta l_r / 2)) + 2
std::int64_t psd_toy_stopping_time(double lambda1, double lambdar, double rho, double eta);

}  // namespace gdfactor
