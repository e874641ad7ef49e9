#include "gdfactor/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gdfactor/error.hpp"

namespace gdfactor {

namespace {

constexpr double kLn10 = std::numbers::ln10;

double to_log10(double ln_value) { return ln_value / kLn10; }

std::int64_t floor_count(double q, const char* what) {
  if (!std::isfinite(q) || std::abs(q) > 9.0e18) {
    throw NumericalFailure(std::string("iteration count ") + what + " is not representable");
  }
  return static_cast<std::int64_t>(std::floor(q));
}

void check_spectrum(std::span<const double> s) {
  if (s.empty()) throw InvalidArgument("singular values: empty list");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || s[i] < 0.0) throw InvalidArgument("singular values must be finite and nonnegative");
    if (i > 0 && s[i] > s[i - 1]) throw InvalidArgument("singular values must be nonincreasing");
  }
}

}  // namespace

double ScheduleInput::sigma_next() const {
  if (r >= std::min(m, n) || r >= singular_values.size()) return 0.0;
  return singular_values[r];
}

void ScheduleInput::validate() const {
  check_spectrum(singular_values);
  if (m < 1 || n < 1) throw InvalidArgument("ScheduleInput: m and n must be positive");
  if (r < 1 || r > std::min(m, n) || r > singular_values.size()) {
    throw InvalidArgument("ScheduleInput: r=" + std::to_string(r) + " out of range");
  }
  if (r > k) throw InvalidArgument("ScheduleInput: r must not exceed k");
  if (!(c_rho > 0.0 && c_rho < 1.0)) throw InvalidArgument("ScheduleInput: c_rho must lie in (0, 1)");
  if (!(delta_cap > 0.0 && delta_cap <= 1.0)) throw InvalidArgument("ScheduleInput: delta_cap must lie in (0, 1]");
  relative_gap(*this);
}

double relative_gap(std::span<const double> s, std::size_t r, double delta_cap) {
  check_spectrum(s);
  if (r < 1 || r > s.size()) throw InvalidArgument("relative_gap: r out of range");
  const double sr = s[r - 1];
  if (!(sr > 0.0)) throw InvalidArgument("relative_gap: sigma_r must be positive");
  const double next = r < s.size() ? s[r] : 0.0;
  if (sr == next) {
    throw GapAbsent("relative_gap: sigma_r == sigma_{r+1}, so the best rank-r approximation is not unique");
  }
  return std::min(delta_cap, (sr - next) / sr);
}

double relative_gap(const ScheduleInput& in) {
  const std::size_t len = std::min(in.singular_values.size(), std::min(in.m, in.n));
  return relative_gap(std::span<const double>(in.singular_values).first(len), in.r, in.delta_cap);
}

double stepsize_cap(const ScheduleInput& in) {
  in.validate();
  const double gamma = 1.0 - relative_gap(in);
  const double s1 = in.sigma1();
  const double sr = in.sigma_r();
  return std::min(gamma * sr * sr / (600.0 * s1 * s1 * s1), (1.0 - gamma) * sr / (20.0 * s1 * s1));
}

RhoCap rho_cap(const ScheduleInput& in) {
  in.validate();
  const double gamma = 1.0 - relative_gap(in);
  const double s1 = in.sigma1();
  const double sr = in.sigma_r();
  const double big_n = static_cast<double>(in.total_dim());
  const double r = static_cast<double>(in.r);
  const double e = (1.0 + gamma) / (1.0 - gamma);
  const double ln_q = std::log((1.0 - gamma) / 24.0);

  std::array<double, 4> ln_terms{};
  ln_terms[0] = 6.0 * e * std::log(1.0 / 3.0) + 36.0 * e * ln_q +
                (12.0 * gamma / (1.0 - gamma)) *
                    (std::log(in.c_rho) + 0.5 * std::log(s1) - std::log(12.0 * big_n) - 0.5 * ln_q - 0.5 * std::log(sr));
  ln_terms[1] = 2.0 * e * (std::log1p(-gamma) + std::log(in.c_rho * sr) - std::log(1200.0 * big_n * r * s1));
  ln_terms[2] = e * (std::log(gamma) + 2.0 * std::log(sr) - std::log(1600.0 * r) - 2.0 * std::log(s1));
  ln_terms[3] = std::log(gamma) + std::log(sr) + 0.5 * std::log(2.0 * r) - std::log(16.0 * s1) - 0.5 * std::log(big_n);

  RhoCap out;
  double ln_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    out.terms_log10[i] = to_log10(ln_terms[i]);
    ln_min = std::min(ln_min, ln_terms[i]);
  }
  out.log10_value = to_log10(ln_min);
  out.value = std::exp(ln_min);
  return out;
}

GdSchedule iteration_counts_log10(const ScheduleInput& in, double eta, double log10_rho) {
  in.validate();
  const double delta = relative_gap(in);
  const double gamma = 1.0 - delta;
  if (!(gamma > 0.0)) throw InvalidArgument("iteration_counts: delta must be below 1 (T is unbounded)");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("iteration_counts: eta must be positive");
  if (!(log10_rho < 0.0) || !std::isfinite(log10_rho)) {
    throw InvalidArgument("iteration_counts: rho must lie in (0, 1)");
  }
  const double s1 = in.sigma1();
  const double sr = in.sigma_r();
  const double es = eta * sr;
  if (!(1.5 * es < 1.0)) throw InvalidArgument("iteration_counts: need 1.5 * eta * sigma_r < 1");

  const double big_n = static_cast<double>(in.total_dim());
  const double ln_rho = log10_rho * kLn10;
  const double a = (1.0 - gamma) / (2.0 * (1.0 + gamma));
  const double ln_q = std::log((1.0 - gamma) / 24.0);

  GdSchedule s;
  s.delta = delta;
  s.gamma = gamma;
  s.kappa_r = s1 / sr;
  s.eta_max = stepsize_cap(in);
  const RhoCap cap = rho_cap(in);
  s.log10_rho_max = cap.log10_value;
  s.rho_max = cap.value;
  s.eta = eta;
  s.log10_rho = log10_rho;

  const double ln_t1_num =
      std::log(12.0 * big_n) + 0.5 * ln_q + 0.5 * std::log(sr) - std::log(in.c_rho) - 0.5 * std::log(s1) - ln_rho;
  s.q1 = ln_t1_num / std::log1p(0.5 * (1.0 + gamma) * es);
  s.q2 = 0.5 * std::log(24.0 / (1.0 - gamma)) / std::log1p(0.1 * es);
  s.q3 = (a * ln_rho - std::log(3.0)) / std::log1p(-1.5 * es);
  s.qT = (a - 1.0) * ln_rho / std::log1p(gamma * es);

  s.T1 = floor_count(s.q1, "T1") + 1;
  s.T2 = floor_count(s.q2, "T2") + 1;
  s.T3 = floor_count(s.q3, "T3") + 1;
  s.T = floor_count(s.qT, "T");
  s.T0 = s.T1 + s.T2 + s.T3;

  const double ln_bound = std::log((8.0 + 4.0 * std::sqrt(2.0 * static_cast<double>(in.r))) * s1) + a * ln_rho;
  s.log10_error_bound = to_log10(ln_bound);
  s.error_bound = std::exp(ln_bound);
  return s;
}

GdSchedule iteration_counts(const ScheduleInput& in, double eta, double rho) {
  if (!(rho > 0.0) || !(rho < 1.0)) throw InvalidArgument("iteration_counts: rho must lie in (0, 1)");
  return iteration_counts_log10(in, eta, std::log10(rho));
}

double window_rho_bound_log10(const ScheduleInput& in) {
  in.validate();
  const double delta = relative_gap(in);
  const double ln_c3 = 10.0 * std::log(1.0 / 3.0) + 60.0 * std::log(1.0 / 48.0);
  const double ln_inner = std::log(in.c_rho) - std::log(static_cast<double>(in.total_dim())) - 0.5 * std::log(delta);
  return to_log10(ln_c3 + ln_inner / 3.0);
}

std::vector<ScheduleInput> gap_family(const ScheduleInput& base, std::span<const double> fractions) {
  std::vector<ScheduleInput> out;
  out.reserve(fractions.size());
  for (double f : fractions) {
    ScheduleInput in = base;
    in.delta_cap = 1.0;
    if (in.singular_values.size() <= in.r) in.singular_values.resize(in.r + 1, 0.0);
    in.singular_values[in.r] = f * in.sigma_r();
    for (std::size_t i = in.r + 1; i < in.singular_values.size(); ++i) {
      in.singular_values[i] = std::min(in.singular_values[i], in.singular_values[in.r]);
    }
    out.push_back(std::move(in));
  }
  return out;
}

WindowTrend window_trend(std::span<const ScheduleInput> family, std::optional<double> eta,
                         std::optional<double> log10_rho) {
  if (family.size() < 3) throw InvalidArgument("window_trend: family needs at least 3 inputs");
  for (std::size_t i = 0; i < family.size(); ++i) {
    family[i].validate();
    if (i > 0 && !(family[i].sigma_next() < family[i - 1].sigma_next())) {
      throw InvalidArgument("window_trend: sigma_{r+1} must strictly decrease along the family");
    }
  }

  WindowTrend out;
  if (eta) {
    out.eta = *eta;
  } else {
    out.eta = std::numeric_limits<double>::infinity();
    for (const auto& in : family) out.eta = std::min(out.eta, stepsize_cap(in));
  }
  if (log10_rho) {
    out.log10_rho = *log10_rho;
  } else {
    out.log10_rho = std::numeric_limits<double>::infinity();
    for (const auto& in : family) {
      out.log10_rho = std::min({out.log10_rho, rho_cap(in).log10_value, window_rho_bound_log10(in)});
    }
  }

  for (const auto& in : family) {
    const GdSchedule s = iteration_counts_log10(in, out.eta, out.log10_rho);
    out.gamma.push_back(s.gamma);
    out.T.push_back(s.T);
    out.T0.push_back(s.T0);
    out.ratio.push_back(static_cast<double>(s.T0) / static_cast<double>(s.T));
  }
  out.t_increasing = true;
  out.ratio_decreasing = true;
  out.ratio_within_bound = true;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!(out.ratio[i] <= 73.0 * out.gamma[i])) out.ratio_within_bound = false;
    if (i == 0) continue;
    if (!(out.T[i] > out.T[i - 1])) out.t_increasing = false;
    if (!(out.ratio[i] < out.ratio[i - 1])) out.ratio_decreasing = false;
  }
  return out;
}

std::int64_t psd_toy_stopping_time(double lambda1, double lambdar, double rho, double eta) {
  if (!(lambdar > 0.0) || !(lambda1 >= lambdar) || !std::isfinite(lambda1)) {
    throw InvalidArgument("psd_toy_stopping_time: need lambda_1 >= lambda_r > 0");
  }
  if (!(rho > 0.0) || !(rho < std::sqrt(lambdar) / 2.0)) {
    throw InvalidArgument("psd_toy_stopping_time: need 0 < rho < sqrt(lambda_r)/2");
  }
  const double h = 0.5 * eta * lambdar;
  if (!(h > 0.0) || !(h < 1.0)) throw InvalidArgument("psd_toy_stopping_time: need 0 < eta lambda_r / 2 < 1");
  const double first = std::log(std::sqrt(lambdar) / (rho * std::sqrt(2.0 * lambda1))) / std::log1p(h);
  const double second = std::log(std::sqrt(rho)) / std::log1p(-h);
  return floor_count(first, "T (growth)") + floor_count(second, "T (contraction)") + 2;
}

}  // namespace gdfactor
