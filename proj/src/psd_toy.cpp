#include "gdfactor/psd_toy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdfactor/error.hpp"
#include "gdfactor/rng.hpp"
#include "gdfactor/schedule.hpp"

namespace gdfactor {

namespace {

double step_value(double f, double lambda, double eta) { return f * (1.0 + eta * lambda - eta * f * f); }

void check_rank(const std::vector<double>& lambdas, std::size_t r, double gap_ratio) {
  if (r < 1 || r > lambdas.size()) throw InvalidArgument("psd toy: r out of range");
  if (!(lambdas[r - 1] > 0.0)) throw InvalidArgument("psd toy: lambda_r must be positive");
  if (!(gap_ratio > 0.0 && gap_ratio < 1.0)) throw InvalidArgument("psd toy: gap_ratio must lie in (0, 1)");
  if (r < lambdas.size() && lambdas[r] > gap_ratio * lambdas[r - 1]) {
    throw InvalidArgument("psd toy: need lambda_{r+1} <= " + std::to_string(gap_ratio) + " * lambda_r");
  }
}

}  // namespace

void ScalarDynamicsState::validate() const {
  if (lambdas.empty()) throw InvalidArgument("psd toy: empty spectrum");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i]) || lambdas[i] < 0.0) throw InvalidArgument("psd toy: lambdas must be nonnegative");
    if (i > 0 && lambdas[i] > lambdas[i - 1]) throw InvalidArgument("psd toy: lambdas must be nonincreasing");
  }
  if (f.size() != lambdas.size()) throw InvalidArgument("psd toy: f and lambdas differ in length");
  for (double v : f) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("psd toy: f must be finite and nonnegative");
  }
  if (!(eta > 0.0)) throw InvalidArgument("psd toy: eta must be positive");
  if (eta * 3.0 * lambdas[0] > 1.0) throw InvalidArgument("psd toy: eta exceeds 1/(3 lambda_1)");
}

ScalarDynamicsState make_scalar_state(std::vector<double> lambdas, std::vector<double> f, double eta) {
  ScalarDynamicsState s{std::move(lambdas), std::move(f), eta, 0};
  s.validate();
  return s;
}

ScalarDynamicsState scalar_step(const ScalarDynamicsState& state) {
  ScalarDynamicsState next = state;
  for (std::size_t i = 0; i < next.f.size(); ++i) next.f[i] = step_value(state.f[i], state.lambdas[i], state.eta);
  ++next.t;
  return next;
}

PsdToyResult run_to_schedule(const std::vector<double>& lambdas, std::size_t r, double rho, double eta,
                             double gap_ratio, bool keep_trajectory) {
  check_rank(lambdas, r, gap_ratio);
  const double lambda1 = lambdas.front();
  PsdToyResult out;
  out.T = psd_toy_stopping_time(lambda1, lambdas[r - 1], rho, eta);
  if (out.T < 0) throw InvalidArgument("psd toy: scheduled T is negative");

  ScalarDynamicsState state =
      make_scalar_state(lambdas, std::vector<double>(lambdas.size(), rho * std::sqrt(lambda1)), eta);
  if (keep_trajectory) out.trajectory.push_back(state.f);
  for (std::int64_t t = 0; t < out.T; ++t) {
    for (std::size_t i = 0; i < state.f.size(); ++i) state.f[i] = step_value(state.f[i], state.lambdas[i], eta);
    ++state.t;
    if (keep_trajectory) out.trajectory.push_back(state.f);
  }

  out.bound = std::sqrt(rho) * std::sqrt(lambda1);
  for (std::size_t i = 0; i < state.f.size(); ++i) {
    const double fi = state.f[i];
    if (i < r) {
      out.max_signal_error = std::max(out.max_signal_error, std::abs(fi - std::sqrt(lambdas[i])));
      out.diag_op_error = std::max(out.diag_op_error, std::abs(fi * fi - lambdas[i]));
    } else {
      out.max_tail = std::max(out.max_tail, std::abs(fi));
      out.diag_op_error = std::max(out.diag_op_error, fi * fi);
    }
  }
  out.signal_bound_holds = out.max_signal_error <= out.bound;
  out.tail_bound_holds = out.max_tail <= out.bound;
  out.state = std::move(state);
  return out;
}

ContractionReport contraction_check(const std::vector<double>& lambdas, std::size_t r, double eta,
                                    std::size_t trials, std::uint64_t seed, double gap_ratio) {
  check_rank(lambdas, r, gap_ratio);
  make_scalar_state(lambdas, std::vector<double>(lambdas.size(), 0.0), eta);

  const double lambda1 = lambdas.front();
  const double lambdar = lambdas[r - 1];
  const double f_max = std::sqrt(2.0 * lambda1);
  const double contraction = 1.0 - eta * lambdar / 2.0;
  const double signal_growth = 1.0 + eta * lambdar / 2.0;
  const double tail_lambda_max = gap_ratio * lambdar;
  const double tail_growth = 1.0 + eta * tail_lambda_max;

  RngStream rng(seed);
  ContractionReport rep;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < r; ++i) {
      const double li = lambdas[i];
      const double f = f_max * rng.next_uniform();
      const double next = step_value(f, li, eta);
      ++rep.signal_checks;
      if (f >= std::sqrt(li / 2.0)) {
        const double before = std::abs(f - std::sqrt(li));
        const double after = std::abs(next - std::sqrt(li));
        if (after > contraction * before) ++rep.contraction_violations;
        if (before > 0.0) rep.worst_contraction = std::max(rep.worst_contraction, after / before);
      } else if (next < signal_growth * f) {
        ++rep.growth_violations;
      }
    }
    for (std::size_t i = r; i < lambdas.size(); ++i) {
      const double li = tail_lambda_max * rng.next_uniform();
      const double f = f_max * rng.next_uniform();
      const double next = step_value(f, li, eta);
      ++rep.tail_checks;
      if (next > tail_growth * f) ++rep.tail_violations;
      if (f > 0.0) rep.worst_tail_growth = std::max(rep.worst_tail_growth, next / f);
    }
  }
  return rep;
}

}  // namespace gdfactor
