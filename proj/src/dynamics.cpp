#include "gdfactor/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdfactor/error.hpp"

namespace gdfactor {

namespace {

constexpr double kMinRho = 1e-250;

void check_shapes(const FactorPair& pair, const DenseMatrix& x) {
  pair.validate();
  if (x.rows() != pair.F.rows() || x.cols() != pair.G.rows()) {
    throw InvalidArgument("gd_step: X is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          " but F, G have " + std::to_string(pair.F.rows()) + " and " +
                          std::to_string(pair.G.rows()) + " rows");
  }
}

// residual = X - F G^T
DenseMatrix residual_of(const FactorPair& pair, const DenseMatrix& x) {
  DenseMatrix res = x;
  res -= pair.product();
  return res;
}

FactorPair step_from_residual(const FactorPair& pair, const DenseMatrix& residual, double eta,
                              std::size_t iteration) {
  FactorPair next = pair;
  next.F.add_scaled(eta, matmul(residual, pair.G));
  next.G.add_scaled(eta, matmul_tn(residual, pair.F));
  if (!next.F.all_finite() || !next.G.all_finite()) {
    throw NumericalOverflow("gradient step produced a non-finite iterate at iteration " +
                                std::to_string(iteration) + " (stepsize too large?)",
                            iteration);
  }
  return next;
}

std::vector<double> leading(std::vector<double> values, std::size_t count) {
  values.resize(count, 0.0);
  return values;
}

}  // namespace

void GdConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("GdConfig: eta must be positive and finite");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("GdConfig: rho must be positive and finite");
  if (k < 1) throw InvalidArgument("GdConfig: k must be at least 1");
  if (record_every < 1) throw InvalidArgument("GdConfig: record_every must be at least 1");
}

std::size_t default_record_every(std::size_t m, std::size_t n) noexcept { return m + n <= 200 ? 1 : 10; }

FactorPair init_factors(std::size_t m, std::size_t n, const GdConfig& cfg, double sigma1) {
  cfg.validate();
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) throw InvalidArgument("init_factors: sigma1 must be positive");
  if (cfg.rho < kMinRho) throw InvalidArgument("init_factors: rho below 1e-250 is not representable");
  if (cfg.symmetric_init && m != n) throw InvalidArgument("init_factors: symmetric init needs m == n");

  const RngStream base(cfg.seed);
  RngStream f_stream = base.split(0);
  DenseMatrix f = gaussian_matrix(m, cfg.k, sigma1, f_stream);
  DenseMatrix g;
  if (cfg.symmetric_init) {
    g = f;
  } else {
    RngStream g_stream = base.split(1);
    g = gaussian_matrix(n, cfg.k, sigma1, g_stream);
  }
  const double scale = cfg.rho / (3.0 * std::sqrt(static_cast<double>(m + n + cfg.k)));
  f *= scale;
  g *= scale;
  return {std::move(f), std::move(g)};
}

FactorPair gd_step(const FactorPair& pair, const DenseMatrix& x, double eta) {
  check_shapes(pair, x);
  return step_from_residual(pair, residual_of(pair, x), eta, 0);
}

LowRankReference truncated_reference(const SpectralFrame& frame, std::size_t r) {
  if (r < 1 || r > frame.singular_values.size()) throw InvalidArgument("truncated_reference: r out of range");
  LowRankReference ref{frame.left.left_cols(r), frame.right.left_cols(r)};
  for (std::size_t i = 0; i < ref.left.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) ref.left(i, j) *= frame.singular_values[j];
  }
  return ref;
}

TrajectoryRecord run(const DenseMatrix& x, const SpectralFrame& frame, std::size_t r, const GdConfig& cfg,
                     const RunOptions& options) {
  cfg.validate();
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (frame.m() != m || frame.n() != n) throw InvalidArgument("run: frame does not match X");
  if (r < 1 || r > std::min(m, n)) throw InvalidArgument("run: r out of range");

  FactorPair pair;
  if (options.initial) {
    pair = *options.initial;
    check_shapes(pair, x);
  } else {
    const double sigma1 = options.sigma1.value_or(frame.singular_values.empty() ? 0.0 : frame.singular_values[0]);
    pair = init_factors(m, n, cfg, sigma1);
  }

  const LowRankReference ref = options.reference ? *options.reference : truncated_reference(frame, r);
  if (ref.left.rows() != m || ref.right.rows() != n || ref.left.cols() != ref.right.cols()) {
    throw InvalidArgument("run: reference factors do not match X");
  }
  // X - X_ref, so that F G^T - X_ref = (F G^T - X) + (X - X_ref).
  DenseMatrix ref_gap = x;
  ref_gap -= matmul_nt(ref.left, ref.right);
  const DenseMatrix neg_ref_left = -ref.left;

  TrajectoryRecord rec;
  auto record = [&](std::size_t t, const DenseMatrix& residual) {
    rec.iterations.push_back(t);
    rec.train_error_fro.push_back(frobenius_norm(residual));
    DenseMatrix test = ref_gap;
    test -= residual;
    rec.test_error_fro.push_back(frobenius_norm(test));
    if (options.spectral_metrics) {
      rec.test_error_op.push_back(
          product_operator_norm(hstack(pair.F, neg_ref_left), hstack(pair.G, ref.right)));
      rec.leading_singulars.push_back(leading(product_singular_values(pair.F, pair.G), r + 2));
    }
    if (options.block_diagnostics) rec.block_norms.push_back(trajectory_block_norms(frame, pair, r));
  };

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const DenseMatrix residual = residual_of(pair, x);
    if (t % cfg.record_every == 0) record(t, residual);
    pair = step_from_residual(pair, residual, cfg.eta, t + 1);
  }
  if (rec.iterations.empty() || rec.iterations.back() != cfg.max_iters) {
    record(cfg.max_iters, residual_of(pair, x));
  }
  rec.final_pair = std::move(pair);
  return rec;
}

TrajectoryRecord run(const DenseMatrix& x, const SpectralFrame& frame, std::size_t r, const GdConfig& cfg,
                     bool with_block_diagnostics) {
  RunOptions options;
  options.block_diagnostics = with_block_diagnostics;
  return run(x, frame, r, cfg, options);
}

EarlyStop select_early_stop(const TrajectoryRecord& record, ErrorKind kind) {
  if (record.empty()) throw InvalidArgument("select_early_stop: empty record");
  const auto& errors = kind == ErrorKind::kOperator ? record.test_error_op : record.test_error_fro;
  if (errors.size() != record.size()) throw InvalidArgument("select_early_stop: error series not recorded");
  EarlyStop best{record.iterations[0], errors[0], 0};
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] < best.error) best = {record.iterations[i], errors[i], i};
  }
  return best;
}

}  // namespace gdfactor
