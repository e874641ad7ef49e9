#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gdfactor/diagnostics.hpp"
#include "gdfactor/dynamics.hpp"
#include "gdfactor/error.hpp"
#include "gdfactor/experiments.hpp"
#include "oracles.hpp"

using namespace gdfactor;

namespace {

struct Instance {
  SpectralFrame frame;  // diagonal frame of Sigma_X
  DenseMatrix sigma_x;
  FactorPair pair;
  std::size_t r;
};

// Diagonal target with a random spectrum and a random pair of moderate size.
Instance random_instance(RngStream& rng, std::size_t m, std::size_t n, std::size_t r, std::size_t k) {
  std::vector<double> sv(std::min(m, n));
  for (double& s : sv) s = 2.0 * rng.next_uniform();
  std::sort(sv.rbegin(), sv.rend());
  SpectralFrame frame{DenseMatrix::identity(m), sv, DenseMatrix::identity(n)};
  DenseMatrix sigma_x = frame.sigma_matrix();
  FactorPair pair{gaussian_matrix(m, k, 0.3, rng), gaussian_matrix(n, k, 0.3, rng)};
  return {std::move(frame), std::move(sigma_x), std::move(pair), r};
}

double rel_fro(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = std::max(frobenius_norm(a), frobenius_norm(b));
  return scale == 0.0 ? 0.0 : frobenius_norm(a - b) / scale;
}

}  // namespace

TEST_CASE("align") {
  RngStream rng(1);
  const FactorPair p{gaussian_matrix(4, 2, 1.0, rng), gaussian_matrix(3, 2, 1.0, rng)};
  const SpectralFrame id{DenseMatrix::identity(4), {1, 1, 1}, DenseMatrix::identity(3)};
  CHECK(align(id, p) == p);

  const std::vector<double> sv = {1.0, 0.5, 0.25};
  auto [x, frame] = synth_matrix(4, 3, sv, rng);
  const FactorPair a = align(frame, p);
  CHECK(frobenius_norm(a.F) == doctest::Approx(frobenius_norm(p.F)).epsilon(1e-12));
  CHECK(frobenius_norm(a.G) == doctest::Approx(frobenius_norm(p.G)).epsilon(1e-12));
  CHECK(objective(a, frame.sigma_matrix()) == doctest::Approx(objective(p, x)).epsilon(1e-10));

  const FactorPair wrong{gaussian_matrix(5, 2, 1.0, rng), p.G};
  CHECK_THROWS_AS(align(frame, wrong), InvalidArgument);
}

TEST_CASE("split") {
  const FactorPair p{DenseMatrix(2, 2, {1, 2, 3, 4}), DenseMatrix(2, 2, {5, 6, 7, 8})};
  const BlockSplit b = split(p, 1);
  CHECK(b.U == DenseMatrix(1, 2, {1, 2}));
  CHECK(b.J == DenseMatrix(1, 2, {3, 4}));
  CHECK(b.V == DenseMatrix(1, 2, {5, 6}));
  CHECK(b.K == DenseMatrix(1, 2, {7, 8}));

  const BlockSplit full = split(p, 2);
  CHECK(full.J.rows() == 0);
  CHECK(full.K.rows() == 0);
  CHECK(vstack(full.U, full.J) == p.F);

  RngStream rng(4);
  const FactorPair q{gaussian_matrix(5, 3, 1.0, rng), gaussian_matrix(4, 3, 1.0, rng)};
  const BlockSplit s = split(q, 2);
  CHECK(vstack(s.U, s.J) == q.F);
  CHECK(vstack(s.V, s.K) == q.G);
  CHECK_THROWS_AS(split(q, 5), InvalidArgument);
}

TEST_CASE("symmetrize examples and identities") {
  RngStream rng(6);
  const std::vector<double> sd = {2.0, 1.0};
  const DenseMatrix sigma = DenseMatrix::diagonal(sd);
  const DenseMatrix u = gaussian_matrix(2, 3, 1.0, rng);

  const SymmetrizedState bal = symmetrize({u, DenseMatrix(0, 3), u, DenseMatrix(0, 3)}, sigma);
  CHECK(bal.B.max_abs() == 0.0);
  CHECK(bal.Q.max_abs() == 0.0);

  const SymmetrizedState anti = symmetrize({u, DenseMatrix(0, 3), -u, DenseMatrix(0, 3)}, sigma);
  CHECK(anti.A.max_abs() == 0.0);
  // P = Sigma + BB^T, so P - Sigma is PSD
  const auto ev = oracle::symmetric_eigenvalues(anti.P - sigma);
  CHECK(ev.back() >= -1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const BlockSplit b{gaussian_matrix(2, 3, 1.0, rng), gaussian_matrix(3, 3, 1.0, rng), gaussian_matrix(2, 3, 1.0, rng),
                       gaussian_matrix(2, 3, 1.0, rng)};
    const SymmetrizedState s = symmetrize(b, sigma);
    CHECK(s.A == 0.5 * (b.U + b.V));
    CHECK(s.B == 0.5 * (b.U - b.V));
    CHECK(max_abs_diff(s.P, s.P.transpose()) <= 1e-12 * oracle::max_abs(s.P));
    CHECK(max_abs_diff(s.Q, -s.Q.transpose()) <= 1e-12);
    CHECK(rel_fro(sigma - matmul_nt(b.U, b.V), s.P + s.Q) <= 1e-10);
  }
  CHECK_THROWS_AS(symmetrize({u, DenseMatrix(0, 3), u, DenseMatrix(0, 3)}, DenseMatrix::identity(3)),
                  InvalidArgument);
}

TEST_CASE("predicted_block_step examples") {
  const std::vector<double> sd = {2.0, 1.0};
  const DenseMatrix sigma = DenseMatrix::diagonal(sd);
  const DenseMatrix sigma_tilde(3, 2);
  const BlockSplit zero{DenseMatrix(2, 3), DenseMatrix(3, 3), DenseMatrix(2, 3), DenseMatrix(2, 3)};
  const BlockSplit z = predicted_block_step(zero, sigma, sigma_tilde, 0.1);
  CHECK(z.U.max_abs() == 0.0);
  CHECK(z.J.max_abs() == 0.0);
  CHECK(z.V.max_abs() == 0.0);
  CHECK(z.K.max_abs() == 0.0);

  RngStream rng(3);
  const BlockSplit signal_only{gaussian_matrix(2, 3, 1.0, rng), DenseMatrix(3, 3), gaussian_matrix(2, 3, 1.0, rng),
                               DenseMatrix(2, 3)};
  const BlockSplit s = predicted_block_step(signal_only, sigma, sigma_tilde, 0.1);
  CHECK(s.J.max_abs() == 0.0);
  CHECK(s.K.max_abs() == 0.0);
}

TEST_CASE("block step equals split of the monolithic step (100 instances)") {
  RngStream rng(10);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + trial % 5, n = 2 + (trial / 5) % 4;
    const std::size_t r = 1 + trial % std::min(m, n);
    const std::size_t k = 1 + trial % 4;
    const Instance inst = random_instance(rng, m, n, r, k);
    const double eta = 0.05;
    const BlockSplit expect = split(gd_step(inst.pair, inst.sigma_x, eta), r);
    const BlockSplit got = predicted_block_step(split(inst.pair, r), inst.frame.leading_sigma(r),
                                                inst.frame.trailing_sigma(r), eta);
    worst = std::max({worst, rel_fro(expect.U, got.U), rel_fro(expect.V, got.V), rel_fro(expect.J, got.J),
                      rel_fro(expect.K, got.K)});
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("symmetrized step examples") {
  const std::vector<double> sd = {2.0, 1.0};
  const DenseMatrix sigma = DenseMatrix::diagonal(sd);
  const double eta = 0.1;
  RngStream rng(12);

  // B = 0, J = K = 0
  const DenseMatrix a = gaussian_matrix(2, 3, 1.0, rng);
  const BlockSplit bal{a, DenseMatrix(1, 3), a, DenseMatrix(1, 3)};
  const SymmetrizedState s = symmetrize(bal, sigma);
  const SymmetrizedState next = predicted_symmetrized_step(s, bal, sigma, eta);
  CHECK(rel_fro(next.A, s.A + eta * matmul(s.P, s.A)) <= 1e-14);
  const DenseMatrix sp = sigma - s.P;
  const DenseMatrix p_expect = s.P - eta * matmul(s.P, sp) - eta * matmul(sp, s.P) +
                               (eta * eta) * (matmul(matmul(s.P, s.P), s.P) - matmul(matmul(s.P, sigma), s.P));
  CHECK(rel_fro(next.P, p_expect) <= 1e-12);
  CHECK(next.B.max_abs() == 0.0);

  // Zero blocks: P = Sigma is a fixed point.
  const BlockSplit zero{DenseMatrix(2, 3), DenseMatrix(1, 3), DenseMatrix(2, 3), DenseMatrix(1, 3)};
  const SymmetrizedState zs = symmetrize(zero, sigma);
  CHECK(zs.P == sigma);
  const SymmetrizedState zn = predicted_symmetrized_step(zs, zero, sigma, eta);
  CHECK(max_abs_diff(zn.P, sigma) <= 1e-15);
  CHECK(zn.A.max_abs() == 0.0);
}

TEST_CASE("symmetrized step equals recomputing from the block step (100 instances)") {
  RngStream rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + trial % 5, n = 2 + (trial / 5) % 4;
    const std::size_t r = 1 + trial % std::min(m, n);
    const std::size_t k = 1 + trial % 4;
    const Instance inst = random_instance(rng, m, n, r, k);
    const double eta = 0.05;
    const BlockSplit blocks = split(inst.pair, r);
    const DenseMatrix sigma = inst.frame.leading_sigma(r);
    const SymmetrizedState state = symmetrize(blocks, sigma);
    const SymmetrizedState closed = predicted_symmetrized_step(state, blocks, sigma, eta);
    const SymmetrizedState direct =
        symmetrize(predicted_block_step(blocks, sigma, inst.frame.trailing_sigma(r), eta), sigma);
    worst = std::max({worst, rel_fro(closed.A, direct.A), rel_fro(closed.B, direct.B), rel_fro(closed.P, direct.P),
                      rel_fro(closed.Q, direct.Q)});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("signal_ratio") {
  RngStream rng(2);
  const std::vector<double> sv = {1.0, 0.8, 0.3, 0.1};
  auto [x, frame] = synth_matrix(6, 5, sv, rng);
  const std::size_t r = 2;

  const DenseMatrix coef_f = gaussian_matrix(r, 3, 1.0, rng);
  const DenseMatrix coef_g = gaussian_matrix(r, 3, 1.0, rng);
  const DenseMatrix in_f = matmul(frame.left.left_cols(r), coef_f);
  const DenseMatrix in_g = matmul(frame.right.left_cols(r), coef_g);
  CHECK(signal_ratio(in_f, in_g, frame, r).infinite());

  const DenseMatrix out_f = matmul(frame.left.block(0, r, 6, 4), gaussian_matrix(4, 3, 1.0, rng));
  const DenseMatrix out_g = matmul(frame.right.block(0, r, 5, 3), gaussian_matrix(3, 3, 1.0, rng));
  const SignalRatio zero = signal_ratio(out_f, out_g, frame, r);
  CHECK_FALSE(zero.infinite());
  CHECK(zero.value <= 1e-12);

  const SignalRatio none = signal_ratio(DenseMatrix(6, 3), DenseMatrix(5, 3), frame, r);
  CHECK_FALSE(none.infinite());
  CHECK(none.value == 0.0);
  CHECK_THROWS_AS(signal_ratio(in_f, in_g, frame, 6), InvalidArgument);

  // mixed: compare with projections computed directly
  const DenseMatrix f = gaussian_matrix(6, 3, 1.0, rng);
  const DenseMatrix g = gaussian_matrix(5, 3, 1.0, rng);
  const DenseMatrix ul = frame.left.left_cols(r);
  const DenseMatrix vl = frame.right.left_cols(r);
  const double num = std::min(nth_singular_value(matmul_tn(ul, f), r), nth_singular_value(matmul_tn(vl, g), r));
  const double den = std::max(operator_norm(f - matmul(ul, matmul_tn(ul, f))), operator_norm(g - matmul(vl, matmul_tn(vl, g))));
  CHECK(signal_ratio(f, g, frame, r).value == doctest::Approx(num / den).epsilon(1e-8));
}

TEST_CASE("signal_ratio at Gaussian initialization sits inside the w.h.p. bracket up to a factor 3") {
  const std::size_t m = 100, k = 5, r = 2;
  RngStream rng(77);
  const std::vector<double> sv = {1.0, 0.9, 0.5};
  auto [x, frame] = synth_matrix(m, m, sv, rng);
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream s(seed);
    const DenseMatrix f = gaussian_matrix(m, k, 1.0, s);
    const DenseMatrix g = gaussian_matrix(m, k, 1.0, s);
    ratios.push_back(signal_ratio(f, g, frame, r).value);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = 0.5 * (ratios[24] + ratios[25]);
  const double sk = std::sqrt(double(k)), sr1 = std::sqrt(double(r - 1));
  const double lower = (sk - sr1) / std::sqrt(double(m - r + k));
  const double upper = std::min((sk + sr1) / std::abs(std::sqrt(double(m - r)) - sk), 1.0);
  CHECK(median >= lower / 3.0);
  CHECK(median <= 3.0 * upper);
}

TEST_CASE("block_norms") {
  const std::vector<double> sd = {2.0, 1.0};
  const DenseMatrix sigma = DenseMatrix::diagonal(sd);
  const BlockSplit zero{DenseMatrix(2, 3), DenseMatrix(2, 3), DenseMatrix(2, 3), DenseMatrix(1, 3)};
  const BlockNorms z = block_norms(zero, symmetrize(zero, sigma), sigma);
  CHECK(z.signal_residual == doctest::Approx(2.0));
  CHECK(z.p == doctest::Approx(2.0));
  CHECK(z.uk == 0.0);
  CHECK(z.jv == 0.0);
  CHECK(z.jk == 0.0);
  CHECK(z.q == 0.0);
  CHECK(z.b_fro == 0.0);
  CHECK(z.sigma_r_a == 0.0);

  RngStream rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> sv = {1.5, 1.0, 0.4, 0.2};
    auto [x, frame] = synth_matrix(6, 5, sv, rng);
    const FactorPair p{gaussian_matrix(6, 3, 0.5, rng), gaussian_matrix(5, 3, 0.5, rng)};
    const BlockNorms b = trajectory_block_norms(frame, p, 2);
    const double err = operator_norm(p.product() - truncate_rank(frame, 2));
    CHECK(err <= b.error_bound() + 1e-9);
    CHECK(b.signal_residual <= b.p + b.q + 1e-9);
  }
}

TEST_CASE("singular values of S(I - eta S^T S) are x - eta x^3") {
  RngStream rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = 1 + trial % 4;
    const std::size_t k = r + trial % 3;
    const double eta = 0.05 + 0.2 * rng.next_uniform();
    DenseMatrix s = gaussian_matrix(r, k, 1.0, rng);
    s *= std::sqrt(1.0 / (3.0 * eta)) * rng.next_uniform() / operator_norm(s);
    const DenseMatrix mapped = matmul(s, DenseMatrix::identity(k) - eta * matmul_tn(s, s));
    const auto before = singular_values(s);
    const auto after = singular_values(mapped);
    for (std::size_t i = 0; i < before.size(); ++i) {
      const double x = before[i];
      CHECK(std::abs(after[i] - (x - eta * x * x * x)) <= 1e-9);
    }
  }
}

TEST_CASE("trajectory diagnostics on a small run with a gap") {
  // Rank-3 target, r = 2, delta = 0.5, unit Frobenius norm.
  const double delta = 0.5;
  const Target t = overfit_target(60, 50, delta, 3);
  GdConfig cfg;
  cfg.k = 10;
  cfg.rho = 1e-6;
  cfg.eta = 0.1;
  cfg.max_iters = 1500;
  cfg.record_every = 5;
  cfg.seed = 4;
  const std::size_t r = 2;
  const TrajectoryRecord rec = run(t.x, t.frame, r, cfg, true);
  const double sigma1 = t.frame.singular_values[0];
  const double sigma_r = t.frame.singular_values[r - 1];

  // (a) error block stays at the scale of the final bound
  double max_jk = 0.0;
  for (const auto& b : rec.block_norms) max_jk = std::max(max_jk, b.jk);
  CHECK(max_jk <= 10.0 * std::pow(cfg.rho, delta / (2.0 * (2.0 - delta))) * sigma1);

  // (b) sigma_r(A) nondecreasing until it crosses 0.8 sqrt(sigma_r)
  const double threshold = 0.8 * std::sqrt(sigma_r);
  std::size_t crossing = rec.size();
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec.block_norms[i].sigma_r_a > threshold) {
      crossing = i;
      break;
    }
    if (i > 0) CHECK(rec.block_norms[i].sigma_r_a >= rec.block_norms[i - 1].sigma_r_a);
  }
  REQUIRE(crossing < rec.size());

  // (c) ||P|| decreases after the crossing until it reaches the error-block scale
  for (std::size_t i = crossing + 1; i < rec.size(); ++i) {
    const auto& b = rec.block_norms[i];
    const double floor = b.uk + b.jv + b.jk;
    if (rec.block_norms[i - 1].p <= floor) break;
    CHECK(b.p < rec.block_norms[i - 1].p);
  }
}
