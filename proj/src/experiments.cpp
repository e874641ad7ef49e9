#include "gdfactor/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "gdfactor/csv.hpp"
#include "gdfactor/error.hpp"
#include "gdfactor/psd_toy.hpp"
#include "gdfactor/rng.hpp"
#include "gdfactor/schedule.hpp"
#include "gdfactor/svg.hpp"

namespace gdfactor {

namespace {

constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kSweepRank = 3;

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::string fmt(double v) { return format_double(v); }

std::string join(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

std::vector<double> normalized(std::vector<double> s) {
  double sq = 0.0;
  for (double v : s) sq += v * v;
  const double scale = 1.0 / std::sqrt(sq);
  for (double& v : s) v *= scale;
  return s;
}

GdConfig demo_config(const OverfitSettings& s, double rho) {
  GdConfig cfg;
  cfg.eta = s.eta;
  cfg.rho = rho;
  cfg.k = s.k;
  cfg.max_iters = s.iters;
  cfg.record_every = s.record_every;
  cfg.seed = derive_seed(s.seed, {1});
  return cfg;
}

std::size_t first_below(const TrajectoryRecord& rec, double threshold) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec.train_error_fro[i] < threshold) return rec.iterations[i];
  }
  return kNever;
}

std::vector<double> as_doubles(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

void parallel_for(std::size_t jobs, unsigned parallel, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, parallel), jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line: need at least two paired points");
  const double nn = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nn;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

Target overfit_target(std::size_t m, std::size_t n, double delta, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("overfit_target: delta must lie in (0, 1]");
  RngStream rng(derive_seed(seed, {0}));
  auto [x, frame] = synth_matrix(m, n, normalized({1.0, 1.0, 1.0 - delta}), rng);
  return {std::move(x), std::move(frame)};
}

std::vector<double> sweep_spectrum(double kappa, double delta) {
  if (!(kappa >= 1.0)) throw InvalidArgument("sweep_spectrum: kappa must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("sweep_spectrum: delta must lie in (0, 1]");
  return {kappa, std::sqrt(kappa), 1.0, 1.0 - delta};
}

std::vector<SweepPoint> sweep_grid(const std::vector<std::size_t>& dims, const std::vector<double>& rhos,
                                   const std::vector<double>& deltas, const std::vector<double>& kappas,
                                   const std::vector<double>& etas) {
  if (dims.empty() || rhos.empty() || deltas.empty() || kappas.empty() || etas.empty()) {
    throw ConfigError("sweep: every axis needs at least one value");
  }
  std::vector<SweepPoint> out;
  for (auto d : dims)
    for (double rho : rhos)
      for (double delta : deltas)
        for (double kappa : kappas)
          for (double eta : etas) out.push_back({d, rho, delta, kappa, eta});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t sweep_seed(std::uint64_t master, const SweepPoint& p, std::size_t trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(p.dim), bits(p.rho), bits(p.delta), bits(p.kappa),
                              bits(p.eta), static_cast<std::uint64_t>(trial)});
}

SweepRow run_sweep_job(const SweepPoint& p, std::size_t trial, const SweepSettings& settings) {
  if (p.dim < 4) throw InvalidArgument("sweep: dimension must be at least 4 for a rank-4 target");
  SweepRow row;
  row.point = p;
  row.trial = trial;
  row.seed = sweep_seed(settings.master_seed, p, trial);

  RngStream rng = RngStream(row.seed).split(0);
  const auto spectrum = sweep_spectrum(p.kappa, p.delta);
  auto [x, frame] = synth_matrix(p.dim, p.dim, spectrum, rng);

  GdConfig cfg;
  cfg.eta = p.eta;
  cfg.rho = p.rho;
  cfg.k = settings.k;
  cfg.max_iters = settings.iters;
  cfg.record_every = 1;
  cfg.seed = derive_seed(row.seed, {1});
  RunOptions opts;
  opts.spectral_metrics = false;

  TrajectoryRecord rec;
  try {
    rec = run(x, frame, kSweepRank, cfg, opts);
  } catch (const NumericalOverflow& e) {
    throw NumericalOverflow(std::string(e.what()) + " [dim=" + std::to_string(p.dim) + " rho=" + fmt(p.rho) +
                                " delta=" + fmt(p.delta) + " kappa=" + fmt(p.kappa) + " eta=" + fmt(p.eta) + "]",
                            e.iteration());
  }
  double ref_sq = 0.0;
  for (std::size_t i = 0; i < kSweepRank; ++i) ref_sq += spectrum[i] * spectrum[i];
  const EarlyStop best = select_early_stop(rec, ErrorKind::kFrobenius);
  row.t0 = best.iteration;
  row.eps = best.error / std::sqrt(ref_sq);
  row.final_train = rec.train_error_fro.back();
  row.final_test = rec.test_error_fro.back();
  return row;
}

std::vector<SweepRow> run_sweep(const std::vector<SweepPoint>& points, const SweepSettings& settings) {
  if (settings.trials < 1) throw ConfigError("sweep: trials must be at least 1");
  const std::size_t jobs = points.size() * settings.trials;
  std::vector<SweepRow> rows(jobs);
  parallel_for(jobs, settings.parallel, [&](std::size_t j) {
    rows[j] = run_sweep_job(points[j / settings.trials], j % settings.trials, settings);
  });
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.point != b.point) return a.point < b.point;
    return a.seed < b.seed;
  });
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  for (const auto& row : rows) {
    if (out.empty() || out.back().point != row.point) out.push_back({row.point, 0, 0.0, 0.0});
    auto& s = out.back();
    ++s.trials;
    s.mean_eps += row.eps;
    s.mean_t0 += static_cast<double>(row.t0);
  }
  for (auto& s : out) {
    s.mean_eps /= static_cast<double>(s.trials);
    s.mean_t0 /= static_cast<double>(s.trials);
  }
  return out;
}

OverfitResult run_overfit(const OverfitSettings& s) {
  const Target target = overfit_target(s.m, s.n, s.delta, s.seed);
  OverfitResult out;
  out.record = run(target.x, target.frame, s.r, demo_config(s, s.rho), false);
  out.sigma3 = target.frame.singular_values.at(2);
  out.x_fro = frobenius_norm(target.x);
  const auto& test = out.record.test_error_fro;
  const double lowest = *std::min_element(test.begin(), test.end());
  out.interior_minimum = lowest < test.front() && lowest < test.back();
  return out;
}

InitCompareResult run_init_compare(const OverfitSettings& s, double rho_moderate, double threshold) {
  RngStream rng(derive_seed(s.seed, {0}));
  const double h = 1.0 / std::sqrt(2.0);
  auto [x, frame] = synth_matrix(s.m, s.n, std::vector<double>{h, h}, rng);
  RunOptions opts;
  opts.spectral_metrics = false;
  InitCompareResult out;
  out.small = run(x, frame, s.r, demo_config(s, s.rho), opts);
  out.moderate = run(x, frame, s.r, demo_config(s, rho_moderate), opts);
  out.small_hit = first_below(out.small, threshold);
  out.moderate_hit = first_below(out.moderate, threshold);
  out.small_faster = out.small_hit != kNever && out.small_hit < out.moderate_hit;
  return out;
}

// ---- commands ----------------------------------------------------------

namespace {

const std::set<std::string> kCommonKeys = {"seed", "trials", "svg"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

struct Output {
  const CommandContext& ctx;
  CommandOutcome& outcome;
  std::uint64_t seed;
  bool svg;

  Output(const CommandContext& c, CommandOutcome& o)
      : ctx(c), outcome(o), seed(c.config.get_u64("seed", 1)), svg(c.config.get_bool("svg", true)) {}

  CsvTable table(std::vector<CsvColumn> cols) const {
    CsvTable t(std::move(cols));
    t.add_standard_meta(ctx.command, seed, ctx.config.echo());
    return t;
  }
  void csv(const std::string& name, const CsvTable& t) {
    const auto path = ctx.out_dir / name;
    t.write(path);
    outcome.files.push_back(path);
  }
  void plot(const std::string& name, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    if (!svg) return;
    const auto path = ctx.out_dir / name;
    write_text_file(path, render_line_plot(spec, series));
    outcome.files.push_back(path);
  }
  void say(const std::string& line) { outcome.summary.push_back(line); }
};

OverfitSettings overfit_settings(const Config& c) {
  OverfitSettings s;
  s.m = c.get_size("m", s.m);
  s.n = c.get_size("n", s.n);
  s.k = c.get_size("k", s.k);
  s.r = c.get_size("r", s.r);
  s.delta = c.get_double("delta", s.delta);
  s.rho = c.get_double("rho", s.rho);
  s.eta = c.get_double("eta", s.eta);
  s.iters = c.get_size("iters", s.iters);
  s.record_every = c.get_size("record_every", default_record_every(s.m, s.n));
  s.seed = c.get_u64("seed", 1);
  return s;
}

void overfit_section(Output& out, const OverfitSettings& s, bool diagnostics) {
  const Target target = overfit_target(s.m, s.n, s.delta, s.seed);
  const TrajectoryRecord rec = run(target.x, target.frame, s.r, demo_config(s, s.rho), diagnostics);

  std::vector<CsvColumn> cols = {{"iteration", "gradient descent step t"},
                                 {"train_error_fro", "||F_t G_t^T - X||_F"},
                                 {"test_error_fro", "||F_t G_t^T - X_r||_F"},
                                 {"test_error_op", "||F_t G_t^T - X_r|| (operator norm)"}};
  for (std::size_t i = 1; i <= s.r + 2; ++i) {
    cols.push_back({"sv_" + std::to_string(i), "singular value " + std::to_string(i) + " of F_t G_t^T"});
  }
  if (diagnostics) {
    cols.push_back({"uv_minus_sigma", "||U V^T - Sigma||"});
    cols.push_back({"uk", "||U K^T||"});
    cols.push_back({"jv", "||J V^T||"});
    cols.push_back({"jk", "||J K^T||"});
    cols.push_back({"p_norm", "||P||"});
    cols.push_back({"q_norm", "||Q||"});
    cols.push_back({"b_fro", "||B||_F"});
    cols.push_back({"sigma_r_a", "sigma_r(A)"});
  }
  CsvTable table = out.table(std::move(cols));
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CsvTable::Row row;
    row.add(rec.iterations[i]).add(rec.train_error_fro[i]).add(rec.test_error_fro[i]).add(rec.test_error_op[i]);
    for (double v : rec.leading_singulars[i]) row.add(v);
    if (diagnostics) {
      const BlockNorms& b = rec.block_norms[i];
      row.add(b.signal_residual).add(b.uk).add(b.jv).add(b.jk).add(b.p).add(b.q).add(b.b_fro).add(b.sigma_r_a);
    }
    table.push(std::move(row));
  }
  out.csv("overfit_section.csv", table);

  const std::vector<double> t = as_doubles(rec.iterations);
  std::vector<PlotSeries> series = {{"train ||FG^T - X||_F", t, rec.train_error_fro},
                                    {"test ||FG^T - X_r||_F", t, rec.test_error_fro}};
  for (std::size_t j = 0; j < s.r + 2; ++j) {
    PlotSeries sv{"sigma_" + std::to_string(j + 1) + "(FG^T)", t, {}};
    for (const auto& v : rec.leading_singulars) sv.y.push_back(v[j]);
    series.push_back(std::move(sv));
  }
  out.plot("overfit_section.svg", {"Training error, test error and singular values", "iteration", "value", false, true},
           series);

  const auto& test = rec.test_error_fro;
  const EarlyStop best = select_early_stop(rec, ErrorKind::kFrobenius);
  const bool interior = best.error < test.front() && best.error < test.back();
  out.say("section: min test error " + fmt(best.error) + " at iteration " + std::to_string(best.iteration) +
          " (first " + fmt(test.front()) + ", last " + fmt(test.back()) + ", final train " +
          fmt(rec.train_error_fro.back()) + ")");
  out.say(std::string("section: interior minimum of the test error: ") + (interior ? "yes" : "NO"));
  if (!interior) out.outcome.exit_code = exit_code::kAssertion;
}

void overfit_noisy(Output& out, const Config& c, const OverfitSettings& base) {
  OverfitSettings s = base;
  s.k = c.get_size("noisy_k", 200);
  s.eta = c.get_double("noisy_eta", base.eta);
  s.iters = c.get_size("noisy_iters", 500);
  const std::size_t rank = c.get_size("noisy_rank", 10);
  const double noise_sd = c.get_double("noise_sd", 0.05);
  const double rho_moderate = c.get_double("rho_moderate", 1.0);
  if (rank < 1 || rank > std::min(s.m, s.n)) throw ConfigError("overfit-demo: noisy_rank out of range");
  if (!(noise_sd > 0.0)) throw ConfigError("overfit-demo: noise_sd must be positive");

  RngStream rng(derive_seed(s.seed, {2}));
  auto [clean, clean_frame] = synth_matrix(s.m, s.n, normalized(std::vector<double>(rank, 1.0)), rng);
  RngStream noise_rng = rng.split(1);
  DenseMatrix x = clean + gaussian_matrix(s.m, s.n, noise_sd * noise_sd, noise_rng);
  const SpectralFrame frame = svd(x);

  RunOptions opts;
  opts.spectral_metrics = false;
  opts.reference = truncated_reference(clean_frame, rank);

  CsvTable table = out.table({{"rho", "initialization size"},
                              {"iteration", "gradient descent step t"},
                              {"train_error_fro", "||F_t G_t^T - X||_F with X = X_clean + noise"},
                              {"test_error_fro", "||F_t G_t^T - X_clean||_F"}});
  std::vector<PlotSeries> series;
  for (double rho : {s.rho, rho_moderate}) {
    const TrajectoryRecord rec = run(x, frame, rank, demo_config(s, rho), opts);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      CsvTable::Row row;
      row.add(rho).add(rec.iterations[i]).add(rec.train_error_fro[i]).add(rec.test_error_fro[i]);
      table.push(std::move(row));
    }
    const auto t = as_doubles(rec.iterations);
    series.push_back({"train, rho=" + fmt(rho), t, rec.train_error_fro});
    series.push_back({"test, rho=" + fmt(rho), t, rec.test_error_fro});
    const EarlyStop best = select_early_stop(rec, ErrorKind::kFrobenius);
    out.say("noisy: rho=" + fmt(rho) + " min test error " + fmt(best.error) + " at iteration " +
            std::to_string(best.iteration) + ", final test " + fmt(rec.test_error_fro.back()) + ", final train " +
            fmt(rec.train_error_fro.back()));
  }
  out.csv("overfit_noisy.csv", table);
  out.plot("overfit_noisy.svg", {"Noisy low-rank target: training vs test error", "iteration", "error", false, true},
           series);
}

CommandOutcome cmd_overfit_demo(const CommandContext& ctx) {
  ctx.config.require_known(with_common({"m", "n", "k", "r", "delta", "rho", "eta", "iters", "record_every", "variant",
                                        "diagnostics", "noise_sd", "noisy_rank", "noisy_k", "noisy_eta",
                                        "noisy_iters", "rho_moderate"}));
  CommandOutcome outcome;
  Output out(ctx, outcome);
  const OverfitSettings s = overfit_settings(ctx.config);
  const std::string variant = ctx.config.get_string("variant", "both");
  if (variant != "both" && variant != "section" && variant != "noisy") {
    throw ConfigError("overfit-demo: variant must be both, section or noisy");
  }
  if (variant != "noisy") overfit_section(out, s, ctx.config.get_bool("diagnostics", false));
  if (variant != "section") overfit_noisy(out, ctx.config, s);
  return outcome;
}

CommandOutcome cmd_init_compare(const CommandContext& ctx) {
  ctx.config.require_known(
      with_common({"m", "n", "k", "eta", "rho", "rho_moderate", "iters", "record_every", "threshold"}));
  CommandOutcome outcome;
  Output out(ctx, outcome);
  OverfitSettings s = overfit_settings(ctx.config);
  s.r = 2;
  const double rho_moderate = ctx.config.get_double("rho_moderate", 1.0);
  const double threshold = ctx.config.get_double("threshold", 1e-3);
  const InitCompareResult res = run_init_compare(s, rho_moderate, threshold);

  CsvTable table = out.table({{"rho", "initialization size"},
                              {"iteration", "gradient descent step t"},
                              {"train_error_fro", "||F_t G_t^T - X||_F (X exactly rank 2)"}});
  std::vector<PlotSeries> series;
  for (const auto* rec : {&res.small, &res.moderate}) {
    const double rho = rec == &res.small ? s.rho : rho_moderate;
    for (std::size_t i = 0; i < rec->size(); ++i) {
      CsvTable::Row row;
      row.add(rho).add(rec->iterations[i]).add(rec->train_error_fro[i]);
      table.push(std::move(row));
    }
    series.push_back({"rho=" + fmt(rho), as_doubles(rec->iterations), rec->train_error_fro});
  }
  out.csv("init_compare.csv", table);
  out.plot("init_compare.svg", {"Small vs moderate initialization", "iteration", "||FG^T - X||_F", false, true},
           series);
  auto hit = [](std::size_t h) { return h == kNever ? std::string("never") : std::to_string(h); };
  out.say("init-compare: iterations to reach train error " + fmt(threshold) + ": rho=" + fmt(s.rho) + " -> " +
          hit(res.small_hit) + ", rho=" + fmt(rho_moderate) + " -> " + hit(res.moderate_hit));
  out.say(std::string("init-compare: small initialization faster: ") + (res.small_faster ? "yes" : "NO"));
  if (!res.small_faster) outcome.exit_code = exit_code::kAssertion;
  return outcome;
}

struct SweepDefaults {
  std::vector<std::size_t> dims;
  std::vector<double> rhos;
  std::vector<double> deltas;
  std::vector<double> kappas;
  std::vector<double> etas;
};

std::string point_label(const SweepPoint& p, bool dim, bool rho, bool delta, bool kappa, bool eta) {
  std::string s;
  auto add = [&](const std::string& part) { s += (s.empty() ? "" : " ") + part; };
  if (dim) add("m=n=" + std::to_string(p.dim));
  if (rho) add("rho=" + fmt(p.rho));
  if (delta) add("delta=" + fmt(p.delta));
  if (kappa) add("kappa=" + fmt(p.kappa));
  if (eta) add("eta=" + fmt(p.eta));
  return s;
}

CommandOutcome cmd_sweep(const CommandContext& ctx, const SweepDefaults& defaults) {
  ctx.config.require_known(with_common({"dim", "rho", "delta", "kappa", "eta", "k", "iters"}));
  CommandOutcome outcome;
  Output out(ctx, outcome);
  const Config& c = ctx.config;
  const auto points = sweep_grid(c.get_sizes("dim", defaults.dims), c.get_doubles("rho", defaults.rhos),
                                 c.get_doubles("delta", defaults.deltas), c.get_doubles("kappa", defaults.kappas),
                                 c.get_doubles("eta", defaults.etas));
  SweepSettings settings;
  settings.k = c.get_size("k", settings.k);
  settings.iters = c.get_size("iters", settings.iters);
  settings.trials = c.get_size("trials", settings.trials);
  settings.master_seed = out.seed;
  settings.parallel = ctx.parallel;
  if (settings.k < kSweepRank) throw ConfigError("sweep: k must be at least 3");

  const auto rows = run_sweep(points, settings);
  const auto summary = summarize(rows);
  const std::string& name = ctx.command;
  const std::string stem = name == "sweep-rho"   ? "sweep_rho"
                           : name == "sweep-gap" ? "sweep_gap"
                           : name == "sweep-dim" ? "sweep_dim"
                                                 : "sweep_stepdim";

  CsvTable table = out.table({{"dim", "m = n"},
                              {"rho", "initialization size"},
                              {"delta", "relative gap (sigma_3 - sigma_4) / sigma_3"},
                              {"kappa", "sigma_1 / sigma_3"},
                              {"eta", "stepsize"},
                              {"trial", "repetition index"},
                              {"seed", "job seed derived from (master seed, config, trial)"},
                              {"t0", "iteration minimizing ||F_t G_t^T - X_3||_F"},
                              {"eps", "min_t ||F_t G_t^T - X_3||_F / ||X_3||_F"},
                              {"final_train_error", "||F_T G_T^T - X||_F at the last iteration"},
                              {"final_test_error", "||F_T G_T^T - X_3||_F at the last iteration"}});
  for (const auto& r : rows) {
    CsvTable::Row row;
    row.add(r.point.dim).add(r.point.rho).add(r.point.delta).add(r.point.kappa).add(r.point.eta);
    row.add(r.trial).add(r.seed).add(r.t0).add(r.eps).add(r.final_train).add(r.final_test);
    table.push(std::move(row));
  }
  out.csv(stem + ".csv", table);

  CsvTable agg = out.table({{"dim", "m = n"},
                            {"rho", "initialization size"},
                            {"delta", "relative gap"},
                            {"kappa", "sigma_1 / sigma_3"},
                            {"eta", "stepsize"},
                            {"trials", "number of repetitions averaged"},
                            {"mean_eps", "trial average of eps"},
                            {"mean_t0", "trial average of t0"},
                            {"mean_t0_times_delta", "mean_t0 * delta"}});
  for (const auto& s : summary) {
    CsvTable::Row row;
    row.add(s.point.dim).add(s.point.rho).add(s.point.delta).add(s.point.kappa).add(s.point.eta);
    row.add(s.trials).add(s.mean_eps).add(s.mean_t0).add(s.mean_t0 * s.point.delta);
    agg.push(std::move(row));
  }
  out.csv(stem + "_summary.csv", agg);

  // Group summaries into curves along the command's primary axis.
  using Key = std::vector<double>;
  auto x_of = [&](const SweepPoint& p) {
    if (name == "sweep-rho") return p.rho;
    if (name == "sweep-gap") return p.delta;
    return static_cast<double>(p.dim);
  };
  auto key_of = [&](const SweepPoint& p) -> Key {
    if (name == "sweep-rho") return {double(p.dim), p.delta, p.kappa, p.eta};
    if (name == "sweep-gap") return {double(p.dim), p.rho, p.kappa, p.eta};
    return {p.rho, p.delta, p.kappa, p.eta};
  };
  std::map<Key, std::vector<const SweepSummary*>> curves;
  for (const auto& s : summary) curves[key_of(s.point)].push_back(&s);

  std::vector<PlotSeries> eps_series;
  std::vector<PlotSeries> t0_series;
  for (const auto& [key, members] : curves) {
    const SweepPoint& p = members.front()->point;
    const std::string label = point_label(p, name != "sweep-dim" && name != "sweep-stepdim", name != "sweep-rho",
                                          name != "sweep-gap", true, true);
    PlotSeries se{label, {}, {}};
    PlotSeries st{label, {}, {}};
    std::vector<double> xs, logs;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    double t0d_lo = std::numeric_limits<double>::infinity(), t0d_hi = 0.0;
    bool decreasing = true;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto* m = members[i];
      se.x.push_back(x_of(m->point));
      se.y.push_back(m->mean_eps);
      st.x.push_back(x_of(m->point));
      st.y.push_back(m->mean_t0);
      xs.push_back(std::log10(x_of(m->point)));
      logs.push_back(std::log10(m->mean_eps));
      lo = std::min(lo, m->mean_eps);
      hi = std::max(hi, m->mean_eps);
      t0d_lo = std::min(t0d_lo, m->mean_t0 * m->point.delta);
      t0d_hi = std::max(t0d_hi, m->mean_t0 * m->point.delta);
      if (i > 0 && !(m->mean_eps < members[i - 1]->mean_eps)) decreasing = false;
    }
    if (name == "sweep-rho" && members.size() >= 2) {
      const LinearFit fit = fit_line(xs, logs);
      out.say(label + ": log10(eps) vs log10(rho) slope " + fmt(fit.slope) + ", R^2 " + fmt(fit.r2));
    } else if (name == "sweep-gap") {
      out.say(label + ": mean eps strictly decreasing in delta: " + (decreasing ? "yes" : "no") +
              "; t0*delta spread " + fmt(t0d_hi / t0d_lo));
    } else {
      out.say(label + ": max/min mean eps across dimensions " + fmt(hi / lo));
    }
    eps_series.push_back(std::move(se));
    t0_series.push_back(std::move(st));
  }

  if (name == "sweep-rho") {
    out.plot(stem + ".svg", {"rho vs eps", "rho", "eps", true, true, true}, eps_series);
  } else if (name == "sweep-gap") {
    out.plot(stem + ".svg", {"eps vs delta", "delta", "eps", false, true, true}, eps_series);
    out.plot(stem + "_t0.svg", {"T0 vs delta", "delta", "T0", false, false, true}, t0_series);
  } else {
    out.plot(stem + ".svg", {"Smallest error vs dimension", "m = n", "eps", false, true, true}, eps_series);
  }
  return outcome;
}

CommandOutcome cmd_schedule(const CommandContext& ctx) {
  ctx.config.require_known(
      with_common({"singular_values", "r", "m", "n", "k", "c_rho", "delta_cap", "eta", "rho", "log10_rho"}));
  CommandOutcome outcome;
  Output out(ctx, outcome);
  const Config& c = ctx.config;
  ScheduleInput in;
  in.singular_values = c.get_doubles("singular_values", {3.0, 2.0, 1.0, 0.0});
  in.r = c.get_size("r", std::min<std::size_t>(3, in.singular_values.size()));
  in.m = c.get_size("m", in.singular_values.size());
  in.n = c.get_size("n", in.singular_values.size());
  in.k = c.get_size("k", in.r);
  in.c_rho = c.get_double("c_rho", in.c_rho);
  in.delta_cap = c.get_double("delta_cap", in.delta_cap);
  try {
    in.validate();
  } catch (const GapAbsent& e) {
    throw GapAbsent(std::string(e.what()) +
                    ": sigma_r must strictly exceed sigma_{r+1}; otherwise X_r is not uniquely defined");
  }

  const double eta_max = stepsize_cap(in);
  const RhoCap cap = rho_cap(in);
  const double eta = c.get_double("eta", eta_max);
  if (c.has("rho") && c.has("log10_rho")) throw ConfigError("schedule: give rho or log10_rho, not both");
  double log10_rho = cap.log10_value;
  if (c.has("rho")) {
    const double rho = c.get_double("rho", 0.0);
    if (!(rho > 0.0)) throw ConfigError("schedule: rho must be positive");
    log10_rho = std::log10(rho);
  } else if (c.has("log10_rho")) {
    log10_rho = c.get_double("log10_rho", 0.0);
  }

  const GdSchedule s = iteration_counts_log10(in, eta, log10_rho);
  std::ostringstream rep;
  rep << "singular_values = " << join(in.singular_values) << "\n";
  rep << "r = " << in.r << ", m = " << in.m << ", n = " << in.n << ", k = " << in.k << ", c_rho = " << fmt(in.c_rho)
      << "\n";
  rep << "delta = " << fmt(s.delta) << " (cap " << fmt(in.delta_cap) << ")\n";
  rep << "gamma = " << fmt(s.gamma) << "\n";
  rep << "kappa_r = " << fmt(s.kappa_r) << "\n";
  rep << "eta_max = " << fmt(eta_max) << "\n";
  rep << "log10_rho_max = " << fmt(cap.log10_value) << "\n";
  for (std::size_t i = 0; i < 4; ++i) rep << "  log10 rho bound " << i + 1 << " = " << fmt(cap.terms_log10[i]) << "\n";
  rep << "eta = " << fmt(eta) << "\n";
  rep << "log10_rho = " << fmt(log10_rho) << "\n";
  rep << "T1 = " << s.T1 << "\nT2 = " << s.T2 << "\nT3 = " << s.T3 << "\nT0 = " << s.T0 << "\nT = " << s.T << "\n";
  rep << "error_bound = " << fmt(s.error_bound) << " (log10 " << fmt(s.log10_error_bound) << ")\n";
  rep << "probability = 1 - (C c_rho)^(k-r+1) - C exp(-k/C) (C unspecified)\n";

  bool ok = true;
  if (eta > eta_max) {
    rep << "VIOLATION: stepsize cap: eta = " << fmt(eta) << " > eta_max = " << fmt(eta_max) << "\n";
    ok = false;
  }
  if (log10_rho > cap.log10_value) {
    rep << "VIOLATION: initialization-size cap: log10 rho = " << fmt(log10_rho) << " > " << fmt(cap.log10_value)
        << "\n";
    ok = false;
  }
  const bool window = s.T0 <= s.T;
  rep << "T0 <= T: " << (window ? "holds" : "fails") << "\n";
  if (ok && !window) ok = false;

  write_text_file(ctx.out_dir / "schedule.txt", rep.str());
  outcome.files.push_back(ctx.out_dir / "schedule.txt");
  std::istringstream lines(rep.str());
  for (std::string line; std::getline(lines, line);) out.say(line);
  if (!ok) outcome.exit_code = exit_code::kAssertion;
  return outcome;
}

CommandOutcome cmd_psd_toy(const CommandContext& ctx) {
  ctx.config.require_known(with_common({"lambdas", "r", "rho", "eta", "gap_ratio"}));
  CommandOutcome outcome;
  Output out(ctx, outcome);
  const Config& c = ctx.config;
  std::vector<double> default_lambdas = {1.0, 0.9, 0.8, 0.7, 0.6};
  default_lambdas.resize(20, 0.05);
  const auto lambdas = c.get_doubles("lambdas", default_lambdas);
  const std::size_t r = c.get_size("r", std::min<std::size_t>(5, lambdas.size()));
  const double rho = c.get_double("rho", 1e-4);
  const double eta = c.get_double("eta", 0.05);
  const double gap_ratio = c.get_double("gap_ratio", 0.1);
  const std::size_t trials = c.get_size("trials", 1000);

  const PsdToyResult res = run_to_schedule(lambdas, r, rho, eta, gap_ratio, true);
  const ContractionReport rep = contraction_check(lambdas, r, eta, trials, out.seed, gap_ratio);

  std::vector<CsvColumn> cols = {{"t", "iteration"}};
  for (std::size_t i = 1; i <= lambdas.size(); ++i) {
    cols.push_back({"f_" + std::to_string(i), "diagonal entry " + std::to_string(i) + " of F_t"});
  }
  CsvTable table = out.table(std::move(cols));
  table.add_meta("lambdas = " + join(lambdas));
  table.add_meta("T = " + std::to_string(res.T));
  for (std::size_t t = 0; t < res.trajectory.size(); ++t) {
    CsvTable::Row row;
    row.add(t);
    for (double v : res.trajectory[t]) row.add(v);
    table.push(std::move(row));
  }
  out.csv("psd_toy.csv", table);

  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i > 0 && lambdas[i] == lambdas[i - 1]) continue;
    PlotSeries s{"f_" + std::to_string(i + 1) + " (lambda=" + fmt(lambdas[i]) + ")", {}, {}};
    for (std::size_t t = 0; t < res.trajectory.size(); ++t) {
      s.x.push_back(static_cast<double>(t));
      s.y.push_back(res.trajectory[t][i]);
    }
    series.push_back(std::move(s));
  }
  out.plot("psd_toy.svg", {"Diagonal dynamics of the PSD toy model", "iteration", "f_i", false, false}, series);

  out.say("psd-toy: T = " + std::to_string(res.T) + ", bound sqrt(rho)*sqrt(lambda_1) = " + fmt(res.bound));
  out.say("psd-toy: max_{i<=r} |f_i - sqrt(lambda_i)| = " + fmt(res.max_signal_error) + " -> " +
          (res.signal_bound_holds ? "holds" : "VIOLATED"));
  if (r < lambdas.size()) {
    out.say("psd-toy: max_{i>r} |f_i| = " + fmt(res.max_tail) + " -> " + (res.tail_bound_holds ? "holds" : "VIOLATED"));
  } else {
    out.say("psd-toy: trailing bound: no coordinates beyond r");
  }
  out.say("psd-toy: ||F F^T - Sigma_r|| (diagonal) = " + fmt(res.diag_op_error));
  out.say("psd-toy: contraction check: " + std::to_string(rep.signal_checks + rep.tail_checks) + " one-step checks, " +
          std::to_string(rep.contraction_violations + rep.growth_violations + rep.tail_violations) + " violations");
  if (!res.holds() || !rep.clean()) outcome.exit_code = exit_code::kAssertion;
  return outcome;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"overfit-demo", "init-compare",  "sweep-rho", "sweep-gap",
                                                 "sweep-dim",    "sweep-stepdim", "schedule",  "psd-toy"};
  return names;
}

CommandOutcome run_command(const CommandContext& ctx) {
  const std::string& c = ctx.command;
  if (c == "overfit-demo") return cmd_overfit_demo(ctx);
  if (c == "init-compare") return cmd_init_compare(ctx);
  if (c == "sweep-rho") return cmd_sweep(ctx, {{100}, {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}, {0.5}, {1.0}, {0.25}});
  if (c == "sweep-gap") return cmd_sweep(ctx, {{100}, {1e-8}, {0.1, 0.3, 0.5, 0.7, 0.9}, {1.0}, {0.25}});
  if (c == "sweep-dim") return cmd_sweep(ctx, {{50, 100, 200}, {1e-8}, {0.5}, {1.0}, {0.25}});
  if (c == "sweep-stepdim") return cmd_sweep(ctx, {{50, 100, 200}, {1e-8, 1e-40}, {0.1, 0.5}, {1.0, 2.0}, {0.25}});
  if (c == "schedule") return cmd_schedule(ctx);
  if (c == "psd-toy") return cmd_psd_toy(ctx);
  throw ConfigError("unknown subcommand '" + c + "'");
}

}  // namespace gdfactor
