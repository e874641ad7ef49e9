#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gdfactor/config.hpp"
#include "gdfactor/csv.hpp"
#include "gdfactor/error.hpp"
#include "gdfactor/experiments.hpp"
#include "gdfactor/svg.hpp"
#include "oracles.hpp"

using namespace gdfactor;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gdfactor_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

CommandOutcome run_in(const std::string& command, const std::string& config_text, const fs::path& dir,
                      unsigned parallel = 1) {
  CommandContext ctx;
  ctx.command = command;
  ctx.config = Config::parse(config_text);
  ctx.out_dir = dir;
  ctx.parallel = parallel;
  return run_command(ctx);
}

}  // namespace

TEST_CASE("Config parsing") {
  const Config c = Config::parse(
      "# comment\n"
      "m = 250   # trailing comment\n"
      "rho = 1e-6\n"
      "rhos = [1e-4, 1e-6]\n"
      "dims = [50,100]\n"
      "flag = yes\n"
      "name = hello world\n");
  CHECK(c.get_size("m", 0) == 250);
  CHECK(c.get_double("rho", 0) == 1e-6);
  CHECK(c.get_doubles("rhos", {}) == std::vector<double>{1e-4, 1e-6});
  CHECK(c.get_sizes("dims", {}) == std::vector<std::size_t>{50, 100});
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_string("name", "") == "hello world");
  CHECK(c.get_double("missing", 2.5) == 2.5);
  CHECK(c.get_doubles("one", {3.0}) == std::vector<double>{3.0});
  CHECK(c.get_doubles("rho", {}) == std::vector<double>{1e-6});

  CHECK_THROWS_AS(Config::parse("no equals sign"), ConfigError);
  CHECK_THROWS_AS(Config::parse(" = 3"), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = abc").get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = 1.5").get_size("x", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = -1").get_size("x", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = [1, 2").get_doubles("x", {}), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = []").get_doubles("x", {}), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = [1,,2]").get_doubles("x", {}), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = maybe").get_bool("x", false), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = inf").get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/file.conf"), ConfigError);

  Config o = Config::parse("seed = 1\nb = 2");
  o.set("seed", "9");
  CHECK(o.get_u64("seed", 0) == 9);
  CHECK(o.echo() == std::vector<std::string>{"b = 2", "seed = 9"});
  CHECK_NOTHROW(o.require_known({"seed", "b"}));
  CHECK_THROWS_AS(o.require_known({"seed"}), ConfigError);
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  RngStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.next_gaussian() * std::pow(10.0, 20.0 * rng.next_gaussian());
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CsvTable") {
  CsvTable t({{"a", "first"}, {"b", "second"}});
  t.add_standard_meta("demo", 7, {"x = 1"});
  CsvTable::Row row;
  row.add(std::size_t{3}).add(0.25);
  t.push(std::move(row));
  CsvTable::Row quoted;
  quoted.add("x,y").add("say \"hi\"");
  t.push(std::move(quoted));
  CsvTable::Row short_row;
  short_row.add(1.0);
  CHECK_THROWS_AS(t.push(std::move(short_row)), InvalidArgument);
  CHECK(t.rows() == 2);
  CHECK(t.str() ==
        "# gdfactor 0.1.0 demo\n"
        "# master_seed = 7\n"
        "# config: x = 1\n"
        "# column a: first\n"
        "# column b: second\n"
        "a,b\n"
        "3,0.25\n"
        "\"x,y\",\"say \"\"hi\"\"\"\n");

  const fs::path dir = scratch_dir("csv");
  t.write(dir / "nested" / "t.csv");
  CHECK(slurp(dir / "nested" / "t.csv") == t.str());
  CHECK_THROWS_AS(write_text_file("/proc/gdfactor_no_such_dir/x.csv", "x"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("render_line_plot") {
  const std::string svg = render_line_plot({"title <&>", "x", "y", false, true, true},
                                           {{"a", {1, 2, 3}, {1, 10, 100}}, {"b", {1, 2}, {0.0, -1.0}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("width=\"800\"") != std::string::npos);
  CHECK(svg.find("height=\"600\"") != std::string::npos);
  CHECK(svg.find("<script") == std::string::npos);
  CHECK(svg.find("title &lt;&amp;&gt;") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  // empty input still renders a frame
  const std::string empty = render_line_plot({"t", "x", "y", true, true, false}, {});
  CHECK(empty.find("</svg>") != std::string::npos);
  CHECK(render_line_plot({"t", "x", "y", false, false, false}, {{"a", {0, 1}, {0, 1}}}) ==
        render_line_plot({"t", "x", "y", false, false, false}, {{"a", {0, 1}, {0, 1}}}));
}

TEST_CASE("fit_line matches the normal-equation oracle") {
  const std::vector<double> x = {-4, -6, -8, -10, -12};
  const std::vector<double> y = {-1.1, -1.7, -2.2, -2.9, -3.4};
  const LinearFit fit = fit_line(x, y);
  const oracle::Fit ref = oracle::least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(ref.slope).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(ref.intercept).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(ref.r2).epsilon(1e-12));
  const LinearFit exact = fit_line({0, 1, 2}, {1, 3, 5});
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), InvalidArgument);
  CHECK_THROWS_AS(fit_line({1, 1}, {1, 2}), InvalidArgument);
}

TEST_CASE("parallel_for") {
  std::vector<int> out(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < 50; ++i) CHECK(out[i] == static_cast<int>(i * i));
  std::atomic<int> count{0};
  parallel_for(0, 4, [&](std::size_t) { ++count; });
  CHECK(count == 0);
  try {
    parallel_for(20, 3, [](std::size_t i) {
      if (i == 7 || i == 13) throw std::runtime_error("job " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "job 7");
  }
}

TEST_CASE("synthetic targets") {
  const Target t = overfit_target(30, 20, 0.5, 4);
  CHECK(frobenius_norm(t.x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.frame.singular_values[0] == doctest::Approx(t.frame.singular_values[1]));
  CHECK(t.frame.singular_values[2] == doctest::Approx(0.5 * t.frame.singular_values[1]));
  CHECK(t.frame.singular_values[3] == 0.0);
  CHECK(overfit_target(30, 20, 0.5, 4).x == t.x);
  CHECK_THROWS_AS(overfit_target(30, 20, 0.0, 4), InvalidArgument);

  CHECK(sweep_spectrum(4.0, 0.25) == std::vector<double>{4.0, 2.0, 1.0, 0.75});
  CHECK_THROWS_AS(sweep_spectrum(0.5, 0.5), InvalidArgument);
}

TEST_CASE("sweep grid and seeds") {
  const auto grid = sweep_grid({100, 50}, {1e-8, 1e-4}, {0.5}, {1.0}, {0.25, 0.25});
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].dim == 50);
  CHECK(grid[0].rho == 1e-8);
  CHECK(grid[3].dim == 100);
  CHECK_THROWS_AS(sweep_grid({}, {1e-8}, {0.5}, {1.0}, {0.25}), ConfigError);

  SweepPoint a;
  SweepPoint b = a;
  b.rho = 1e-9;
  CHECK(sweep_seed(1, a, 0) == sweep_seed(1, a, 0));
  CHECK(sweep_seed(1, a, 0) != sweep_seed(1, a, 1));
  CHECK(sweep_seed(1, a, 0) != sweep_seed(1, b, 0));
  CHECK(sweep_seed(1, a, 0) != sweep_seed(2, a, 0));
}

TEST_CASE("sweep rows are identical at any parallelism") {
  const auto points = sweep_grid({12, 16}, {1e-6}, {0.5, 0.9}, {1.0}, {0.25});
  SweepSettings s;
  s.k = 5;
  s.iters = 60;
  s.trials = 3;
  const auto serial = run_sweep(points, s);
  s.parallel = 4;
  const auto parallel = run_sweep(points, s);
  REQUIRE(serial.size() == 12);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].point == parallel[i].point);
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].eps == parallel[i].eps);
    CHECK(serial[i].t0 == parallel[i].t0);
    CHECK(serial[i].final_train == parallel[i].final_train);
    if (i > 0 && serial[i].point == serial[i - 1].point) CHECK(serial[i].seed > serial[i - 1].seed);
  }
  const auto summary = summarize(serial);
  REQUIRE(summary.size() == 4);
  CHECK(summary[0].trials == 3);
  CHECK(summary[0].mean_eps == doctest::Approx((serial[0].eps + serial[1].eps + serial[2].eps) / 3));

  SweepPoint tiny;
  tiny.dim = 3;
  CHECK_THROWS_AS(run_sweep_job(tiny, 0, s), InvalidArgument);
}

TEST_CASE("small initialization reaches a low training error first") {
  OverfitSettings s;
  s.m = 30;
  s.n = 25;
  s.k = 8;
  s.eta = 0.2;
  s.iters = 600;
  s.record_every = 1;
  const InitCompareResult res = run_init_compare(s, 1.0, 1e-3);
  CHECK(res.small_faster);
  CHECK(res.small_hit < res.moderate_hit);
}

TEST_CASE("commands: psd-toy output is byte-deterministic") {
  const fs::path d1 = scratch_dir("psd1"), d2 = scratch_dir("psd2");
  const auto o1 = run_in("psd-toy", "trials = 50\n", d1);
  const auto o2 = run_in("psd-toy", "trials = 50\n", d2);
  CHECK(o1.exit_code == 0);
  CHECK(o1.summary == o2.summary);
  CHECK(slurp(d1 / "psd_toy.csv") == slurp(d2 / "psd_toy.csv"));
  CHECK(slurp(d1 / "psd_toy.svg") == slurp(d2 / "psd_toy.svg"));
  const std::string csv = slurp(d1 / "psd_toy.csv");
  CHECK(csv.rfind("# gdfactor 0.1.0 psd-toy\n# master_seed = 1\n# config: trials = 50\n", 0) == 0);
  CHECK(csv.find("# column f_20:") != std::string::npos);

  const fs::path d3 = scratch_dir("psd3");
  const auto full = run_in("psd-toy", "lambdas = [1, 1, 1]\nr = 3\neta = 0.1\nrho = 1e-3\nsvg = false\n", d3);
  CHECK(full.exit_code == 0);
  CHECK_FALSE(fs::exists(d3 / "psd_toy.svg"));
  bool empty_tail = false;
  for (const auto& line : full.summary) empty_tail |= line.find("no coordinates beyond r") != std::string::npos;
  CHECK(empty_tail);
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("commands: schedule report") {
  const fs::path dir = scratch_dir("schedule");
  const auto ok = run_in("schedule", "", dir);
  CHECK(ok.exit_code == 0);
  const std::string report = slurp(dir / "schedule.txt");
  CHECK(report.find("delta = 0.9 (cap 0.9)") != std::string::npos);
  CHECK(report.find("kappa_r = 3") != std::string::npos);
  CHECK(report.find("T0 <= T: holds") != std::string::npos);

  const auto eta_high = run_in("schedule", "eta = 0.1\n", dir);
  CHECK(eta_high.exit_code == exit_code::kAssertion);
  CHECK(slurp(dir / "schedule.txt").find("VIOLATION: stepsize cap") != std::string::npos);

  const auto rho_high = run_in("schedule", "rho = 0.5\n", dir);
  CHECK(rho_high.exit_code == exit_code::kAssertion);
  CHECK(slurp(dir / "schedule.txt").find("VIOLATION: initialization-size cap") != std::string::npos);

  CHECK_THROWS_AS(run_in("schedule", "singular_values = [1, 1, 0.1]\nr = 1\n", dir), GapAbsent);
  CHECK_THROWS_AS(run_in("schedule", "bogus = 1\n", dir), ConfigError);
  CHECK_THROWS_AS(run_in("schedule", "rho = 1e-3\nlog10_rho = -3\n", dir), ConfigError);
  CHECK_THROWS_AS(run_in("nope", "", dir), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("commands: sweeps write long and summary CSVs, independent of parallelism") {
  const fs::path d1 = scratch_dir("sweep1"), d2 = scratch_dir("sweep2");
  const std::string cfg = "dim = [12]\nrho = [1e-4, 1e-6, 1e-8]\nk = 5\niters = 80\ntrials = 2\n";
  const auto o1 = run_in("sweep-rho", cfg, d1, 1);
  const auto o2 = run_in("sweep-rho", cfg, d2, 3);
  CHECK(o1.exit_code == 0);
  CHECK(o1.summary == o2.summary);
  for (const char* f : {"sweep_rho.csv", "sweep_rho_summary.csv", "sweep_rho.svg"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(slurp(d1 / "sweep_rho.csv").find("dim,rho,delta,kappa,eta,trial,seed,t0,eps,final_train_error") !=
        std::string::npos);

  const fs::path d3 = scratch_dir("sweep3");
  const auto gap = run_in("sweep-gap", "dim = [12]\nk = 5\niters = 40\ntrials = 1\ndelta = [0.3, 0.6]\n", d3);
  CHECK(fs::exists(d3 / "sweep_gap_t0.svg"));
  CHECK_THROWS_AS(run_in("sweep-dim", "k = 2\n", d3), ConfigError);
  CHECK_THROWS_AS(run_in("sweep-dim", "dim = [12]\neta = [5.0]\nrho = [0.5]\niters = 200\ntrials = 1\n", d3),
                  NumericalFailure);
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("commands: overfit-demo and init-compare on small configs") {
  const fs::path dir = scratch_dir("overfit");
  const auto o = run_in("overfit-demo",
                        "m = 30\nn = 25\nk = 8\neta = 0.2\niters = 1500\nrecord_every = 10\ndiagnostics = true\n"
                        "noisy_k = 10\nnoisy_rank = 3\nnoisy_iters = 100\n",
                        dir);
  CHECK(o.exit_code == 0);
  const std::string csv = slurp(dir / "overfit_section.csv");
  CHECK(csv.find("iteration,train_error_fro,test_error_fro,test_error_op,sv_1,sv_2,sv_3,sv_4,uv_minus_sigma") !=
        std::string::npos);
  CHECK(fs::exists(dir / "overfit_noisy.csv"));
  CHECK(fs::exists(dir / "overfit_noisy.svg"));
  CHECK_THROWS_AS(run_in("overfit-demo", "variant = other\n", dir), ConfigError);

  const auto ic = run_in("init-compare", "m = 30\nn = 25\nk = 8\neta = 0.2\niters = 600\n", dir);
  CHECK(ic.exit_code == 0);
  CHECK(fs::exists(dir / "init_compare.csv"));
  fs::remove_all(dir);
}
