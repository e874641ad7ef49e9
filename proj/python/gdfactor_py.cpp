#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "gdfactor/csv.hpp"
#include "gdfactor/dynamics.hpp"
#include "gdfactor/error.hpp"
#include "gdfactor/experiments.hpp"
#include "gdfactor/linalg.hpp"
#include "gdfactor/psd_toy.hpp"
#include "gdfactor/schedule.hpp"

namespace py = pybind11;
using namespace gdfactor;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> data(a.data(), a.data() + rows * cols);
  return DenseMatrix(rows, cols, std::move(data));
}

Array to_array(const DenseMatrix& m) {
  Array out({m.rows(), m.cols()});
  if (m.size() > 0) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
  return out;
}

SpectralFrame frame_from(const Array& left, const std::vector<double>& sv, const Array& right) {
  return {to_matrix(left), sv, to_matrix(right)};
}

ScheduleInput schedule_input(std::vector<double> sv, std::size_t r, std::size_t m, std::size_t n, std::size_t k,
                             double c_rho, double delta_cap) {
  ScheduleInput in{std::move(sv), r, m, n, k, c_rho, delta_cap};
  in.validate();
  return in;
}

}  // namespace

PYBIND11_MODULE(_gdfactor, mod) {
  mod.doc() = "Gradient descent for overparametrized asymmetric matrix factorization";
  mod.attr("__version__") = std::string(kVersion);

  py::register_exception<InvalidArgument>(mod, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalFailure>(mod, "NumericalFailure", PyExc_ArithmeticError);

  mod.def(
      "gaussian_matrix",
      [](std::size_t rows, std::size_t cols, double variance, std::uint64_t seed) {
        RngStream rng(seed);
        return to_array(gaussian_matrix(rows, cols, variance, rng));
      },
      py::arg("rows"), py::arg("cols"), py::arg("variance"), py::arg("seed"));
  mod.def("operator_norm", [](const Array& m) { return operator_norm(to_matrix(m)); });
  mod.def("frobenius_norm", [](const Array& m) { return frobenius_norm(to_matrix(m)); });
  mod.def("svd", [](const Array& m) {
    const SpectralFrame f = svd(to_matrix(m));
    return py::make_tuple(to_array(f.left), f.singular_values, to_array(f.right));
  });
  mod.def("truncate_rank", [](const Array& m, std::size_t r) { return to_array(truncate_rank(svd(to_matrix(m)), r)); });
  mod.def(
      "synth_matrix",
      [](std::size_t m, std::size_t n, const std::vector<double>& sv, std::uint64_t seed) {
        RngStream rng(seed);
        auto [x, f] = synth_matrix(m, n, sv, rng);
        return py::make_tuple(to_array(x), to_array(f.left), f.singular_values, to_array(f.right));
      },
      py::arg("m"), py::arg("n"), py::arg("singular_values"), py::arg("seed"));

  mod.def(
      "init_factors",
      [](std::size_t m, std::size_t n, std::size_t k, double rho, double sigma1, std::uint64_t seed, bool symmetric) {
        GdConfig cfg;
        cfg.k = k;
        cfg.rho = rho;
        cfg.seed = seed;
        cfg.symmetric_init = symmetric;
        const FactorPair p = init_factors(m, n, cfg, sigma1);
        return py::make_tuple(to_array(p.F), to_array(p.G));
      },
      py::arg("m"), py::arg("n"), py::arg("k"), py::arg("rho"), py::arg("sigma1"), py::arg("seed") = 0,
      py::arg("symmetric") = false);
  mod.def(
      "gd_step",
      [](const Array& f, const Array& g, const Array& x, double eta) {
        const FactorPair next = gd_step({to_matrix(f), to_matrix(g)}, to_matrix(x), eta);
        return py::make_tuple(to_array(next.F), to_array(next.G));
      },
      py::arg("F"), py::arg("G"), py::arg("X"), py::arg("eta"));
  mod.def(
      "run",
      [](const Array& x, std::size_t r, double eta, double rho, std::size_t k, std::size_t max_iters,
         std::size_t record_every, std::uint64_t seed) {
        const DenseMatrix xm = to_matrix(x);
        const SpectralFrame frame = svd(xm);
        GdConfig cfg;
        cfg.eta = eta;
        cfg.rho = rho;
        cfg.k = k;
        cfg.max_iters = max_iters;
        cfg.record_every = record_every;
        cfg.seed = seed;
        const TrajectoryRecord rec = run(xm, frame, r, cfg);
        const EarlyStop best = select_early_stop(rec);
        py::dict out;
        out["iterations"] = rec.iterations;
        out["train_error_fro"] = rec.train_error_fro;
        out["test_error_fro"] = rec.test_error_fro;
        out["test_error_op"] = rec.test_error_op;
        out["leading_singulars"] = rec.leading_singulars;
        out["early_stop"] = py::make_tuple(best.iteration, best.error);
        out["F"] = to_array(rec.final_pair.F);
        out["G"] = to_array(rec.final_pair.G);
        return out;
      },
      py::arg("X"), py::arg("r"), py::arg("eta") = 0.05, py::arg("rho") = 1e-6, py::arg("k") = 10,
      py::arg("max_iters") = 1000, py::arg("record_every") = 1, py::arg("seed") = 0);

  mod.def(
      "signal_ratio",
      [](const Array& f, const Array& g, const Array& left, const std::vector<double>& sv, const Array& right,
         std::size_t r) -> py::object {
        const SignalRatio s = signal_ratio(to_matrix(f), to_matrix(g), frame_from(left, sv, right), r);
        if (s.infinite()) return py::float_(std::numeric_limits<double>::infinity());
        return py::float_(s.value);
      });

  mod.def(
      "relative_gap", [](const std::vector<double>& sv, std::size_t r, double cap) { return relative_gap(sv, r, cap); },
      py::arg("singular_values"), py::arg("r"), py::arg("delta_cap") = 1.0);
  mod.def(
      "schedule",
      [](std::vector<double> sv, std::size_t r, std::size_t m, std::size_t n, std::size_t k, double eta,
         double log10_rho, double c_rho, double delta_cap) {
        const ScheduleInput in = schedule_input(std::move(sv), r, m, n, k, c_rho, delta_cap);
        const GdSchedule s = iteration_counts_log10(in, eta, log10_rho);
        py::dict out;
        out["delta"] = s.delta;
        out["gamma"] = s.gamma;
        out["kappa_r"] = s.kappa_r;
        out["eta_max"] = s.eta_max;
        out["log10_rho_max"] = s.log10_rho_max;
        out["T1"] = s.T1;
        out["T2"] = s.T2;
        out["T3"] = s.T3;
        out["T0"] = s.T0;
        out["T"] = s.T;
        out["error_bound"] = s.error_bound;
        return out;
      },
      py::arg("singular_values"), py::arg("r"), py::arg("m"), py::arg("n"), py::arg("k"), py::arg("eta"),
      py::arg("log10_rho"), py::arg("c_rho") = 0.5, py::arg("delta_cap") = 0.9);
  mod.def(
      "stepsize_cap",
      [](std::vector<double> sv, std::size_t r, std::size_t m, std::size_t n, std::size_t k, double delta_cap) {
        return stepsize_cap(schedule_input(std::move(sv), r, m, n, k, 0.5, delta_cap));
      },
      py::arg("singular_values"), py::arg("r"), py::arg("m"), py::arg("n"), py::arg("k"), py::arg("delta_cap") = 0.9);
  mod.def(
      "rho_cap_log10",
      [](std::vector<double> sv, std::size_t r, std::size_t m, std::size_t n, std::size_t k, double c_rho,
         double delta_cap) { return rho_cap(schedule_input(std::move(sv), r, m, n, k, c_rho, delta_cap)).log10_value; },
      py::arg("singular_values"), py::arg("r"), py::arg("m"), py::arg("n"), py::arg("k"), py::arg("c_rho") = 0.5,
      py::arg("delta_cap") = 0.9);
  mod.def("psd_toy_stopping_time", &psd_toy_stopping_time, py::arg("lambda1"), py::arg("lambdar"), py::arg("rho"),
          py::arg("eta"));
  mod.def(
      "psd_toy",
      [](const std::vector<double>& lambdas, std::size_t r, double rho, double eta, double gap_ratio) {
        const PsdToyResult res = run_to_schedule(lambdas, r, rho, eta, gap_ratio);
        py::dict out;
        out["T"] = res.T;
        out["f"] = res.state.f;
        out["bound"] = res.bound;
        out["max_signal_error"] = res.max_signal_error;
        out["max_tail"] = res.max_tail;
        out["holds"] = res.holds();
        return out;
      },
      py::arg("lambdas"), py::arg("r"), py::arg("rho"), py::arg("eta"), py::arg("gap_ratio") = 0.1);
}
