// Python bindings for the core operations.
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsde/io.hpp"
#include "qsde/qgaussian.hpp"
#include "qsde/return_model.hpp"
#include "qsde/sde.hpp"
#include "qsde/spectrum.hpp"

namespace py = pybind11;
using namespace qsde;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_array(const py::array_t<double>& a) {
    const auto buf = a.request();
    const double* data = static_cast<const double*>(buf.ptr);
    return std::vector<double>(data, data + buf.size);
}

ReturnSeries make_series(const py::array_t<double>& values, double dt) {
    ReturnSeries s;
    s.values = from_array(values);
    s.dt = dt;
    return s;
}

}  // namespace

PYBIND11_MODULE(_qsde, m) {
    m.doc() = "Nonlinear SDE return model: q-Gaussian statistics, "
              "simulation, and spectral analysis";

    py::register_exception<DivergenceError>(m, "DivergenceError",
                                            PyExc_RuntimeError);

    py::class_<QGaussianParams>(m, "QGaussianParams")
        .def(py::init<double, double>(), py::arg("lambda_"), py::arg("r0"))
        .def_readonly("lambda_", &QGaussianParams::lambda)
        .def_readonly("r0", &QGaussianParams::r0)
        .def_property_readonly("q", &QGaussianParams::q)
        .def_property_readonly("sigma_q", &QGaussianParams::sigma_q);

    m.def("exp_q", &exp_q, py::arg("x"), py::arg("q"));
    m.def("qgaussian_pdf",
          [](py::array_t<double> x, const QGaussianParams& p) {
              const auto xs = from_array(x);
              std::vector<double> out(xs.size());
              for (std::size_t i = 0; i < xs.size(); ++i) {
                  out[i] = qgaussian_pdf(xs[i], p);
              }
              return to_array(out);
          },
          py::arg("x"), py::arg("params"));
    m.def("sample_qgaussian",
          [](const QGaussianParams& p, std::uint64_t seed, std::size_t n) {
              Rng rng(seed);
              return to_array(sample_qgaussian(p, rng, n));
          },
          py::arg("params"), py::arg("seed"), py::arg("n"));
    m.def("params_from_q", &params_from_q, py::arg("q"), py::arg("sigma_q"));
    m.def("params_to_q", &params_to_q, py::arg("params"));

    py::class_<SdeParams>(m, "SdeParams")
        .def(py::init([](double eta, double lambda, double epsilon,
                         double r0, double sigma) {
                 SdeParams p{eta, lambda, epsilon, r0, sigma};
                 p.validate();
                 return p;
             }),
             py::arg("eta") = 2.5, py::arg("lambda_") = 3.6,
             py::arg("epsilon") = 0.0, py::arg("r0") = 1.0,
             py::arg("sigma") = 1.0)
        .def_readwrite("eta", &SdeParams::eta)
        .def_readwrite("lambda_", &SdeParams::lambda)
        .def_readwrite("epsilon", &SdeParams::epsilon)
        .def_readwrite("r0", &SdeParams::r0)
        .def_readwrite("sigma", &SdeParams::sigma)
        .def("spectrum_regime", &SdeParams::spectrum_regime);

    m.def("drift", &drift, py::arg("x"), py::arg("params"));
    m.def("diffusion", &diffusion, py::arg("x"), py::arg("params"));

    m.def("simulate",
          [](const SdeParams& p, double kappa, std::uint64_t burn_in,
             double x_init, std::uint64_t seed, double t_end,
             std::uint64_t max_steps, double reflect_bound) {
              SolverConfig cfg{kappa,     burn_in,   x_init,
                               seed,      t_end,     max_steps,
                               reflect_bound};
              const Trajectory traj = simulate(p, cfg);
              return py::make_tuple(to_array(traj.times),
                                    to_array(traj.values));
          },
          py::arg("params"), py::arg("kappa") = 0.01,
          py::arg("burn_in") = 1'000'000, py::arg("x_init") = 0.0,
          py::arg("seed") = 0, py::arg("t_end") = 0.0,
          py::arg("max_steps") = 0, py::arg("reflect_bound") = 0.0,
          "Simulate the SDE; returns (times, values) in scaled units.");

    m.def("simulate_windows",
          [](const SdeParams& p, double tau, std::size_t n_windows,
             double kappa, std::uint64_t burn_in, std::uint64_t seed) {
              SolverConfig cfg;
              cfg.kappa = kappa;
              cfg.burn_in = burn_in;
              cfg.seed = seed;
              cfg.max_steps = 0;
              return to_array(
                  simulate_windows(p, cfg, tau, n_windows).values);
          },
          py::arg("params"), py::arg("tau"), py::arg("n_windows"),
          py::arg("kappa") = 0.01, py::arg("burn_in") = 1'000'000,
          py::arg("seed") = 0);

    m.def("integrate_window",
          [](py::array_t<double> times, py::array_t<double> values,
             double tau) {
              Trajectory traj;
              traj.times = from_array(times);
              traj.values = from_array(values);
              return to_array(integrate_window(traj, tau).values);
          },
          py::arg("times"), py::arg("values"), py::arg("tau"));

    m.def("estimate_psd",
          [](py::array_t<double> values, double dt, std::size_t n_segments,
             const std::string& taper) {
              const auto est = estimate_psd(
                  make_series(values, dt), n_segments,
                  taper == "rectangular" ? Taper::Rectangular : Taper::Hann);
              return py::make_tuple(to_array(est.freqs), to_array(est.power));
          },
          py::arg("values"), py::arg("dt") = 1.0, py::arg("n_segments") = 32,
          py::arg("taper") = "hann");

    m.def("fit_power_law",
          [](py::array_t<double> freqs, py::array_t<double> power,
             double f_lo, double f_hi, std::size_t bins_per_decade) {
              SpectrumEstimate spec;
              spec.freqs = from_array(freqs);
              spec.power = from_array(power);
              const auto fit =
                  fit_power_law(spec, f_lo, f_hi, bins_per_decade);
              return py::make_tuple(fit.exponent, fit.amplitude,
                                    fit.residual);
          },
          py::arg("freqs"), py::arg("power"), py::arg("f_lo"),
          py::arg("f_hi"), py::arg("bins_per_decade") = 20,
          "Returns (exponent, amplitude, rms_log10_residual).");

    m.def("theoretical_spectrum",
          [](const SdeParams& p, double f) {
              return theoretical_spectrum(p, f);
          },
          py::arg("params"), py::arg("f"));

    m.def("estimate_pdf",
          [](py::array_t<double> values, std::size_t n_bins, bool log_bins,
             bool absolute, double lo, double hi) {
              PdfBinning binning{n_bins, log_bins, absolute, lo, hi};
              ReturnSeries s;
              s.values = from_array(values);
              const auto pdf = estimate_pdf(s, binning);
              std::vector<double> centers, densities;
              for (const auto& p : pdf) {
                  centers.push_back(p.center);
                  densities.push_back(p.density);
              }
              return py::make_tuple(to_array(centers), to_array(densities));
          },
          py::arg("values"), py::arg("n_bins") = 50,
          py::arg("log_bins") = false, py::arg("absolute") = false,
          py::arg("lo") = 0.0, py::arg("hi") = 0.0);

    m.def("moving_average",
          [](py::array_t<double> values, std::size_t n) {
              ReturnSeries s;
              s.values = from_array(values);
              return to_array(moving_average(s, n).values);
          },
          py::arg("values"), py::arg("n"));

    m.def("correlate",
          [](py::array_t<double> a, py::array_t<double> b) {
              ReturnSeries sa, sb;
              sa.values = from_array(a);
              sb.values = from_array(b);
              return correlate(sa, sb);
          },
          py::arg("a"), py::arg("b"));

    m.def("tail_exponent_hill",
          [](py::array_t<double> values, double top_fraction) {
              const auto v = from_array(values);
              return tail_exponent_hill(v, top_fraction);
          },
          py::arg("values"), py::arg("top_fraction") = 0.001);

    py::class_<ReturnModelParams>(m, "ReturnModelParams")
        .def(py::init(&ReturnModelParams::preset_defaults))
        .def_static("preset_defaults", &ReturnModelParams::preset_defaults)
        .def_readwrite("sde", &ReturnModelParams::sde)
        .def_readwrite("lambda2", &ReturnModelParams::lambda2)
        .def_readwrite("r0_bar", &ReturnModelParams::r0_bar)
        .def_readwrite("tau", &ReturnModelParams::tau)
        .def_readwrite("ma_window", &ReturnModelParams::ma_window)
        .def_property(
            "modulation",
            [](const ReturnModelParams& p) {
                return py::make_tuple(p.modulation.intercept,
                                      p.modulation.slope);
            },
            [](ReturnModelParams& p, py::tuple t) {
                p.modulation.intercept = t[0].cast<double>();
                p.modulation.slope = t[1].cast<double>();
            })
        .def_property(
            "burn_in",
            [](const ReturnModelParams& p) { return p.solver.burn_in; },
            [](ReturnModelParams& p, std::uint64_t v) {
                p.solver.burn_in = v;
            });

    m.def("modulation_scale", &modulation_scale, py::arg("ma_value"),
          py::arg("params"));

    m.def("generate_returns",
          [](const ReturnModelParams& params, std::size_t n_minutes,
             std::uint64_t seed) {
              const auto gen =
                  generate_returns_with_modulator(params, n_minutes, seed);
              return py::make_tuple(to_array(gen.returns.values),
                                    to_array(gen.modulator));
          },
          py::arg("params"), py::arg("n_minutes"), py::arg("seed") = 0,
          "Returns (minute_returns, modulator).");

    m.def("normalize_returns",
          [](py::array_t<double> values) {
              ReturnSeries s;
              s.values = from_array(values);
              return to_array(normalize_returns(s).values);
          },
          py::arg("values"));

    m.def("decompose_empirical",
          [](py::array_t<double> values, std::size_t ma_window,
             double lambda2, std::size_t n_bins) {
              ReturnSeries s;
              s.values = from_array(values);
              const auto result =
                  decompose_empirical(s, ma_window, lambda2, n_bins);
              std::vector<double> ma, r0;
              std::vector<std::size_t> counts;
              for (const auto& bin : result.bins) {
                  ma.push_back(bin.ma_center);
                  r0.push_back(bin.r0_fit);
                  counts.push_back(bin.count);
              }
              return py::make_tuple(to_array(ma), to_array(r0), counts,
                                    py::make_tuple(result.fitted.intercept,
                                                   result.fitted.slope));
          },
          py::arg("values"), py::arg("ma_window") = 60,
          py::arg("lambda2") = 5.0, py::arg("n_bins") = 20,
          "Returns (ma_centers, r0_fits, counts, (intercept, slope)).");

    m.def("aggregate_ticks",
          [](py::array_t<double> timestamps, py::array_t<double> prices,
             double bar_seconds) {
              const auto ts = from_array(timestamps);
              const auto ps = from_array(prices);
              if (ts.size() != ps.size()) {
                  throw std::invalid_argument(
                      "timestamps and prices must have equal length");
              }
              std::vector<Tick> ticks(ts.size());
              for (std::size_t i = 0; i < ts.size(); ++i) {
                  ticks[i] = {ts[i], ps[i]};
              }
              const auto bars = aggregate_ticks(ticks, bar_seconds);
              return py::make_tuple(to_array(bars.values),
                                    to_array(bars.counts));
          },
          py::arg("timestamps"), py::arg("prices"),
          py::arg("bar_seconds") = 60.0,
          "Returns (bar_returns, trade_counts).");

    m.attr("__version__") = "1.0.0";
}
