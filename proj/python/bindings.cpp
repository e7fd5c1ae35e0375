#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dynetrack/analytics.hpp"
#include "dynetrack/control.hpp"
#include "dynetrack/detection.hpp"
#include "dynetrack/estimation.hpp"
#include "dynetrack/harness.hpp"

namespace py = pybind11;
using namespace dynetrack;

namespace {

NoiseModel make_noise(std::optional<double> s, std::optional<double> s_a) {
  if (!s) return NoiseModel::coherent();
  return s_a ? NoiseModel::squeezed(*s, *s_a) : NoiseModel::squeezed(*s);
}

py::dict to_dict(const MseResult& r, double analytic) {
  py::dict d;
  d["mse"] = r.mse;
  d["stderr"] = r.std_error;
  d["n_samples"] = r.n_samples;
  d["n_trajectories"] = r.n_trajectories;
  d["slip_count"] = r.slip_count;
  d["dt"] = r.config.dt;
  d["analytic"] = analytic;
  return d;
}

SimConfig base(std::uint64_t n_traj, std::uint64_t seed, double kappa) {
  SimConfig c;
  c.kappa = kappa;
  c.n_traj = n_traj;
  c.seed = seed;
  return c;
}

MseResult run(const PointSetup& p, unsigned threads) {
  RunOptions o;
  o.threads = threads;
  py::gil_scoped_release release;
  return simulate_mse(p.config, p.controller, p.noise, o);
}

}  // namespace

PYBIND11_MODULE(_dynetrack, m) {
  m.doc() = "Adaptive phase tracking: closed forms and Monte Carlo ensembles";

  m.def("mse_adaptive_coherent", &mse_adaptive_coherent, py::arg("N"));
  m.def("mse_heterodyne", &mse_heterodyne, py::arg("N"));
  m.def("mse_vs_gain", &mse_vs_gain, py::arg("chi"), py::arg("kappa"), py::arg("alpha"));
  m.def("gain_mismatch_threshold", &gain_mismatch_threshold);
  m.def(
      "mse_adaptive_squeezed",
      [](double s, double n) {
        const auto r = mse_adaptive_squeezed(s, n);
        return py::make_tuple(r.mse, r.moderate);
      },
      py::arg("S"), py::arg("N"), "(mse, moderate) for gain kappa/sigma^2");
  m.def("photons_per_coherence_time", &photons_per_coherence_time, py::arg("P"),
        py::arg("omega"), py::arg("kappa"));
  m.def("optimal_gain", &optimal_gain, py::arg("kappa"), py::arg("alpha"));
  m.def(
      "noise_power",
      [](double theta, std::optional<double> s, std::optional<double> s_a) {
        const NoiseModel model = make_noise(s, s_a);
        validate(model);
        return noise_power(theta, model);
      },
      py::arg("theta"), py::arg("S") = py::none(), py::arg("S_a") = py::none());
  m.def("riccati_step", &riccati_step, py::arg("sigma2"), py::arg("kappa"), py::arg("alpha"),
        py::arg("dt"));
  m.def(
      "filter_update",
      [](double phi_hat, double sigma2, double I_window, double delta_t, double kappa,
         double alpha) {
        const FilterState s = filter_update(FilterState{phi_hat, sigma2}, I_window, delta_t,
                                            kappa, alpha);
        return py::make_tuple(s.phi_hat, s.sigma2);
      },
      py::arg("phi_hat"), py::arg("sigma2"), py::arg("I_window"), py::arg("delta_t"),
      py::arg("kappa"), py::arg("alpha"));
  m.def(
      "fit_power_law",
      [](const std::vector<std::pair<double, double>>& points) {
        const PowerLawFit f = fit_power_law(points);
        py::dict d;
        d["exponent"] = f.exponent;
        d["constant"] = f.constant;
        d["residual"] = f.residual;
        d["exponent_stderr"] = f.exponent_stderr;
        return d;
      },
      py::arg("points"));
  m.def(
      "simulate_adaptive",
      [](double n, double gain_ratio, std::uint64_t n_traj, std::uint64_t seed, double kappa,
         std::optional<double> s, std::optional<double> s_a, unsigned threads) {
        const NoiseModel noise = make_noise(s, s_a);
        const double alpha = amplitude_for(n, kappa);
        const bool coherent = noise.kind == LightKind::kCoherent;
        const double chi = gain_ratio * (coherent ? optimal_gain(kappa, alpha)
                                                  : squeezed_gain(kappa, alpha, noise.s));
        const PointSetup p = adaptive_point(n, chi, noise, base(n_traj, seed, kappa));
        const double analytic = coherent ? mse_vs_gain(chi, kappa, alpha)
                                         : mse_adaptive_squeezed(noise.s, n).mse;
        return to_dict(run(p, threads), analytic);
      },
      py::arg("N"), py::arg("gain_ratio") = 1.0, py::arg("n_traj") = 200, py::arg("seed") = 1,
      py::arg("kappa") = 1.0, py::arg("S") = py::none(), py::arg("S_a") = py::none(),
      py::arg("threads") = 0);
  m.def(
      "simulate_heterodyne",
      [](double n, std::uint64_t n_traj, std::uint64_t seed, double kappa, unsigned threads) {
        const PointSetup p = heterodyne_point(n, NoiseModel::coherent(), base(n_traj, seed, kappa));
        return to_dict(run(p, threads), mse_heterodyne(n));
      },
      py::arg("N"), py::arg("n_traj") = 200, py::arg("seed") = 1, py::arg("kappa") = 1.0,
      py::arg("threads") = 0);
  m.def("sql_table_csv", [] {
    std::ostringstream out;
    write_sql_table_csv(out);
    return out.str();
  });
}
