#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "ridgebounds/bounds.hpp"
#include "ridgebounds/errors.hpp"
#include "ridgebounds/estimator.hpp"
#include "ridgebounds/experiments.hpp"
#include "ridgebounds/io.hpp"
#include "ridgebounds/verify.hpp"

namespace py = pybind11;
using namespace ridgebounds;

namespace {

SpectrumModel model_from_kwargs(const std::string& model, py::kwargs kwargs) {
  if (model == "explicit") {
    return ExplicitModel{kwargs["values"].cast<std::vector<double>>()};
  }
  if (model == "exponential") {
    return ExponentialModel{kwargs["gamma"].cast<double>()};
  }
  if (model == "spiked") {
    return SpikedModel{kwargs["k_spikes"].cast<int>(),
                       kwargs["lambda_top"].cast<double>(),
                       kwargs["lambda_tail"].cast<double>()};
  }
  throw ValidationError("unknown spectrum model: " + model);
}

py::dict audit_to_dict(const AuditReport& report) {
  py::dict out;
  for (const auto& stat : report.stats) {
    py::dict s;
    s["samples"] = stat.samples;
    s["scale"] = stat.scale;
    s["mean"] = stat.mean;
    s["hit_fraction"] = stat.hit_fraction;
    for (const auto& [name, value] : stat.quantiles) s[name.c_str()] = value;
    out[stat.name.c_str()] = s;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_ridgebounds, m) {
  m.doc() = "ridge regression bound evaluation on arbitrary covariance spectra";
  m.attr("__version__") = io::kToolVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  static py::exception<NotPositiveDefinite> not_pd(m, "NotPositiveDefiniteError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NotPositiveDefinite& e) {
      py::set_error(not_pd, e.what());
    }
  });

  py::class_<Spectrum>(m, "Spectrum")
      .def_property_readonly("eigenvalues", &Spectrum::eigenvalues)
      .def_property_readonly("p", &Spectrum::dim)
      .def_property_readonly("model_tag", &Spectrum::model_tag)
      .def("tail_sum", &Spectrum::tail_sum, py::arg("k"))
      .def("tail_sq_sum", &Spectrum::tail_sq_sum, py::arg("k"))
      .def("__len__", &Spectrum::dim)
      .def("__getitem__", [](const Spectrum& s, int i) {
        if (i < 0 || i >= s.dim()) throw py::index_error();
        return s[i];
      });

  m.def(
      "build_spectrum",
      [](const std::string& model, int p, py::kwargs kwargs) {
        return build_spectrum(model_from_kwargs(model, kwargs), p);
      },
      py::arg("model"), py::arg("p"));

  py::class_<EffectiveRanks>(m, "EffectiveRanks")
      .def_readonly("k", &EffectiveRanks::k)
      .def_readonly("rho_k", &EffectiveRanks::rho_k)
      .def_readonly("big_R_k", &EffectiveRanks::big_R_k)
      .def_readonly("tail_sum", &EffectiveRanks::tail_sum)
      .def_readonly("tail_sq_sum", &EffectiveRanks::tail_sq_sum);

  m.def("effective_ranks", &effective_ranks, py::arg("spectrum"), py::arg("lam"),
        py::arg("n"), py::arg("k"));
  m.def("select_k_star", &select_k_star, py::arg("spectrum"), py::arg("lam"),
        py::arg("n"), py::arg("b") = 2.0);

  py::class_<MatchedBounds>(m, "MatchedBounds")
      .def_readonly("B_under", &MatchedBounds::B_under)
      .def_readonly("B_over", &MatchedBounds::B_over)
      .def_readonly("V_under", &MatchedBounds::V_under)
      .def_readonly("V_over", &MatchedBounds::V_over);

  m.def(
      "matched_bounds",
      [](const Spectrum& spec, const std::vector<double>& theta, int n, double lam,
         int k) { return matched_bounds(spec, SignalSpec{theta}, n, lam, k); },
      py::arg("spectrum"), py::arg("theta"), py::arg("n"), py::arg("lam"),
      py::arg("k"));

  py::class_<RatioCaps>(m, "RatioCaps")
      .def_readonly("B_cap", &RatioCaps::B_cap)
      .def_readonly("V_cap", &RatioCaps::V_cap);

  m.def("ratio_caps_interval", &ratio_caps_interval, py::arg("rho_k"), py::arg("a"),
        py::arg("b"));
  m.def("ratio_caps_kstar", &ratio_caps_kstar, py::arg("rho_k"), py::arg("b"),
        py::arg("n"));

  m.def(
      "upper_bounds_conditioned",
      [](const Spectrum& spec, const std::vector<double>& theta, int n, double lam,
         int k, double L, double t, double sigma_eps, double calibration_c) {
        const auto ub = upper_bounds_conditioned(spec, SignalSpec{theta}, n, lam, k,
                                                 L, t, sigma_eps, calibration_c);
        return py::make_tuple(ub.bias, ub.variance);
      },
      py::arg("spectrum"), py::arg("theta"), py::arg("n"), py::arg("lam"),
      py::arg("k"), py::arg("L") = 1.0, py::arg("t") = 1.0,
      py::arg("sigma_eps") = 1.0, py::arg("calibration_c") = 1.0);

  m.def(
      "upper_bounds_general",
      [](const Spectrum& spec, const std::vector<double>& theta, int n, double lam,
         int k, double mu1_Ainv, double mun_Ainv, double t, double sigma_eps,
         double calibration_c) {
        const auto ub = upper_bounds_general(spec, SignalSpec{theta}, n, lam, k,
                                             mu1_Ainv, mun_Ainv, t, sigma_eps,
                                             calibration_c);
        return py::make_tuple(ub.bias, ub.variance);
      },
      py::arg("spectrum"), py::arg("theta"), py::arg("n"), py::arg("lam"),
      py::arg("k"), py::arg("mu1_Ainv"), py::arg("mun_Ainv"), py::arg("t") = 1.0,
      py::arg("sigma_eps") = 1.0, py::arg("calibration_c") = 1.0);

  m.def("lower_bound_variance", &lower_bound_variance, py::arg("spectrum"),
        py::arg("n"), py::arg("lam"), py::arg("k"), py::arg("sigma_x") = 1.0,
        py::arg("calibration_c") = 1.0);
  m.def("lower_bound_bias", &lower_bound_bias, py::arg("spectrum"),
        py::arg("theta_bar"), py::arg("lam"), py::arg("n"), py::arg("k"),
        py::arg("L") = 1.0);

  m.def(
      "componentwise_bounds",
      [](const Spectrum& spec, const std::vector<double>& theta, int n, double lam,
         int k) {
        const auto cw = componentwise_bounds(spec, SignalSpec{theta}, n, lam, k);
        return py::make_tuple(cw.bias, cw.variance);
      },
      py::arg("spectrum"), py::arg("theta"), py::arg("n"), py::arg("lam"),
      py::arg("k"));

  m.def(
      "sample_design",
      [](const std::string& family, const Spectrum& spec, int n, std::uint64_t seed) {
        return sample_design(design_family_from_string(family), spec, n, seed);
      },
      py::arg("family"), py::arg("spectrum"), py::arg("n"), py::arg("seed"));

  py::class_<RidgeSolution>(m, "RidgeSolution")
      .def_readonly("theta_hat", &RidgeSolution::theta_hat)
      .def_readonly("dual_weights", &RidgeSolution::dual_weights)
      .def_readonly("lam", &RidgeSolution::lambda)
      .def_readonly("pd_margin", &RidgeSolution::pd_margin);

  m.def("ridge_fit_dual", &ridge_fit_dual, py::arg("X"), py::arg("y"), py::arg("lam"),
        py::arg("pd_tolerance") = kDefaultPdTolerance);
  m.def("ridge_fit_primal_oracle", &ridge_fit_primal_oracle, py::arg("X"),
        py::arg("y"), py::arg("lam"));
  m.def(
      "exact_bias",
      [](const Eigen::MatrixXd& X, const Spectrum& spec,
         const std::vector<double>& theta, double lam) {
        return exact_bias(X, spec, SignalSpec{theta}, lam);
      },
      py::arg("X"), py::arg("spectrum"), py::arg("theta"), py::arg("lam"));
  m.def("exact_variance", &exact_variance, py::arg("X"), py::arg("spectrum"),
        py::arg("lam"), py::arg("sigma_eps") = 1.0,
        py::arg("pd_tolerance") = kDefaultPdTolerance);
  m.def("realized_variance", &realized_variance, py::arg("X"), py::arg("spectrum"),
        py::arg("lam"), py::arg("eps"), py::arg("pd_tolerance") = kDefaultPdTolerance);
  m.def("identity_residual", &identity_residual, py::arg("X"), py::arg("y"),
        py::arg("lam"), py::arg("k"), py::arg("pd_tolerance") = kDefaultPdTolerance);

  py::class_<EigDiagnostics>(m, "EigDiagnostics")
      .def_readonly("mu_max_Ak", &EigDiagnostics::mu_max_Ak)
      .def_readonly("mu_min_Ak", &EigDiagnostics::mu_min_Ak)
      .def_readonly("cond_Ak", &EigDiagnostics::cond_Ak)
      .def_readonly("pd", &EigDiagnostics::pd)
      .def_readonly("k", &EigDiagnostics::k);

  m.def("eig_diagnostics", &eig_diagnostics, py::arg("X"), py::arg("lam"),
        py::arg("k"));
  m.def("eig_min_loo", &eig_min_loo, py::arg("X"), py::arg("lam"), py::arg("j"));

  m.def(
      "run_sweep_json",
      [](const std::string& config_json, int threads) {
        const ExperimentConfig config =
            io::config_from_json(nlohmann::json::parse(config_json));
        const SweepResult sweep = run_sweep(config, threads);
        return py::make_tuple(io::sweep_csv(sweep),
                              io::sweep_summary_json(sweep, config).dump());
      },
      py::arg("config_json"), py::arg("threads") = 0,
      "Run a sweep from a JSON config string; returns (csv, summary_json).");

  m.def(
      "preset_exponential_decay_json",
      [](double gamma, int n, int replicates) {
        return io::config_to_json(preset_exponential_decay(gamma, n, replicates))
            .dump();
      },
      py::arg("gamma"), py::arg("n"), py::arg("replicates") = 100);
  m.def(
      "preset_spiked_negative_json",
      [](int k_spikes, int p, double lambda_top, double lambda_tail, int n, double snr,
         int replicates) {
        return io::config_to_json(preset_spiked_negative(k_spikes, p, lambda_top,
                                                           lambda_tail, n, snr,
                                                           replicates))
            .dump();
      },
      py::arg("k_spikes"), py::arg("p"), py::arg("lambda_top"),
      py::arg("lambda_tail"), py::arg("n"), py::arg("snr"),
      py::arg("replicates") = 100);

  m.def(
      "concentration_audit",
      [](const Spectrum& spec, const std::string& family, int n, int k, double lam,
         int samples, std::uint64_t seed) {
        return audit_to_dict(concentration_audit(
            spec, design_family_from_string(family), n, k, lam, samples, seed));
      },
      py::arg("spectrum"), py::arg("family"), py::arg("n"), py::arg("k"),
      py::arg("lam"), py::arg("samples"), py::arg("seed"));

  m.def(
      "run_verify_suite",
      [](const std::string& suite, std::uint64_t seed, int samples) {
        return verify::to_json(verify::run_suite(suite, seed, samples)).dump();
      },
      py::arg("suite"), py::arg("seed") = 7, py::arg("samples") = 0);
}
