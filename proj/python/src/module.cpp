#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tbent/config.hpp"
#include "tbent/counts_io.hpp"
#include "tbent/errors.hpp"
#include "tbent/experiment.hpp"
#include "tbent/noise_model.hpp"
#include "tbent/optics.hpp"
#include "tbent/phasematch.hpp"
#include "tbent/spdc_source.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace tbent;

namespace {

ExperimentConfig parse(const std::string& config_json) {
  ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
  c.validate();
  return c;
}

analysis::FringeOrder order_of(int photons) {
  if (photons == 2) return analysis::FringeOrder::twofold;
  if (photons == 4) return analysis::FringeOrder::fourfold;
  throw ConfigError("fringe order must be 2 or 4");
}

analysis::TomographyScheme scheme_of(const std::string& name) {
  if (name == "pauli") return analysis::TomographyScheme::pauli_bases;
  if (name == "full") return analysis::TomographyScheme::projectors;
  throw ConfigError("scheme must be pauli or full");
}

phasematch::Dispersion load_tables(const std::vector<std::string>& files) {
  phasematch::Dispersion d;
  for (const auto& f : files) d.add(phasematch::DispersionTable::load_csv(f));
  return d;
}

py::dict fit_dict(const analysis::FringeFit& f) {
  py::dict d;
  d["visibility"] = f.visibility;
  d["visibility_sigma"] = f.visibility_sigma;
  d["r_squared"] = f.r_squared;
  d["amplitude"] = f.amplitude;
  d["offset"] = f.offset;
  d["phase"] = f.phase;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-bin entanglement source simulator";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());

  m.def("default_config", [] { return config_to_json(ExperimentConfig{}).dump(); });
  m.def("load_config", [](const std::string& path) { return config_to_json(load_config(path)).dump(); },
        py::arg("path"));
  m.def("normalize_config", [](const std::string& config_json) { return config_to_json(parse(config_json)).dump(); },
        "Parse, validate and re-emit a config with every field filled.", py::arg("config_json"));

  m.def("dof_convert",
        [](double phi_p, double phi_s, double phi_i) {
          const auto out = optics::dof_convert(source::ideal_pair_state(phi_p), phi_s, phi_i);
          return py::make_tuple(Eigen::VectorXcd(polarization_ket(out.state)), out.success_probability);
        },
        "Post-selected polarization ket (HH, HV, VH, VV) and success probability.", py::arg("phi_p"),
        py::arg("phi_s"), py::arg("phi_i"));

  m.def("run_experiment",
        [](const std::string& config_json, std::uint64_t pulses, int threads, std::uint64_t stream_id) {
          const auto c = parse(config_json);
          detection::CountsRecord rec;
          {
            py::gil_scoped_release release;
            rec = detection::run_experiment(c.source, c.optics, c.losses, c.detectors,
                                            detection::RunOptions{pulses, threads, stream_id});
          }
          return detection::counts_to_json(rec).dump();
        },
        py::arg("config_json"), py::arg("pulses"), py::arg("threads") = 1, py::arg("stream_id") = 0);

  m.def("expected_rates",
        [](const std::string& config_json) {
          const auto c = parse(config_json);
          const auto e = detection::expected_rates(c.source, c.optics, c.losses, c.detectors);
          py::dict d;
          d["singles"] = e.singles;
          d["twofold_zero"] = e.twofold_zero;
          d["twofold_delayed"] = e.twofold_delayed;
          d["fourfold"] = e.fourfold;
          d["rep_rate"] = e.rep_rate;
          return d;
        },
        "Per-pulse event probabilities.", py::arg("config_json"));

  m.def("fourfold_rate_oracle",
        [](const std::string& config_json) {
          const auto c = parse(config_json);
          return detection::fourfold_rate_oracle(c.source, c.losses);
        },
        py::arg("config_json"));

  m.def("simulate_fringe",
        [](const std::string& config_json, int order, const std::string& basis, int points, std::uint64_t pulses,
           int threads) {
          const auto c = parse(config_json);
          const auto b = experiment::fringe_basis_from_string(basis);
          experiment::FringeRun run;
          {
            py::gil_scoped_release release;
            run = experiment::simulate_fringe(c, order_of(order), b, points, pulses, threads);
          }
          return py::make_tuple(run.scan.theta_s, run.scan.theta_i, run.scan.values);
        },
        "Returns (theta_s, theta_i, counts).", py::arg("config_json"), py::arg("order") = 4,
        py::arg("basis") = "pm", py::arg("points") = 37, py::arg("pulses") = 100000, py::arg("threads") = 1);

  m.def("fit_fringe",
        [](std::vector<double> theta_i, std::vector<double> values, int order, int bootstrap, std::uint64_t seed) {
          analysis::FringeScan scan;
          scan.theta_i = std::move(theta_i);
          scan.values = std::move(values);
          scan.order = order_of(order);
          return fit_dict(analysis::fit_fringe_bootstrap(scan, bootstrap, seed));
        },
        py::arg("theta_i"), py::arg("values"), py::arg("order") = 4, py::arg("bootstrap") = 0, py::arg("seed") = 1);

  m.def("run_tomography",
        [](const std::string& config_json, int qubits, std::uint64_t pulses, const std::string& scheme,
           int bootstrap, int threads) {
          const auto c = parse(config_json);
          experiment::TomographyRun run;
          analysis::FidelityReport rep;
          analysis::NoiseBreakdown nb;
          {
            py::gil_scoped_release release;
            run = experiment::simulate_tomography(c, qubits, scheme_of(scheme), pulses, threads);
            nb = analysis::noise_breakdown(c.source, c.optics, c.losses, c.detectors);
            rep = analysis::tomography_report(run.input, analysis::ideal_target(qubits, nb.phase), bootstrap,
                                              c.source.seed, threads);
          }
          py::dict d;
          d["fidelity"] = rep.fidelity;
          d["fidelity_sigma"] = rep.sigma;
          d["total_counts"] = run.total_counts;
          d["rho"] = Eigen::MatrixXcd(rep.rho.matrix());
          return d;
        },
        py::arg("config_json"), py::arg("qubits") = 2, py::arg("pulses") = 100000, py::arg("scheme") = "pauli",
        py::arg("bootstrap") = 0, py::arg("threads") = 1);

  m.def("reconstruct_exact",
        [](const Eigen::MatrixXcd& rho, int qubits, const std::string& scheme) {
          auto in = analysis::make_tomography_input(qubits, analysis::tomography_settings(qubits, scheme_of(scheme)));
          analysis::fill_expected_counts(in, DensityMatrix::from_matrix(rho), 1e6);
          return Eigen::MatrixXcd(analysis::tomography_mle(in).rho.matrix());
        },
        "MLE from exact expected counts of rho.", py::arg("rho"), py::arg("qubits") = 2,
        py::arg("scheme") = "full");

  m.def("predicted_state",
        [](const std::string& config_json, int qubits) {
          const auto c = parse(config_json);
          return Eigen::MatrixXcd(
              analysis::predict_state_under_noise(c.source, c.optics, c.losses, c.detectors, qubits).matrix());
        },
        py::arg("config_json"), py::arg("qubits") = 2);

  m.def("ideal_target", [](int qubits, double phase) { return analysis::ideal_target(qubits, phase); },
        py::arg("qubits") = 2, py::arg("phase") = 0.0);
  m.def("werner_state", [](double v, double phase) { return Eigen::MatrixXcd(analysis::werner_state(v, phase).matrix()); },
        py::arg("v"), py::arg("phase") = 0.0);
  m.def("fidelity",
        [](const Eigen::MatrixXcd& rho, const Eigen::VectorXcd& target) {
          return fidelity(DensityMatrix::from_matrix(rho), target);
        },
        py::arg("rho"), py::arg("target"));

  m.def("qpm_period_from_indices", &phasematch::qpm_period_from_indices, py::arg("pump_nm"), py::arg("n_pump"),
        py::arg("n_degenerate"));
  m.def("pm_intensity", &phasematch::pm_intensity, py::arg("delta_beta"), py::arg("length_mm"));
  m.def("bandwidths",
        [](const std::vector<std::string>& tables, double pump_nm, double length_mm, double duty) {
          const auto d = load_tables(tables);
          phasematch::PolingSpec p;
          p.period_um = phasematch::qpm_period(d, pump_nm);
          p.length_mm = length_mm;
          p.duty_cycle = duty;
          py::dict out;
          out["period_um"] = p.period_um;
          out["first_zero_thz"] = phasematch::bandwidth(d, p, pump_nm, phasematch::BandwidthCriterion::first_zero);
          out["half_max_thz"] = phasematch::bandwidth(d, p, pump_nm, phasematch::BandwidthCriterion::half_max);
          return out;
        },
        py::arg("tables"), py::arg("pump_nm") = 775.0, py::arg("length_mm") = 12.0, py::arg("duty") = 0.68);
  m.def("shg_efficiency_theory",
        [](double length_mm, double duty, double a_eff_um2) {
          phasematch::ShgParams s;
          s.a_eff_um2 = a_eff_um2;
          phasematch::PolingSpec p;
          p.length_mm = length_mm;
          p.duty_cycle = duty;
          return phasematch::shg_efficiency_theory(s, p);
        },
        "Normalized SHG efficiency in %/W.", py::arg("length_mm") = 12.0, py::arg("duty") = 0.68,
        py::arg("a_eff_um2") = 14.9);
}
