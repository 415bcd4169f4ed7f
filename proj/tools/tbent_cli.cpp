// tbent: batch front end for the time-bin entanglement simulator.

#include "tbent/config.hpp"
#include "tbent/counts_io.hpp"
#include "tbent/errors.hpp"
#include "tbent/experiment.hpp"
#include "tbent/fringe.hpp"
#include "tbent/noise_model.hpp"
#include "tbent/optics.hpp"
#include "tbent/phasematch.hpp"
#include "tbent/spdc_source.hpp"
#include "tbent/state_json.hpp"
#include "tbent/tomography.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace tbent;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kRange = 4 };

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
  c.out = default_out;
  cmd->add_option("-c,--config", c.config, "experiment config (JSON)");
  cmd->add_option("-o,--out", c.out, "output prefix; writes PREFIX.csv and PREFIX.json")->capture_default_str();
  cmd->add_option("--seed", c.seed, "master seed, overrides TBENT_SEED and the config");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (const char* env = std::getenv("TBENT_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const unsigned long long v = std::stoull(text, &used, 0);
      if (used != text.size()) throw std::invalid_argument(text);
      cfg.source.seed = v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("TBENT_SEED is not an unsigned integer: ") + env);
    }
  }
  if (c.seed) cfg.source.seed = *c.seed;
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
  if (!f) throw ConfigError("write failed for " + path);
}

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct FringeArgs {
  Common common;
  int order = 4;
  std::string basis = "pm";
  int points = 37;
  std::uint64_t pulses = 1'000'000;
  int bootstrap = -1;
};

int cmd_fringe(const FringeArgs& a, int threads) {
  const ExperimentConfig cfg = load(a.common);
  const auto order = a.order == 2 ? analysis::FringeOrder::twofold : analysis::FringeOrder::fourfold;
  const auto basis = experiment::fringe_basis_from_string(a.basis);
  const auto run = experiment::simulate_fringe(cfg, order, basis, a.points, a.pulses, threads);
  const int resamples = a.bootstrap >= 0 ? a.bootstrap : cfg.analysis.bootstrap_resamples;
  const auto fit = analysis::fit_fringe_bootstrap(run.scan, resamples, cfg.source.seed);

  std::ostringstream csv;
  csv << "theta_i_deg,counts,model\n";
  for (std::size_t k = 0; k < run.scan.theta_i.size(); ++k) {
    const double t = run.scan.theta_i[k];
    csv << num(t / kDeg) << ',' << num(run.scan.values[k]) << ','
        << num(analysis::fringe_model(order, fit.amplitude, fit.offset, fit.phase, t)) << '\n';
  }
  const auto chsh = analysis::chsh_check(fit.visibility);
  json j = {{"schema", "tbent.fringe/1"},
            {"order", a.order},
            {"basis", a.basis},
            {"theta_s_deg", run.scan.theta_s / kDeg},
            {"points", a.points},
            {"pulses_per_point", a.pulses},
            {"seed", cfg.source.seed},
            {"visibility", fit.visibility},
            {"visibility_sigma", fit.visibility_sigma},
            {"bootstrap_resamples", resamples},
            {"r_squared", fit.r_squared},
            {"amplitude", fit.amplitude},
            {"offset", fit.offset},
            {"phase_rad", fit.phase},
            {"c_max", fit.c_max},
            {"c_min", fit.c_min},
            {"chsh_violated", chsh.violated},
            {"chsh_margin", chsh.margin}};
  write_file(a.common.out + ".csv", csv.str());
  write_file(a.common.out + ".json", j.dump(2) + "\n");
  std::ostringstream counts;
  detection::write_counts_csv(counts, run.records);
  write_file(a.common.out + "_counts.csv", counts.str());
  std::fprintf(stderr, "V = %.5f +- %.5f, R^2 = %.5f\n", fit.visibility, fit.visibility_sigma, fit.r_squared);
  return kOk;
}

// ---------------------------------------------------------------------------

struct TomoArgs {
  Common common;
  int qubits = 2;
  std::uint64_t pulses = 1'000'000;
  std::string target;
  std::string scheme;
  int bootstrap = -1;
};

int cmd_tomo(const TomoArgs& a, int threads) {
  const ExperimentConfig cfg = load(a.common);
  const std::string target = a.target.empty() ? (a.qubits == 2 ? "bell" : "bell2") : a.target;
  if ((target == "bell") != (a.qubits == 2)) {
    throw ConfigError("target " + target + " does not match " + std::to_string(a.qubits) + " qubits");
  }
  analysis::TomographyScheme scheme = cfg.analysis.four_qubit_scheme;
  if (a.qubits == 2) scheme = analysis::TomographyScheme::pauli_bases;
  if (a.scheme == "full") scheme = analysis::TomographyScheme::projectors;
  if (a.scheme == "pauli") scheme = analysis::TomographyScheme::pauli_bases;

  const auto run = experiment::simulate_tomography(cfg, a.qubits, scheme, a.pulses, threads);
  const auto noise = analysis::noise_breakdown(cfg.source, cfg.optics, cfg.losses, cfg.detectors);
  const Eigen::VectorXcd ket = analysis::ideal_target(a.qubits, noise.phase);
  const int resamples = a.bootstrap >= 0 ? a.bootstrap : cfg.analysis.bootstrap_resamples;

  std::vector<std::string> warnings;
  const double per_entry = run.total_counts / static_cast<double>(run.input.entries.size());
  const bool degraded = per_entry < 10.0;
  if (degraded) {
    warnings.push_back("only " + num(run.total_counts) + " counts over " +
                       std::to_string(run.input.entries.size()) + " outcomes; fidelity has degraded confidence");
  }
  const auto rep = analysis::tomography_report(run.input, ket, resamples, cfg.source.seed, threads);

  std::ostringstream csv;
  csv << "setting,outcome,counts\n";
  std::size_t e = 0;
  for (const auto& s : run.settings) {
    for (unsigned o : s.outcomes) csv << s.label << ',' << o << ',' << num(run.input.entries[e++].counts) << '\n';
  }
  std::vector<std::string> order = {"s1", "i1"};
  if (a.qubits == 4) order = {"s1", "i1", "s2", "i2"};
  const auto predicted = analysis::predict_state_under_noise(cfg.source, cfg.optics, cfg.losses, cfg.detectors, a.qubits);
  json j = {{"schema", "tbent.tomo/1"},
            {"qubits", a.qubits},
            {"scheme", scheme == analysis::TomographyScheme::pauli_bases ? "pauli" : "full"},
            {"target", target},
            {"target_phase_rad", noise.phase},
            {"settings", run.settings.size()},
            {"pulses_per_setting", a.pulses},
            {"seed", cfg.source.seed},
            {"total_counts", run.total_counts},
            {"fidelity", rep.fidelity},
            {"fidelity_sigma", rep.sigma},
            {"bootstrap_resamples", resamples},
            {"log_likelihood", rep.log_likelihood},
            {"predicted_fidelity", fidelity(predicted, ket)},
            {"degraded_confidence", degraded},
            {"warnings", warnings},
            {"rho", density_to_json(rep.rho, order)}};
  write_file(a.common.out + ".csv", csv.str());
  write_file(a.common.out + ".json", j.dump(2) + "\n");
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::fprintf(stderr, "F = %.5f +- %.5f (%s)\n", rep.fidelity, rep.sigma, target.c_str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct RatesArgs {
  Common common;
  std::string sweep = "0:0.2:5";
  std::uint64_t pulses = 10'000'000;
};

std::array<double, 3> parse_sweep(const std::string& text) {
  std::array<double, 3> v{};
  std::stringstream ss(text);
  std::string part;
  int k = 0;
  while (std::getline(ss, part, ':')) {
    if (k == 3) throw ConfigError("power sweep must be lo:hi:n");
    try {
      std::size_t used = 0;
      v[static_cast<std::size_t>(k)] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("bad power sweep field '" + part + "'");
    }
    ++k;
  }
  if (k != 3 || v[2] != std::floor(v[2]) || v[2] < 1) throw ConfigError("power sweep must be lo:hi:n with integer n >= 1");
  return v;
}

int cmd_rates(const RatesArgs& a, int threads) {
  const ExperimentConfig cfg = load(a.common);
  const auto sw = parse_sweep(a.sweep);
  const auto sweep = experiment::simulate_rates(cfg, sw[0], sw[1], static_cast<int>(sw[2]), a.pulses, threads);

  std::ostringstream csv;
  csv << "power_mw,singles_s_hz,singles_i_hz,twofold_hz,accidental_hz,fourfold_hz,pgr_hz,pgr_sigma_hz,car,car_sigma,"
         "car_lower_bound\n";
  double swpp = 0, swpy = 0;   // weighted PGR slope through the origin
  double spp4 = 0, sp2y = 0;   // fourfold ~ c P^2
  for (const auto& p : sweep.points) {
    const auto& r = p.counts;
    const double acc = 0.5 * static_cast<double>(r.coincidences(0, -1) + r.coincidences(0, 1));
    csv << num(p.pump_power) << ',' << num(r.rate(r.singles[0])) << ',' << num(r.rate(r.singles[1])) << ','
        << num(r.rate(r.coincidences(0, 0))) << ',' << num(acc / r.duration) << ',' << num(r.rate(r.fourfold)) << ','
        << num(p.pgr) << ',' << num(p.pgr_sigma) << ',' << num(p.car) << ',' << num(p.car_sigma) << ','
        << (p.car_lower_bound ? 1 : 0) << '\n';
    if (p.pgr > 0 && p.pgr_sigma > 0) {
      const double w = 1.0 / (p.pgr_sigma * p.pgr_sigma);
      swpp += w * p.pump_power * p.pump_power;
      swpy += w * p.pump_power * p.pgr;
    }
    const double p2 = p.pump_power * p.pump_power;
    spp4 += p2 * p2;
    sp2y += p2 * r.rate(r.fourfold);
  }
  json j = {{"schema", "tbent.rates/1"}, {"pulses_per_point", a.pulses}, {"seed", cfg.source.seed},
            {"points", sweep.points.size()}, {"warnings", sweep.warnings}};
  if (swpp > 0) {
    j["pgr_slope_mhz_per_mw"] = swpy / swpp / 1e6;
    j["pgr_slope_sigma_mhz_per_mw"] = 1.0 / std::sqrt(swpp) / 1e6;
    j["pgr_slope_deviation_sigma"] = (swpy / swpp / 1e6 - cfg.source.pgr_slope[0]) * std::sqrt(swpp) * 1e6;
  } else {
    j["pgr_slope_mhz_per_mw"] = nullptr;
    j["pgr_slope_sigma_mhz_per_mw"] = nullptr;
    j["pgr_slope_deviation_sigma"] = nullptr;
  }
  j["configured_slope_mhz_per_mw"] = cfg.source.pgr_slope[0];
  if (spp4 > 0) {
    const double c = sp2y / spp4;
    double mean = 0, sst = 0, sse = 0;
    for (const auto& p : sweep.points) mean += p.counts.rate(p.counts.fourfold);
    mean /= static_cast<double>(sweep.points.size());
    for (const auto& p : sweep.points) {
      const double y = p.counts.rate(p.counts.fourfold);
      sst += (y - mean) * (y - mean);
      sse += (y - c * p.pump_power * p.pump_power) * (y - c * p.pump_power * p.pump_power);
    }
    j["fourfold_quadratic_coeff_hz_per_mw2"] = c;
    j["fourfold_quadratic_r_squared"] = finite_or_null(sst > 0 ? 1.0 - sse / sst : std::nan(""));
  }
  write_file(a.common.out + ".csv", csv.str());
  write_file(a.common.out + ".json", j.dump(2) + "\n");
  for (const auto& w : sweep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct QpmArgs {
  Common common;
  std::vector<std::string> tables;
  std::optional<double> length_mm;
  std::optional<double> duty;
  std::optional<double> pump_nm;
  int jsi_points = 0;
};

int cmd_qpm(const QpmArgs& a) {
  ExperimentConfig cfg = load(a.common);
  auto& pm = cfg.phasematch;
  if (a.length_mm) pm.poling.length_mm = *a.length_mm;
  if (a.duty) pm.poling.duty_cycle = *a.duty;
  if (a.pump_nm) pm.pump_nm = *a.pump_nm;
  pm.poling.validate();
  const auto files = a.tables.empty() ? pm.dispersion_files : a.tables;
  if (files.empty()) throw ConfigError("no dispersion tables given");
  phasematch::Dispersion d;
  for (const auto& f : files) d.add(phasematch::DispersionTable::load_csv(f));

  phasematch::PolingSpec poling = pm.poling;
  poling.period_um = phasematch::qpm_period(d, pm.pump_nm);
  const double fz = phasematch::bandwidth(d, poling, pm.pump_nm, phasematch::BandwidthCriterion::first_zero);
  const double hm = phasematch::bandwidth(d, poling, pm.pump_nm, phasematch::BandwidthCriterion::half_max);

  std::ostringstream csv;
  csv << "signal_nm,idler_nm,delta_beta_per_um,intensity\n";
  const double deg = 2.0 * pm.pump_nm;
  for (double s : phasematch::linspace(deg - 60.0, deg + 60.0, 241)) {
    const double idl = 1.0 / (1.0 / pm.pump_nm - 1.0 / s);
    try {
      const double db = phasematch::delta_beta(d, poling, pm.pump_nm, s, idl);
      csv << num(s) << ',' << num(idl) << ',' << num(db) << ',' << num(phasematch::pm_intensity(db, poling.length_mm))
          << '\n';
    } catch (const RangeError&) {
    }
  }
  json j = {{"schema", "tbent.qpm/1"},
            {"tables", files},
            {"pump_nm", pm.pump_nm},
            {"period_um", poling.period_um},
            {"period_from_indices_um", phasematch::qpm_period_from_indices(pm.pump_nm, pm.shg.n_sh, pm.shg.n_fh)},
            {"length_mm", poling.length_mm},
            {"duty_cycle", poling.duty_cycle},
            {"bandwidth_first_zero_thz", fz},
            {"bandwidth_half_max_thz", hm},
            {"shg_efficiency_theory_percent_per_w", phasematch::shg_efficiency_theory(pm.shg, poling)},
            {"geometry_um", {{"width", pm.width_um}, {"etch_depth", pm.etch_depth_um}, {"film", pm.film_um}}}};
  if (a.jsi_points > 0) {
    if (a.jsi_points < 2) throw ConfigError("--jsi needs at least 2 points");
    const auto sig = phasematch::linspace(1521.0, 1539.0, a.jsi_points);
    const auto idl = phasematch::linspace(1561.0, 1579.0, a.jsi_points);
    const auto grid = phasematch::jsi(d, poling, pm.pump_nm, phasematch::transform_limited_bandwidth(pm.pump_pulse_s),
                                      sig, idl);
    std::ostringstream g;
    g << "signal_nm,idler_nm,intensity\n";
    for (std::size_t r = 0; r < grid.signal_nm.size(); ++r) {
      for (std::size_t c = 0; c < grid.idler_nm.size(); ++c) {
        g << num(grid.signal_nm[r]) << ',' << num(grid.idler_nm[c]) << ',' << num(grid.intensity[r][c]) << '\n';
      }
    }
    write_file(a.common.out + "_jsi.csv", g.str());
    j["jsi_points"] = a.jsi_points;
  }
  write_file(a.common.out + ".csv", csv.str());
  write_file(a.common.out + ".json", j.dump(2) + "\n");
  std::fprintf(stderr, "period %.4f um, bandwidth %.2f THz (first zero), %.2f THz (half max)\n", poling.period_um, fz, hm);
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_selftest(int threads) {
  int failed = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    failed += ok ? 0 : 1;
  };
  report(std::abs(phasematch::qpm_period_from_indices(775.0, 2.1669, 2.1152) - 14.99) < 0.005, "poling period 14.99 um");
  double worst = 0.0;
  for (int k = 0; k < 27; ++k) {
    const double pp = 0.7 * (k % 3), ps = 0.9 * ((k / 3) % 3), pi = 1.3 * (k / 9);
    const auto out = optics::dof_convert(source::ideal_pair_state(pp), ps, pi);
    worst = std::max(worst, std::abs(std::norm(bell_ket(ps + pi - pp).dot(polarization_ket(out.state))) - 1.0));
    worst = std::max(worst, std::abs(out.success_probability - 0.25));
  }
  report(worst < 1e-10, "conversion fidelity and success probability");
  auto in = analysis::make_tomography_input(2, analysis::tomography_settings(2, analysis::TomographyScheme::projectors));
  analysis::fill_expected_counts(in, analysis::werner_state(0.832), 1e5);
  const double f = fidelity(analysis::tomography_mle(in).rho, bell_ket());
  report(std::abs(f - analysis::werner_fidelity(0.832)) < 5e-3, "Werner state reconstruction");
  source::SourceConfig src;
  src.pump_power = 0.5;
  const detection::OpticsSetup optics;
  const auto a = detection::run_experiment(src, optics, detection::LossBudget{}, detection::DetectorModel{},
                                           detection::RunOptions{300'000, 1, 0});
  const auto b = detection::run_experiment(src, optics, detection::LossBudget{}, detection::DetectorModel{},
                                           detection::RunOptions{300'000, std::max(2, threads), 0});
  report(detection::counts_to_json(a) == detection::counts_to_json(b), "Monte Carlo independent of worker count");
  return failed == 0 ? kOk : kNumeric;
}

void explain(std::FILE* out) {
  std::fprintf(out, "%-36s %-14s %-12s %s\n", "key", "default", "kind", "note");
  for (const auto& d : documented_defaults()) {
    std::fprintf(out, "%-36s %-14s %-12s %s\n", d.key.c_str(), d.value.c_str(), d.assumption ? "assumption" : "device",
                 d.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin entanglement source simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  bool show_explain = false;
  int threads = 0;
  app.add_flag("--explain", show_explain, "list every default, flagging modelling assumptions");
  app.add_option("-j,--threads", threads, "worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);

  FringeArgs fa;
  auto* fringe = app.add_subcommand("fringe", "polarization fringe scan, fit and visibility");
  add_common(fringe, fa.common, "fringe");
  fringe->add_option("--order", fa.order, "2 or 4 photons")->check(CLI::IsMember({2, 4}))->capture_default_str();
  fringe->add_option("--basis", fa.basis, "hv (signal at 45 deg) or pm (signal at 22.5 deg)")
      ->check(CLI::IsMember({"hv", "pm"}))
      ->capture_default_str();
  fringe->add_option("--points", fa.points, "idler angles over [0, 180] deg")->capture_default_str();
  fringe->add_option("--pulses", fa.pulses, "pulses per angle")->capture_default_str();
  fringe->add_option("--bootstrap", fa.bootstrap, "resamples for the visibility error (default: config)");

  TomoArgs ta;
  auto* tomo = app.add_subcommand("tomo", "per-setting Monte Carlo and maximum likelihood tomography");
  add_common(tomo, ta.common, "tomo");
  tomo->add_option("--qubits", ta.qubits)->check(CLI::IsMember({2, 4}))->capture_default_str();
  tomo->add_option("--pulses", ta.pulses, "pulses per setting")->capture_default_str();
  tomo->add_option("--target", ta.target, "bell (2 qubits) or bell2 (4 qubits)")->check(CLI::IsMember({"bell", "bell2"}));
  tomo->add_option("--scheme", ta.scheme, "pauli or full (default: config)")->check(CLI::IsMember({"pauli", "full"}));
  tomo->add_option("--bootstrap", ta.bootstrap, "resamples for the fidelity error (default: config)");

  RatesArgs ra;
  auto* rates = app.add_subcommand("rates", "singles, coincidences, PGR and CAR against pump power");
  add_common(rates, ra.common, "rates");
  rates->add_option("--power-sweep", ra.sweep, "lo:hi:n in mW")->capture_default_str();
  rates->add_option("--pulses", ra.pulses, "pulses per power point")->capture_default_str();

  QpmArgs qa;
  auto* qpm = app.add_subcommand("qpm", "poling period, phase-matching bandwidths, SHG efficiency, JSI");
  add_common(qpm, qa.common, "qpm");
  qpm->add_option("tables", qa.tables, "dispersion CSV files (default: config)");
  qpm->add_option("--length", qa.length_mm, "poled length in mm");
  qpm->add_option("--duty", qa.duty, "poling duty cycle");
  qpm->add_option("--pump", qa.pump_nm, "pump wavelength in nm");
  qpm->add_option("--jsi", qa.jsi_points, "also write an N x N joint spectral intensity grid");

  auto* selftest = app.add_subcommand("selftest", "quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (show_explain) {
      explain(app.get_subcommands().empty() ? stdout : stderr);
      if (app.get_subcommands().empty()) return kOk;
    }
    if (fringe->parsed()) return cmd_fringe(fa, threads);
    if (tomo->parsed()) return cmd_tomo(ta, threads);
    if (rates->parsed()) return cmd_rates(ra, threads);
    if (qpm->parsed()) return cmd_qpm(qa);
    if (selftest->parsed()) return cmd_selftest(threads);
    std::cout << app.help();
    return kConfig;
  } catch (const RangeError& e) {
    std::fprintf(stderr, "range error: %s\n", e.what());
    return kRange;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumeric;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  }
}
