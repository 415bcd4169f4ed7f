#include "tbent/config.hpp"

#include "tbent/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

namespace tbent {

namespace {

using nlohmann::json;
constexpr double kDeg = std::numbers::pi / 180.0;

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in section '" + section + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_source(const json& j, source::SourceConfig& s) {
  check_keys(j, "source", {"rep_rate_hz", "pump_power_mw", "pgr_slope_mhz_per_mw", "phase_p_rad",
                           "phase_jitter_std_rad", "max_pairs_per_pulse", "statistics", "seed"});
  read(j, "rep_rate_hz", s.rep_rate);
  read(j, "pump_power_mw", s.pump_power);
  read(j, "pgr_slope_mhz_per_mw", s.pgr_slope);
  read(j, "phase_p_rad", s.phase_p);
  read(j, "phase_jitter_std_rad", s.phase_jitter_std);
  read(j, "max_pairs_per_pulse", s.max_pairs_per_pulse);
  if (j.contains("statistics")) s.statistics = source::parse_statistics(j.at("statistics").get<std::string>());
  read(j, "seed", s.seed);
}

void read_optics(const json& j, detection::OpticsSetup& o) {
  check_keys(j, "optics", {"setup", "explicit_postselection", "analyze_polarization", "two_port",
                           "phase_s_rad", "phase_i_rad", "delay_s", "analyzers"});
  if (j.contains("setup")) {
    const auto s = j.at("setup").get<std::string>();
    if (s == "entanglement") o.setup = detection::Setup::entanglement;
    else if (s == "characterization") o.setup = detection::Setup::characterization;
    else throw ConfigError("unknown optics setup '" + s + "'");
  }
  read(j, "explicit_postselection", o.explicit_postselection);
  read(j, "analyze_polarization", o.analyze_polarization);
  read(j, "two_port", o.two_port);
  double phs = o.converter.phase_of(Channel::s1), phi = o.converter.phase_of(Channel::i1);
  double delay = o.converter.delay;
  read(j, "phase_s_rad", phs);
  read(j, "phase_i_rad", phi);
  read(j, "delay_s", delay);
  o.converter = optics::UmziConfig::converter(phs, phi, delay);
  o.modulator = optics::UmziConfig::modulator(0.0, delay);
  if (j.contains("analyzers")) {
    const auto settings = optics::settings_from_json(j.at("analyzers"));
    for (const auto& s : settings) {
      if (s.channel == Channel::pump) throw ConfigError("no analyzer on the pump");
      o.analyzers[static_cast<std::size_t>(s.channel)] = s;
    }
  }
}

void read_losses(const json& j, detection::LossBudget& l) {
  check_keys(j, "losses", {"coupling_db", "umzi_insertion_db", "dof_conversion_db", "cwdm_db", "analyzer_db",
                           "fiber_to_detector_db", "detector_db", "channel_scale"});
  read(j, "coupling_db", l.coupling);
  read(j, "umzi_insertion_db", l.umzi_insertion);
  read(j, "dof_conversion_db", l.dof_conversion);
  read(j, "cwdm_db", l.cwdm);
  read(j, "analyzer_db", l.analyzer);
  read(j, "fiber_to_detector_db", l.fiber_to_detector);
  read(j, "detector_db", l.detector);
  read(j, "channel_scale", l.channel_scale);
}

void read_detectors(const json& j, detection::DetectorModel& d) {
  check_keys(j, "detectors", {"dark_count_rate_hz", "coincidence_window_s", "dead_time_s"});
  read(j, "dark_count_rate_hz", d.dark_count_rate);
  read(j, "coincidence_window_s", d.coincidence_window);
  read(j, "dead_time_s", d.dead_time);
}

void read_analysis(const json& j, AnalysisConfig& a) {
  check_keys(j, "analysis", {"bootstrap_resamples", "four_qubit_scheme"});
  read(j, "bootstrap_resamples", a.bootstrap_resamples);
  if (j.contains("four_qubit_scheme")) {
    const auto s = j.at("four_qubit_scheme").get<std::string>();
    if (s == "full") a.four_qubit_scheme = analysis::TomographyScheme::projectors;
    else if (s == "pauli") a.four_qubit_scheme = analysis::TomographyScheme::pauli_bases;
    else throw ConfigError("four_qubit_scheme must be 'full' or 'pauli'");
  }
}

void read_phasematch(const json& j, PhasematchConfig& p) {
  check_keys(j, "phasematch", {"dispersion_files", "pump_nm", "period_um", "length_mm", "duty_cycle",
                               "d33_pm_per_v", "n_fh", "n_sh", "a_eff_um2", "overlap", "pump_pulse_s",
                               "geometry"});
  read(j, "dispersion_files", p.dispersion_files);
  read(j, "pump_nm", p.pump_nm);
  read(j, "period_um", p.poling.period_um);
  read(j, "length_mm", p.poling.length_mm);
  read(j, "duty_cycle", p.poling.duty_cycle);
  read(j, "d33_pm_per_v", p.shg.d33_pm_per_v);
  read(j, "n_fh", p.shg.n_fh);
  read(j, "n_sh", p.shg.n_sh);
  read(j, "a_eff_um2", p.shg.a_eff_um2);
  read(j, "overlap", p.shg.overlap);
  read(j, "pump_pulse_s", p.pump_pulse_s);
  p.shg.wavelength_fh_nm = 2.0 * p.pump_nm;
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    check_keys(g, "phasematch.geometry", {"width_um", "etch_depth_um", "film_um"});
    read(g, "width_um", p.width_um);
    read(g, "etch_depth_um", p.etch_depth_um);
    read(g, "film_um", p.film_um);
  }
}

const char* statistics_name(source::PairStatistics s) { return source::to_string(s); }

}  // namespace

void ExperimentConfig::validate() const {
  source.validate();
  optics.validate();
  detectors.validate(source.rep_rate);
  for (double s : losses.channel_scale) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("channel_scale entries must lie in (0, 1]");
  }
  if (analysis.bootstrap_resamples < 0) throw ConfigError("bootstrap_resamples must be non-negative");
  phasematch.poling.validate();
  phasematch.shg.validate();
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "root", {"schema_version", "source", "optics", "losses", "detectors", "analysis", "phasematch",
                         "description"});
  if (!j.contains("schema_version")) throw ConfigError("config lacks schema_version");
  if (j.at("schema_version") != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version " + j.at("schema_version").dump());
  }
  ExperimentConfig c;
  if (j.contains("source")) read_source(j.at("source"), c.source);
  if (j.contains("optics")) read_optics(j.at("optics"), c.optics);
  if (j.contains("losses")) read_losses(j.at("losses"), c.losses);
  if (j.contains("detectors")) read_detectors(j.at("detectors"), c.detectors);
  if (j.contains("analysis")) read_analysis(j.at("analysis"), c.analysis);
  if (j.contains("phasematch")) read_phasematch(j.at("phasematch"), c.phasematch);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // table paths are relative to the config file
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& f : c.phasematch.dispersion_files) {
    if (std::filesystem::path(f).is_relative()) f = (base / f).lexically_normal().string();
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["source"] = {{"rep_rate_hz", c.source.rep_rate},
                 {"pump_power_mw", c.source.pump_power},
                 {"pgr_slope_mhz_per_mw", c.source.pgr_slope},
                 {"phase_p_rad", c.source.phase_p},
                 {"phase_jitter_std_rad", c.source.phase_jitter_std},
                 {"max_pairs_per_pulse", c.source.max_pairs_per_pulse},
                 {"statistics", statistics_name(c.source.statistics)},
                 {"seed", c.source.seed}};
  std::vector<optics::AnalyzerSetting> an(c.optics.analyzers.begin(), c.optics.analyzers.end());
  j["optics"] = {{"setup", c.optics.setup == detection::Setup::entanglement ? "entanglement" : "characterization"},
                 {"explicit_postselection", c.optics.explicit_postselection},
                 {"analyze_polarization", c.optics.analyze_polarization},
                 {"two_port", c.optics.two_port},
                 {"phase_s_rad", c.optics.converter.phase_of(Channel::s1)},
                 {"phase_i_rad", c.optics.converter.phase_of(Channel::i1)},
                 {"delay_s", c.optics.converter.delay},
                 {"analyzers", optics::settings_to_json(an)}};
  j["losses"] = {{"coupling_db", c.losses.coupling},
                 {"umzi_insertion_db", c.losses.umzi_insertion},
                 {"dof_conversion_db", c.losses.dof_conversion},
                 {"cwdm_db", c.losses.cwdm},
                 {"analyzer_db", c.losses.analyzer},
                 {"fiber_to_detector_db", c.losses.fiber_to_detector},
                 {"detector_db", c.losses.detector},
                 {"channel_scale", c.losses.channel_scale}};
  j["detectors"] = {{"dark_count_rate_hz", c.detectors.dark_count_rate},
                    {"coincidence_window_s", c.detectors.coincidence_window},
                    {"dead_time_s", c.detectors.dead_time}};
  j["analysis"] = {{"bootstrap_resamples", c.analysis.bootstrap_resamples},
                   {"four_qubit_scheme",
                    c.analysis.four_qubit_scheme == analysis::TomographyScheme::projectors ? "full" : "pauli"}};
  j["phasematch"] = {{"dispersion_files", c.phasematch.dispersion_files},
                     {"pump_nm", c.phasematch.pump_nm},
                     {"period_um", c.phasematch.poling.period_um},
                     {"length_mm", c.phasematch.poling.length_mm},
                     {"duty_cycle", c.phasematch.poling.duty_cycle},
                     {"d33_pm_per_v", c.phasematch.shg.d33_pm_per_v},
                     {"n_fh", c.phasematch.shg.n_fh},
                     {"n_sh", c.phasematch.shg.n_sh},
                     {"a_eff_um2", c.phasematch.shg.a_eff_um2},
                     {"overlap", c.phasematch.shg.overlap},
                     {"pump_pulse_s", c.phasematch.pump_pulse_s},
                     {"geometry",
                      {{"width_um", c.phasematch.width_um},
                       {"etch_depth_um", c.phasematch.etch_depth_um},
                       {"film_um", c.phasematch.film_um}}}};
  return j;
}

std::vector<DefaultDoc> documented_defaults() {
  return {
      {"source.rep_rate_hz", "1e8", "pump repetition rate", false},
      {"source.pump_power_mw", "0.08", "on-chip pump power", false},
      {"source.pgr_slope_mhz_per_mw", "[120, 90]", "pair rate per mW for s1/i1 and s2/i2", false},
      {"source.phase_p_rad", "0", "pump interferometer phase", false},
      {"source.phase_jitter_std_rad", "0", "Gaussian phase noise per pulse, shared by all pairs", true},
      {"source.max_pairs_per_pulse", "3", "truncation; tail mass lumped onto the last value", true},
      {"source.statistics", "poisson", "multimode pair-number law", true},
      {"source.seed", "20240601", "master seed; TBENT_SEED overrides", false},
      {"optics.setup", "entanglement", "or characterization (no interferometers, no analyzers)", false},
      {"optics.explicit_postselection", "true", "simulate the middle-bin projection instead of a 3 dB line", false},
      {"optics.analyze_polarization", "true", "project through the analyzer plates", false},
      {"optics.two_port", "false", "also detect the reflected PBS port", true},
      {"optics.delay_s", "6.45e-10", "interferometer imbalance, both interferometers", false},
      {"losses.coupling_db", "4", "fiber-chip coupling", false},
      {"losses.umzi_insertion_db", "2.7", "interferometer insertion", false},
      {"losses.dof_conversion_db", "3", "post-selection; dropped when simulated explicitly", false},
      {"losses.cwdm_db", "1.5", "wavelength demultiplexer", false},
      {"losses.analyzer_db", "2.5", "polarization analyzer", false},
      {"losses.fiber_to_detector_db", "0.8", "fiber to detector", false},
      {"losses.detector_db", "1", "detector efficiency", false},
      {"losses.channel_scale", "[1, 1, 1, 1]", "extra per-channel efficiency factors", true},
      {"detectors.dark_count_rate_hz", "100", "per detector; typical superconducting detector", true},
      {"detectors.coincidence_window_s", "1e-9", "must be shorter than the pulse period", true},
      {"detectors.dead_time_s", "0", "non-paralyzable dead time", true},
      {"analysis.bootstrap_resamples", "250", "parametric bootstrap size", true},
      {"analysis.four_qubit_scheme", "pauli", "81 Pauli bases with two-port detection, or full 1296", true},
      {"phasematch.pump_nm", "775", "pump wavelength", false},
      {"phasematch.length_mm", "12", "poled length", false},
      {"phasematch.duty_cycle", "0.68", "poling duty cycle", false},
      {"phasematch.d33_pm_per_v", "27", "nonlinear coefficient", false},
      {"phasematch.a_eff_um2", "14.9", "effective area over overlap squared, calibrated to 260 %/W", true},
      {"phasematch.pump_pulse_s", "1e-11", "transform-limited Gaussian pump", true},
      {"phasematch.geometry", "4.5 / 0.58 / 3 um", "width, etch depth, film; metadata only", false},
  };
}

}  // namespace tbent
