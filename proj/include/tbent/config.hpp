#pragma once

#include "tbent/detection.hpp"
#include "tbent/phasematch.hpp"
#include "tbent/spdc_source.hpp"
#include "tbent/tomography.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace tbent {

inline constexpr int kConfigSchemaVersion = 1;

struct AnalysisConfig {
  int bootstrap_resamples = 250;
  analysis::TomographyScheme four_qubit_scheme = analysis::TomographyScheme::pauli_bases;
};

struct PhasematchConfig {
  std::vector<std::string> dispersion_files;
  double pump_nm = 775.0;
  phasematch::PolingSpec poling{};
  phasematch::ShgParams shg{};
  double pump_pulse_s = 10e-12;
  /// Waveguide geometry, metadata only.
  double width_um = 4.5;
  double etch_depth_um = 0.58;
  double film_um = 3.0;
};

struct ExperimentConfig {
  source::SourceConfig source{};
  detection::OpticsSetup optics{};
  detection::LossBudget losses{};
  detection::DetectorModel detectors{};
  AnalysisConfig analysis{};
  PhasematchConfig phasematch{};

  void validate() const;
};

/// Parses a config document. Missing keys keep their defaults; unknown keys
/// and a mismatched schema_version throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Reads a config file; relative dispersion_files resolve against its directory.
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct DefaultDoc {
  std::string key;
  std::string value;
  std::string note;
  bool assumption = false;  // not a measured device value
};

/// One entry per configurable field.
std::vector<DefaultDoc> documented_defaults();

}  // namespace tbent
