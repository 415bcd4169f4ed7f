#pragma once

#include "tbent/config.hpp"
#include "tbent/detection.hpp"
#include "tbent/fringe.hpp"
#include "tbent/tomography.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tbent::experiment {

enum class FringeBasis { hv, pm };

FringeBasis fringe_basis_from_string(const std::string& name);
const char* to_string(FringeBasis basis);

/// Fixed signal half-wave plate angle: 45 deg for hv, 22.5 deg for pm.
double signal_angle(FringeBasis basis);

struct FringeRun {
  analysis::FringeScan scan;
  std::vector<detection::CountsRecord> records;
};

/// Idler plate swept over `points` angles in [0, 180] deg, one Monte Carlo
/// run per angle with stream_id = point index.
FringeRun simulate_fringe(const ExperimentConfig& config, analysis::FringeOrder order, FringeBasis basis,
                          int points, std::uint64_t pulses, int threads);

struct TomographyRun {
  analysis::TomographyInput input;
  std::vector<analysis::MeasurementSetting> settings;
  std::vector<detection::CountsRecord> records;
  double total_counts = 0.0;
};

/// One Monte Carlo run per analyzer setting. pauli_bases switches on
/// two-port detection.
TomographyRun simulate_tomography(const ExperimentConfig& config, int qubits, analysis::TomographyScheme scheme,
                                  std::uint64_t pulses, int threads);

struct RatePoint {
  double pump_power = 0.0;  // mW
  detection::CountsRecord counts;
  double pgr = 0.0;  // Hz, 0 without coincidences
  double pgr_sigma = 0.0;
  double car = 0.0;  // NaN when undefined
  double car_sigma = 0.0;
  bool car_lower_bound = false;
};

struct RateSweep {
  std::vector<RatePoint> points;
  std::vector<std::string> warnings;
};

/// Linear sweep lo..hi (n points, mW). Points with mean pair number >= 1 are
/// dropped and reported in `warnings`.
RateSweep simulate_rates(const ExperimentConfig& config, double lo, double hi, int n, std::uint64_t pulses,
                         int threads);

}  // namespace tbent::experiment
