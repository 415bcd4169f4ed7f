#pragma once

#include "tbent/optics.hpp"
#include "tbent/quantum_state.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tbent::analysis {

/// One analyzer configuration and the detector outcomes recorded under it.
struct MeasurementSetting {
  std::vector<optics::AnalyzerSetting> analyzers;  // one per qubit, order s1 i1 (s2 i2)
  /// Recorded port patterns; bit (n-1-k) set means qubit k exits the reflected port.
  std::vector<unsigned> outcomes;
  std::string label;
};

enum class TomographyScheme {
  projectors,   // 6^n eigenstate products, transmitted port only
  pauli_bases,  // 3^n Pauli bases, both ports of every analyzer
};

/// 36 settings for 2 qubits or 1296 for 4 under `projectors`; 9 or 81 under `pauli_bases`.
std::vector<MeasurementSetting> tomography_settings(int qubits, TomographyScheme scheme);

/// Rank-one projector entry of the likelihood.
struct TomographyEntry {
  Eigen::VectorXcd ket;   // measured polarization ket
  double counts = 0.0;
  double exposure = 1.0;  // relative trials behind this entry
};

struct TomographyInput {
  int qubits = 2;
  std::vector<TomographyEntry> entries;
};

/// Expands settings x outcomes into projector entries with zero counts.
TomographyInput make_tomography_input(int qubits, const std::vector<MeasurementSetting>& settings);

/// Fills counts with exact expectations total * exposure * Tr(rho Pi).
void fill_expected_counts(TomographyInput& input, const DensityMatrix& rho, double total);

struct MleOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;  // per-step log-likelihood gain, per count
};

struct MleResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed(1);
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;
  /// Log-likelihood after each accepted step; non-decreasing.
  std::vector<double> trace;
};

/// Maximum likelihood state under Poisson counts with a common unknown rate.
/// Throws UnidentifiableError for rank-deficient settings and
/// DegenerateDataError when every count is zero.
MleResult tomography_mle(const TomographyInput& input, const MleOptions& options = {});

/// Log-likelihood of rho for the given input (same normalization as the MLE).
double log_likelihood(const TomographyInput& input, const DensityMatrix& rho);

struct FidelityReport {
  double fidelity = 0.0;
  double sigma = 0.0;  // parametric bootstrap, 0 when not requested
  double log_likelihood = 0.0;
  DensityMatrix rho = DensityMatrix::maximally_mixed(1);
};

/// MLE then fidelity with `target`; `resamples` > 1 adds a bootstrap error.
FidelityReport tomography_report(const TomographyInput& input, const Eigen::VectorXcd& target,
                                 int resamples = 0, std::uint64_t seed = 1, int threads = 1);

nlohmann::json tomography_input_to_json(const TomographyInput& input);
TomographyInput tomography_input_from_json(const nlohmann::json& j);

}  // namespace tbent::analysis
