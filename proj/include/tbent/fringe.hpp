#pragma once

#include "tbent/quantum_state.hpp"

#include <cstdint>
#include <vector>

namespace tbent::analysis {

enum class FringeOrder { twofold, fourfold };

struct FringeScan {
  double theta_s = 0.0;              // rad, fixed signal HWP angle
  std::vector<double> theta_i;       // rad, strictly increasing
  std::vector<double> values;        // counts or probabilities
  FringeOrder order = FringeOrder::twofold;

  /// Throws ConfigError on size mismatch, non-increasing grid or span < pi.
  void validate() const;
};

struct FringeFit {
  double amplitude = 0.0;  // A in A g(2 theta - phi) + B
  double offset = 0.0;     // B
  double phase = 0.0;      // phi, rad in [0, pi)
  double c_max = 0.0;
  double c_min = 0.0;
  double visibility = 0.0;
  double r_squared = 0.0;
  double visibility_sigma = 0.0;  // bootstrap, 0 when not requested
  int restarts = 0;
};

/// |<Psi(theta_s, theta_i)|state>|^2 with every signal analyzer at HWP theta_s
/// and every idler analyzer at HWP theta_i, QWP at zero, transmitted port.
/// `state` holds middle-bin photons (two for twofold, four for fourfold).
double predict_fringe(const PureState& state, double theta_s, double theta_i, FringeOrder order);

/// Model value A g(2 theta - phi) + B with g = cos^2 or cos^4.
double fringe_model(FringeOrder order, double amplitude, double offset, double phase, double theta);

/// Least squares fit of A g(2 theta - phi) + B with Poisson weights
/// 1/max(model, 1). Needs at least 8 points.
FringeFit fit_fringe(const FringeScan& scan);

/// As fit_fringe, plus a Poisson-resampled standard error of the visibility.
FringeFit fit_fringe_bootstrap(const FringeScan& scan, int resamples, std::uint64_t seed);

struct ChshResult {
  bool violated = false;
  double margin = 0.0;
};

/// Violation iff V > 1/sqrt(2), strictly.
ChshResult chsh_check(double visibility);

}  // namespace tbent::analysis
