#pragma once

#include "tbent/detection.hpp"
#include "tbent/quantum_state.hpp"

namespace tbent::analysis {

/// v |Bell><Bell| + (1 - v) I/4 with Bell = (|HH> + e^{i phase}|VV>)/sqrt(2).
DensityMatrix werner_state(double v, double phase = 0.0);

/// Fidelity of a Werner state with its Bell component: (1 + 3v)/4.
double werner_fidelity(double v);

struct NoiseBreakdown {
  std::array<double, 2> accidental_fraction{};  // per channel pair, C(dt)/C(0)
  double jitter_coherence = 1.0;                // e^{-sigma^2/2}
  double phase = 0.0;                           // phi_s + phi_i - phi_p
};

NoiseBreakdown noise_breakdown(const source::SourceConfig& source, const detection::OpticsSetup& optics,
                               const detection::LossBudget& losses,
                               const detection::DetectorModel& detectors);

/// Effective post-selected polarization state on 2 qubits (s1 i1) or 4 qubits
/// (s1 i1 s2 i2): accidental coincidences enter as white noise per pair with
/// weight C(dt)/C(0), and the pump-phase jitter, common to both pairs of a
/// pulse, dephases |HH..> against |VV..> components.
DensityMatrix predict_state_under_noise(const source::SourceConfig& source,
                                        const detection::OpticsSetup& optics,
                                        const detection::LossBudget& losses,
                                        const detection::DetectorModel& detectors, int qubits);

/// Same construction from explicit parameters.
DensityMatrix compose_noisy_state(const NoiseBreakdown& noise, int qubits);

/// Ideal target for `qubits`: the Bell state or its two-pair product.
Eigen::VectorXcd ideal_target(int qubits, double phase = 0.0);

}  // namespace tbent::analysis
