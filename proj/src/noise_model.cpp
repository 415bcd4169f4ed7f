#include "tbent/noise_model.hpp"

#include "tbent/errors.hpp"

#include <cmath>

namespace tbent::analysis {

namespace {

/// Number of |VV> pairs in basis index `k` of a register of `pairs` pairs;
/// -1 when some pair is neither HH nor VV.
int vv_pairs(int k, int pairs) {
  int count = 0;
  for (int p = 0; p < pairs; ++p) {
    const int two = (k >> (2 * (pairs - 1 - p))) & 3;
    if (two == 3) ++count;
    else if (two != 0) return -1;
  }
  return count;
}

}  // namespace

DensityMatrix werner_state(double v, double phase) {
  const Eigen::VectorXcd b = bell_ket(phase);
  const Eigen::MatrixXcd m = v * (b * b.adjoint()) + (1.0 - v) * Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  return DensityMatrix::from_matrix(m);
}

double werner_fidelity(double v) { return (1.0 + 3.0 * v) / 4.0; }

Eigen::VectorXcd ideal_target(int qubits, double phase) {
  if (qubits == 2) return bell_ket(phase);
  if (qubits == 4) return kron(bell_ket(phase), bell_ket(phase));
  throw ConfigError("target defined for 2 or 4 qubits");
}

NoiseBreakdown noise_breakdown(const source::SourceConfig& source, const detection::OpticsSetup& optics,
                               const detection::LossBudget& losses,
                               const detection::DetectorModel& detectors) {
  detection::OpticsSetup probe = optics;
  probe.analyze_polarization = false;
  probe.two_port = false;
  probe.explicit_postselection = true;
  probe.setup = detection::Setup::entanglement;
  source::SourceConfig clean = source;
  clean.phase_jitter_std = 0.0;
  const auto rates = detection::expected_rates(clean, probe, losses, detectors);
  NoiseBreakdown nb;
  for (std::size_t j = 0; j < 2; ++j) {
    nb.accidental_fraction[j] =
        rates.twofold_zero[j] > 0 ? std::min(1.0, rates.twofold_delayed[j] / rates.twofold_zero[j]) : 0.0;
  }
  nb.jitter_coherence = std::exp(-0.5 * source.phase_jitter_std * source.phase_jitter_std);
  nb.phase = optics.converter.phase_of(Channel::s1) + optics.converter.phase_of(Channel::i1) -
             (source.phase_p + optics.modulator.phase_of(Channel::pump));
  return nb;
}

DensityMatrix compose_noisy_state(const NoiseBreakdown& nb, int qubits) {
  if (qubits != 2 && qubits != 4) throw ConfigError("noise model defined for 2 or 4 qubits");
  const int pairs = qubits / 2;
  const int d = 1 << qubits;
  const Eigen::VectorXcd ket = ideal_target(qubits, nb.phase);
  // Jitter average of the pure projector: element (a, b) carries the phase
  // (k_a - k_b) delta, so its mean is c^{(k_a - k_b)^2} with c = e^{-sigma^2/2}.
  Eigen::MatrixXcd pure = ket * ket.adjoint();
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const int ka = vv_pairs(a, pairs);
      const int kb = vv_pairs(b, pairs);
      if (ka < 0 || kb < 0) continue;
      const int dk = ka - kb;
      pure(a, b) *= std::pow(nb.jitter_coherence, dk * dk);
    }
  }
  if (pairs == 1) {
    const double f = nb.accidental_fraction[0];
    return DensityMatrix::project_physical((1.0 - f) * pure + f * Eigen::MatrixXcd::Identity(4, 4) / 4.0);
  }
  // Four qubits: mixtures factorize per pair (true pair or white noise), the
  // jitter stays correlated across the pairs that remain coherent.
  const double f1 = nb.accidental_fraction[0];
  const double f2 = nb.accidental_fraction[1];
  const Eigen::VectorXcd b = bell_ket(nb.phase);
  Eigen::MatrixXcd bell = b * b.adjoint();
  bell(0, 3) *= nb.jitter_coherence;
  bell(3, 0) *= nb.jitter_coherence;
  const Eigen::MatrixXcd white = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  const Eigen::MatrixXcd m = (1 - f1) * (1 - f2) * pure + (1 - f1) * f2 * kron(bell, white) +
                             f1 * (1 - f2) * kron(white, bell) + f1 * f2 * kron(white, white);
  return DensityMatrix::project_physical(m);
}

DensityMatrix predict_state_under_noise(const source::SourceConfig& source,
                                        const detection::OpticsSetup& optics,
                                        const detection::LossBudget& losses,
                                        const detection::DetectorModel& detectors, int qubits) {
  return compose_noisy_state(noise_breakdown(source, optics, losses, detectors), qubits);
}

}  // namespace tbent::analysis
