#include <doctest.h>

#include "tbent/noise_model.hpp"

#include <cmath>
#include <numbers>

using namespace tbent;
using namespace tbent::analysis;

namespace {

/// Brute-force jitter average by quadrature over the phase.
Eigen::MatrixXcd jitter_average(int pairs, double sigma, double phase) {
  const int d = 1 << (2 * pairs);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  const int n = 4001;
  const double lim = 10 * sigma;
  double wsum = 0;
  for (int k = 0; k < n; ++k) {
    const double x = -lim + 2 * lim * k / (n - 1);
    const double w = std::exp(-0.5 * x * x / (sigma * sigma));
    Eigen::VectorXcd ket = bell_ket(phase + x);
    if (pairs == 2) ket = kron(ket, bell_ket(phase + x));
    acc += w * ket * ket.adjoint();
    wsum += w;
  }
  return acc / wsum;
}

}  // namespace

TEST_CASE("noiseless limit") {
  NoiseBreakdown nb;
  CHECK(std::abs(fidelity(compose_noisy_state(nb, 2), ideal_target(2)) - 1.0) < 1e-12);
  CHECK(std::abs(fidelity(compose_noisy_state(nb, 4), ideal_target(4)) - 1.0) < 1e-12);
  source::SourceConfig s;
  s.pump_power = 1e-6;
  detection::DetectorModel d;
  d.dark_count_rate = 0;
  const auto rho = predict_state_under_noise(s, detection::OpticsSetup{}, detection::LossBudget{}, d, 2);
  CHECK(fidelity(rho, ideal_target(2)) > 0.9999);
}

TEST_CASE("jitter dephasing matches the Gaussian characteristic function") {
  for (double sigma : {0.2, 0.7}) {
    NoiseBreakdown nb;
    nb.jitter_coherence = std::exp(-0.5 * sigma * sigma);
    nb.phase = 0.4;
    const auto rho2 = compose_noisy_state(nb, 2);
    CHECK(std::abs(fidelity(rho2, ideal_target(2, 0.4)) - (1 + nb.jitter_coherence) / 2) < 1e-12);
    CHECK((rho2.matrix() - jitter_average(1, sigma, 0.4)).norm() < 1e-8);
    const auto rho4 = compose_noisy_state(nb, 4);
    CHECK((rho4.matrix() - jitter_average(2, sigma, 0.4)).norm() < 1e-8);
    const double c = nb.jitter_coherence;
    CHECK(std::abs(fidelity(rho4, ideal_target(4, 0.4)) - (6 + 8 * c + 2 * std::pow(c, 4)) / 16) < 1e-12);
  }
}

TEST_CASE("four-qubit mixture weights factorize") {
  NoiseBreakdown nb;
  nb.accidental_fraction = {0.1, 0.2};
  const auto rho = compose_noisy_state(nb, 4);
  // brute force: each pair independently Bell or white
  const Eigen::MatrixXcd b = bell_ket() * bell_ket().adjoint();
  const Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  const Eigen::MatrixXcd p1 = 0.9 * b + 0.1 * w;
  const Eigen::MatrixXcd p2 = 0.8 * b + 0.2 * w;
  CHECK((rho.matrix() - kron(p1, p2)).norm() < 1e-12);
}

TEST_CASE("more pump power lowers the fidelity") {
  source::SourceConfig lo, hi;
  lo.pump_power = source::power_for_mean_pairs(lo, 0, 0.01);
  hi.pump_power = source::power_for_mean_pairs(hi, 0, 0.1);
  const auto f_lo = fidelity(predict_state_under_noise(lo, {}, {}, {}, 2), ideal_target(2));
  const auto f_hi = fidelity(predict_state_under_noise(hi, {}, {}, {}, 2), ideal_target(2));
  CHECK(f_hi < f_lo);
  const auto nb = noise_breakdown(hi, {}, {}, {});
  // accidental fraction ~ mu for small losses and darks
  CHECK(nb.accidental_fraction[0] > 0.05);
  CHECK(nb.accidental_fraction[0] < 0.15);
}

TEST_CASE("Werner state") {
  const auto w = werner_state(0.832);
  CHECK(std::abs(fidelity(w, bell_ket()) - 0.874) < 1e-12);
  CHECK(std::abs(werner_fidelity(1.0) - 1.0) < 1e-15);
  CHECK(std::abs(werner_fidelity(0.0) - 0.25) < 1e-15);
}
