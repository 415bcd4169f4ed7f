#include <doctest.h>

#include "tbent/errors.hpp"
#include "tbent/fringe.hpp"
#include "tbent/noise_model.hpp"
#include "tbent/optics.hpp"
#include "tbent/rng.hpp"
#include "tbent/spdc_source.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace tbent;
using namespace tbent::analysis;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

PureState phi2(int pair = 0) {
  return optics::dof_convert(source::ideal_pair_state(0.0, pair), 0.0, 0.0).state;
}

PureState phi4() { return tensor(phi2(0), phi2(1)); }

FringeScan synthetic(FringeOrder order, double a, double b, double phase, int n = 37) {
  FringeScan s;
  s.order = order;
  for (int k = 0; k < n; ++k) {
    const double t = kPi * k / (n - 1);
    s.theta_i.push_back(t);
    s.values.push_back(fringe_model(order, a, b, phase, t));
  }
  return s;
}

}  // namespace

TEST_CASE("four-photon fringe closed form") {
  const auto s = phi4();
  CHECK(std::abs(predict_fringe(s, 0.3, 0.3, FringeOrder::fourfold) - 0.25) < 1e-12);
  CHECK(std::abs(predict_fringe(s, 0.0, 22.5 * kDeg, FringeOrder::fourfold) - 1.0 / 16) < 1e-12);
  for (int k = 0; k < 100; ++k) {
    const double ts = 0.1 * k, ti = 0.37 * k;
    const double c = std::cos(2 * ti - 2 * ts);
    CHECK(std::abs(predict_fringe(s, ts, ti, FringeOrder::fourfold) - 0.25 * std::pow(c, 4)) < 1e-12);
  }
}

TEST_CASE("two-photon fringe at 22.5 degrees") {
  const auto s = phi2();
  for (int k = 0; k < 50; ++k) {
    const double ti = kPi * k / 49;
    const double expect = 0.5 * std::pow(std::cos(2 * ti - 45 * kDeg), 2);
    CHECK(std::abs(predict_fringe(s, 22.5 * kDeg, ti, FringeOrder::twofold) - expect) < 1e-12);
  }
  CHECK_THROWS_AS(predict_fringe(s, 0, 0, FringeOrder::fourfold), ArityError);
}

TEST_CASE("noiseless fits are exact") {
  for (auto order : {FringeOrder::twofold, FringeOrder::fourfold}) {
    for (double phase : {0.0, 0.4, 1.3, 2.9}) {
      const auto fit = fit_fringe(synthetic(order, 1.0, 0.0, phase));
      CHECK(std::abs(fit.visibility - 1.0) < 1e-6);
      CHECK(std::abs(fit.r_squared - 1.0) < 1e-6);
      const double dphi = std::remainder(fit.phase - phase, kPi);
      CHECK(std::abs(dphi) < 1e-3);
    }
  }
}

TEST_CASE("fit recovers injected visibility and phase") {
  for (auto order : {FringeOrder::twofold, FringeOrder::fourfold}) {
    for (double v : {0.3, 0.84, 0.97}) {
      // V = A / (A + 2B)
      const double a = 2.0;
      const double b = a * (1 - v) / (2 * v);
      const auto fit = fit_fringe(synthetic(order, a, b, 0.77, 25));
      CHECK(std::abs(fit.visibility - v) < 1e-3);
      CHECK(std::abs(std::remainder(fit.phase - 0.77, kPi)) < 1e-3);
    }
  }
}

TEST_CASE("Werner twofold data give the Werner visibility") {
  const double v = 0.84;
  const auto rho = werner_state(v);
  FringeScan s;
  s.theta_s = 22.5 * kDeg;
  std::mt19937_64 eng(11);
  const double pulses = 2e6;
  for (int k = 0; k < 37; ++k) {
    const double ti = kPi * k / 36;
    const Eigen::VectorXcd ks = optics::analyzer_ket({Channel::s1, s.theta_s, 0}, optics::Port::H);
    const Eigen::VectorXcd ki = optics::analyzer_ket({Channel::i1, ti, 0}, optics::Port::H);
    const Eigen::VectorXcd ket = kron(ks, ki);
    const double p = (ket.adjoint() * rho.matrix() * ket)(0, 0).real();
    s.theta_i.push_back(ti);
    s.values.push_back(static_cast<double>(std::poisson_distribution<long long>(p * pulses)(eng)));
  }
  const auto fit = fit_fringe_bootstrap(s, 100, 5);
  CHECK(fit.visibility_sigma > 0.0);
  CHECK(std::abs(fit.visibility - v) < 4 * fit.visibility_sigma + 1e-4);
}

TEST_CASE("fit input checks") {
  auto s = synthetic(FringeOrder::twofold, 1, 0, 0, 7);
  CHECK_THROWS_AS(fit_fringe(s), ConfigError);
  s = synthetic(FringeOrder::twofold, 1, 0, 0, 12);
  s.theta_i[3] = s.theta_i[2];
  CHECK_THROWS_AS(fit_fringe(s), ConfigError);
  s = synthetic(FringeOrder::twofold, 1, 0, 0, 12);
  s.values[1] = std::nan("");
  CHECK_THROWS_AS(fit_fringe(s), FitFailure);
  FringeScan narrow = synthetic(FringeOrder::twofold, 1, 0, 0, 12);
  for (auto& t : narrow.theta_i) t *= 0.5;
  CHECK_THROWS_AS(fit_fringe(narrow), ConfigError);
}

TEST_CASE("CHSH threshold") {
  const auto a = chsh_check(0.84);
  CHECK(a.violated);
  CHECK(std::abs(a.margin - 0.1329) < 1e-4);
  CHECK_FALSE(chsh_check(0.70).violated);
  CHECK_FALSE(chsh_check(1.0 / std::sqrt(2.0)).violated);
}
