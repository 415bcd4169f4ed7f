#include <doctest.h>

#include "tbent/errors.hpp"
#include "tbent/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace tbent;
using namespace tbent::phasematch;

namespace {

constexpr double kPi = std::numbers::pi;

Dispersion fixtures() {
  return Dispersion({DispersionTable::load_csv(std::string(TBENT_FIXTURE_DIR) + "/dispersion_pump.csv"),
                     DispersionTable::load_csv(std::string(TBENT_FIXTURE_DIR) + "/dispersion_telecom.csv")});
}

/// Two flat bands with a fixed index step.
Dispersion flat(double n_pump, double n_telecom) {
  std::vector<double> wp, np, wt, nt;
  for (int k = 0; k < 10; ++k) {
    wp.push_back(700 + 20 * k);
    np.push_back(n_pump);
    wt.push_back(1400 + 40 * k);
    nt.push_back(n_telecom);
  }
  return Dispersion({DispersionTable(wp, np), DispersionTable(wt, nt)});
}

PolingSpec matched(const Dispersion& d, double pump = 775.0) {
  PolingSpec p;
  p.period_um = qpm_period(d, pump);
  return p;
}

}  // namespace

TEST_CASE("poling period from the two indices") {
  const double l = qpm_period_from_indices(775.0, 2.1669, 2.1152);
  CHECK(std::abs(l - 775.0 / 0.0517 * 1e-3) < 1e-12);
  CHECK(std::abs(l - 14.99) < 0.01);
  CHECK(std::abs(qpm_period(flat(2.2, 2.1), 760.0) - 7.6) < 1e-9);
  CHECK_THROWS_AS(qpm_period_from_indices(775, 2.1, 2.1), NoQpmSolutionError);
  CHECK_THROWS_AS(qpm_period(flat(2.1, 2.2), 760.0), NoQpmSolutionError);
}

TEST_CASE("fixture tables reproduce the design indices") {
  const auto d = fixtures();
  CHECK(std::abs(d.n_eff(775.0) - 2.1669) < 1e-6);
  CHECK(std::abs(d.n_eff(1550.0) - 2.1152) < 1e-6);
  CHECK(std::abs(qpm_period(d, 775.0) - 14.99) < 0.075);
}

TEST_CASE("round trip of period and mismatch") {
  const auto d = fixtures();
  for (int k = 0; k < 20; ++k) {
    const double lp = 755.0 + 2.0 * k;
    const PolingSpec p = matched(d, lp);
    CHECK(std::abs(delta_beta(d, p, lp, 2 * lp, 2 * lp)) < 1e-9);
  }
}

TEST_CASE("mismatch is even in detuning and changes sign with the period") {
  const auto d = fixtures();
  const PolingSpec p = matched(d);
  const double c = 299792458.0;
  const double nu_p = c / 775e-9;
  for (double det : {0.5e12, 2e12, 5e12}) {
    auto at = [&](double x) {
      return delta_beta(d, p, 775.0, c / (nu_p / 2 + x) * 1e9, c / (nu_p / 2 - x) * 1e9);
    };
    const double plus = at(det), minus = at(-det);
    // odd part is higher order than the even part near degeneracy
    CHECK(std::abs(plus - minus) < 0.2 * std::abs(plus + minus) + 1e-12);
  }
  PolingSpec shorter = p;
  shorter.period_um *= 0.999;
  PolingSpec longer = p;
  longer.period_um *= 1.001;
  CHECK(delta_beta(d, shorter, 775, 1550, 1550) > 0);
  CHECK(delta_beta(d, longer, 775, 1550, 1550) < 0);
}

TEST_CASE("sinc squared tuning curve") {
  CHECK(pm_intensity(0.0, 12.0) == 1.0);
  const double len = 12.0;
  const double first_zero = 2 * kPi / (len * 1e3);
  CHECK(std::abs(pm_intensity(first_zero, len)) < 1e-12);
  CHECK(std::abs(half_max_argument() - 1.39156) < 1e-5);
  const double x = half_max_argument();
  CHECK(std::abs(std::pow(std::sin(x) / x, 2) - 0.5) < 1e-12);
  for (double db = -3; db <= 3; db += 0.01) {
    const double v = pm_intensity(db, 0.5);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(v - pm_intensity(-db, 0.5)) < 1e-15);
  }
}

TEST_CASE("bandwidths from the fixture tables") {
  const auto d = fixtures();
  const PolingSpec p = matched(d);
  const double fz = bandwidth(d, p, 775.0, BandwidthCriterion::first_zero);
  const double hm = bandwidth(d, p, 775.0, BandwidthCriterion::half_max);
  CHECK(std::abs(fz - 58.0) < 5.8);
  CHECK(std::abs(hm - 36.0) < 3.6);
  CHECK(fz > hm);
  PolingSpec longer = p;
  longer.length_mm *= 2;
  const double fz2 = bandwidth(d, longer, 775.0, BandwidthCriterion::first_zero);
  const double hm2 = bandwidth(d, longer, 775.0, BandwidthCriterion::half_max);
  // quadratic mismatch would give exactly 1/sqrt(2); quartic terms pull it lower
  CHECK(fz2 / fz > 0.6);
  CHECK(fz2 / fz < 0.75);
  CHECK(hm2 / hm > 0.6);
  CHECK(hm2 / hm < 0.75);
}

TEST_CASE("bandwidth outside the tables is a range error") {
  std::vector<double> wp{770, 772, 774, 776, 778, 780};
  std::vector<double> np(6, 2.1669);
  std::vector<double> wt{1540, 1545, 1550, 1555, 1560};
  std::vector<double> nt{2.1150, 2.1151, 2.1152, 2.1153, 2.1154};
  const Dispersion d({DispersionTable(wp, np), DispersionTable(wt, nt)});
  PolingSpec p;
  p.period_um = qpm_period(d, 775.0);
  CHECK_THROWS_AS(bandwidth(d, p, 775.0, BandwidthCriterion::first_zero), RangeError);
}

TEST_CASE("dispersion table checks") {
  CHECK_THROWS_AS(DispersionTable({1, 2, 3}, {2, 2, 2}), ConfigError);
  CHECK_THROWS_AS(DispersionTable({1, 3, 2, 4}, {2, 2, 2, 2}), ConfigError);
  const DispersionTable t({1, 2, 3, 4}, {2, 2.1, 2.2, 2.3});
  CHECK(std::abs(t.n_eff(2.5) - 2.15) < 1e-12);
  CHECK_THROWS_AS(t.n_eff(4.5), RangeError);
  CHECK_THROWS_AS(t.n_eff(0.5), RangeError);
  const Dispersion one({t});
  CHECK_THROWS_AS(one.n_eff(10.0), RangeError);
  CHECK_THROWS_AS(DispersionTable::load_csv("/nonexistent.csv"), ConfigError);
}

TEST_CASE("theoretical SHG efficiency") {
  ShgParams s;
  PolingSpec p;
  p.length_mm = 12;
  p.duty_cycle = 0.68;
  const double area = calibrate_effective_area(s, p, 260.0);
  s.a_eff_um2 = area;
  CHECK(std::abs(shg_efficiency_theory(s, p) - 260.0) < 1e-9);
  CHECK(area > 10);
  CHECK(area < 20);
  PolingSpec half = p;
  half.duty_cycle = 0.5;
  CHECK(std::abs(shg_efficiency_theory(s, p) / shg_efficiency_theory(s, half) - std::pow(std::sin(0.68 * kPi), 2)) < 1e-12);
  CHECK(std::abs(std::pow(std::sin(0.68 * kPi), 2) - 0.713) < 1e-3);
  CHECK(std::abs(shg_efficiency_theory(s, half) - 364.7) < 0.1);
  PolingSpec twice = p;
  twice.length_mm *= 2;
  CHECK(std::abs(shg_efficiency_theory(s, twice) / shg_efficiency_theory(s, p) - 4.0) < 1e-12);
  ShgParams scaled = s;
  scaled.a_eff_um2 *= 0.49;
  scaled.overlap *= 0.7;
  CHECK(std::abs(shg_efficiency_theory(scaled, p) / shg_efficiency_theory(s, p) - 1.0) < 1e-12);
  scaled.overlap = 1.5;
  CHECK_THROWS_AS(shg_efficiency_theory(scaled, p), ConfigError);
}

TEST_CASE("measured SHG efficiency") {
  CHECK(std::abs(shg_efficiency_measured(1e-3, 0.3185e-6, 1, 1) - 31.85) < 1e-9);
  // P_FH / eta_FH doubles at eta_FH = 0.5, so the efficiency drops fourfold
  CHECK(std::abs(shg_efficiency_measured(1e-3, 0.3185e-6, 0.5, 1) - 31.85 / 4) < 1e-9);
  CHECK(std::abs(shg_efficiency_measured(1e-3, 0.3185e-6, 1, 0.5) - 2 * 31.85) < 1e-9);
  CHECK(std::abs(shg_efficiency_measured(2e-3, 4 * 0.3185e-6, 1, 1) - 31.85) < 1e-9);
  CHECK_THROWS_AS(shg_efficiency_measured(0, 1e-6, 1, 1), ConfigError);
  CHECK_THROWS_AS(shg_efficiency_measured(1e-3, 1e-6, 1.2, 1), ConfigError);
}

TEST_CASE("joint spectral intensity") {
  const auto d = fixtures();
  const PolingSpec p = matched(d);
  const double bw = transform_limited_bandwidth(10e-12);
  CHECK(std::abs(bw - 44.13e9) < 0.05e9);
  const auto s = linspace(1541, 1559, 121);
  const auto g = jsi(d, p, 775.0, bw, s, s);
  const double c = 299792458.0;
  const double nu_p = c / 775e-9;
  double peak = 0;
  std::size_t pa = 0, pb = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (g.intensity[a][b] > peak) {
        peak = g.intensity[a][b];
        pa = a;
        pb = b;
      }
    }
  }
  CHECK(std::abs(peak - 1.0) < 1e-12);
  const double step_hz = c / (1550e-9) - c / (1550.15e-9);
  CHECK(std::abs(c / (s[pa] * 1e-9) + c / (s[pb] * 1e-9) - nu_p) < step_hz);

  // Ridge width across the anti-diagonal equals the pump bandwidth.
  const double nu_s0 = nu_p / 2 + 1e12;
  const double lam_s = c / nu_s0 * 1e9;
  std::vector<double> idl;
  for (int k = -200; k <= 200; ++k) idl.push_back(c / (nu_p / 2 - 1e12 + k * 1e9) * 1e9);
  std::sort(idl.begin(), idl.end());
  const auto row = jsi(d, p, 775.0, bw, {lam_s}, idl).intensity[0];
  int above = 0;
  for (double v : row) above += v >= 0.5;
  CHECK(std::abs(above * 1e9 - bw) <= 2e9);

  const auto delta = jsi(d, p, 775.0, 0.0, s, s);
  for (std::size_t a = 0; a < s.size(); ++a) {
    int nonzero = 0;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (delta.intensity[a][b] > 0) {
        ++nonzero;
        CHECK(std::abs(c / (s[a] * 1e-9) + c / (s[b] * 1e-9) - nu_p) < step_hz);
      }
    }
    CHECK(nonzero <= 1);
  }
}
