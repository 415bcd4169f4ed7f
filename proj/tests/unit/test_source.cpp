#include <doctest.h>

#include "tbent/errors.hpp"
#include "tbent/rng.hpp"
#include "tbent/spdc_source.hpp"

#include <cmath>
#include <numbers>

using namespace tbent;
using namespace tbent::source;

TEST_CASE("mean pair numbers") {
  SourceConfig c;
  c.pump_power = 0.1;
  CHECK(std::abs(mean_pairs(c, 0) - 0.12) < 1e-15);
  c.pump_power = 0.0;
  CHECK(mean_pairs(c, 0) == 0.0);
  c.pump_power = 0.08;
  CHECK(std::abs(mean_pairs(c, 1) - 0.072) < 1e-15);
  c.pump_power = 1.0;
  CHECK_THROWS_AS(mean_pairs(c, 0), OutOfModelError);
  CHECK_THROWS_AS(c.validate(), OutOfModelError);
  CHECK(std::abs(power_for_mean_pairs(SourceConfig{}, 0, 0.05) - 0.05e8 / 120e6) < 1e-15);
}

TEST_CASE("ideal pair state amplitudes") {
  const double r = 1 / std::sqrt(2.0);
  const std::array<Complex, 3> late{Complex(r), Complex(0, r), Complex(-r)};
  const std::array<double, 3> phases{0.0, std::numbers::pi / 2, std::numbers::pi};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto s = ideal_pair_state(phases[k]);
    const ModeLabel se{Channel::s1, 0, TimeBin::early, Polarization::V, PathTag::none};
    const ModeLabel ie{Channel::i1, 0, TimeBin::early, Polarization::V, PathTag::none};
    ModeLabel sl = se, il = ie;
    sl.timebin = il.timebin = TimeBin::late;
    CHECK(std::abs(s.amplitude({se, ie}) - r) < 1e-15);
    CHECK(std::abs(s.amplitude({sl, il}) - late[k]) < 1e-15);
  }
}

TEST_CASE("truncated distribution") {
  const PairNumberDistribution d(PairStatistics::poisson, 0.15, 3);
  CHECK(d.truncated_tail() < 1e-4);
  double total = 0;
  for (int k = 0; k <= 3; ++k) total += d.pmf(k);
  CHECK(std::abs(total - 1.0) < 1e-15);
  CHECK(std::abs(d.generating_function(1.0) - 1.0) < 1e-15);
  CHECK(std::abs(d.generating_function(0.0) - std::exp(-0.15)) < 1e-15);
  const PairNumberDistribution t(PairStatistics::thermal, 0.1, 6);
  CHECK(std::abs(t.mean() - 0.1) < 1e-5);
  const PairNumberDistribution one(PairStatistics::single, 0.0, 3);
  CHECK(one.pmf(1) == 1.0);
  CHECK(one.sample(0.999) == 1);
  CHECK(d.sample_nonzero(0.0) == 1);
}

TEST_CASE("zero mean never emits") {
  SourceConfig c;
  c.pump_power = 0.0;
  rng::Stream s(1);
  for (int k = 0; k < 1000; ++k) {
    const auto e = sample_pulse(c, s);
    CHECK(e.pairs[0] == 0);
    CHECK(e.pairs[1] == 0);
  }
}

TEST_CASE("sampled statistics match Poisson") {
  SourceConfig c;
  c.pgr_slope = {100.0, 100.0};
  c.pump_power = 0.1;  // mu = 0.1 on both channel pairs
  rng::Stream s(7);
  const int n = 1'000'000;
  double m0 = 0, m1 = 0, m01 = 0;
  long both = 0;
  for (int k = 0; k < n; ++k) {
    const PairNumberDistribution d(c.statistics, 0.1, c.max_pairs_per_pulse);
    const int a = d.sample(s.uniform());
    const int b = d.sample(s.uniform());
    m0 += a;
    m1 += b;
    m01 += a * b;
    both += (a > 0 && b > 0);
  }
  m0 /= n;
  m1 /= n;
  const double sem = std::sqrt(0.1 / n);
  CHECK(std::abs(m0 - 0.1) < 3 * sem);
  const double cov = m01 / n - m0 * m1;
  CHECK(std::abs(cov) < 3 * 0.1 / std::sqrt(static_cast<double>(n)));
  const double p = std::pow(1 - std::exp(-0.1), 2);
  CHECK(std::abs(static_cast<double>(both) / n - p) < 3 * std::sqrt(p / n));
  CHECK(std::abs(p - 9.06e-3) < 1e-5);
}

TEST_CASE("sample_pulse builds distinguishable copies") {
  SourceConfig c;
  c.statistics = PairStatistics::single;
  rng::Stream s(3);
  const auto e = sample_pulse(c, s);
  CHECK(e.pairs[0] == 1);
  CHECK(e.pairs[1] == 1);
  CHECK(e.state.photon_count() == 4);
  CHECK(std::abs(e.state.norm_squared() - 1.0) < 1e-12);
  // jitter zero: each pair equals the ideal state exactly
  const auto expect = tensor(ideal_pair_state(0.0, 0), ideal_pair_state(0.0, 1));
  CHECK(std::abs(std::abs(inner(expect, e.state)) - 1.0) < 1e-12);
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(rng::derive_seed(5, {1, 2}) == rng::derive_seed(5, {1, 2}));
  CHECK(rng::derive_seed(5, {1, 2}) != rng::derive_seed(5, {2, 1}));
  rng::Stream a(9), b(9);
  for (int k = 0; k < 10; ++k) CHECK(a.normal() == b.normal());
}
