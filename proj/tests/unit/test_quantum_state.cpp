#include <doctest.h>

#include "tbent/errors.hpp"
#include "tbent/quantum_state.hpp"
#include "tbent/state_json.hpp"

#include <cmath>
#include <numbers>

using namespace tbent;

namespace {

ModeLabel photon(Channel c, TimeBin b, Polarization p = Polarization::H, std::uint8_t copy = 0) {
  return {c, copy, b, p, PathTag::none};
}

PureState phi2() {
  const double r = 1.0 / std::sqrt(2.0);
  return PureState::from_terms({
      {{photon(Channel::s1, TimeBin::middle, Polarization::H), photon(Channel::i1, TimeBin::middle, Polarization::H)}, r},
      {{photon(Channel::s1, TimeBin::middle, Polarization::V), photon(Channel::i1, TimeBin::middle, Polarization::V)}, r},
  });
}

PureState time_bin_pair(double phi, Channel s, Channel i) {
  const double r = 1.0 / std::sqrt(2.0);
  return PureState::from_terms({
      {{photon(s, TimeBin::early), photon(i, TimeBin::early)}, r},
      {{photon(s, TimeBin::late), photon(i, TimeBin::late)}, std::polar(r, phi)},
  });
}

}  // namespace

TEST_CASE("tensor of unit kets has unit amplitude") {
  const auto a = PureState::single(photon(Channel::s1, TimeBin::early));
  const auto b = PureState::single(photon(Channel::i1, TimeBin::early));
  const auto t = tensor(a, b);
  CHECK(t.size() == 1);
  CHECK(t.photon_count() == 2);
  CHECK(std::abs(t.amplitude({photon(Channel::s1, TimeBin::early), photon(Channel::i1, TimeBin::early)}) - 1.0) < 1e-15);
}

TEST_CASE("two time-bin pairs expand into four terms") {
  const double phi = 0.7;
  const auto t = tensor(time_bin_pair(phi, Channel::s1, Channel::i1), time_bin_pair(phi, Channel::s2, Channel::i2));
  REQUIRE(t.size() == 4);
  auto amp = [&](TimeBin b1, TimeBin b2) {
    return t.amplitude({photon(Channel::s1, b1), photon(Channel::i1, b1), photon(Channel::s2, b2), photon(Channel::i2, b2)});
  };
  CHECK(std::abs(amp(TimeBin::early, TimeBin::early) - 0.5) < 1e-12);
  CHECK(std::abs(amp(TimeBin::early, TimeBin::late) - std::polar(0.5, phi)) < 1e-12);
  CHECK(std::abs(amp(TimeBin::late, TimeBin::early) - std::polar(0.5, phi)) < 1e-12);
  CHECK(std::abs(amp(TimeBin::late, TimeBin::late) - std::polar(0.5, 2 * phi)) < 1e-12);
  CHECK(std::abs(t.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("tensor is associative up to canonical ordering") {
  const auto a = time_bin_pair(0.3, Channel::s1, Channel::i1);
  const auto b = PureState::single(photon(Channel::s2, TimeBin::late));
  const auto c = PureState::single(photon(Channel::i2, TimeBin::early, Polarization::V));
  const auto l = tensor(tensor(a, b), c);
  const auto r = tensor(a, tensor(c, b));
  CHECK(std::abs(inner(l, r) - 1.0) < 1e-12);
}

TEST_CASE("tensor rejects overlapping photons") {
  const auto a = PureState::single(photon(Channel::s1, TimeBin::early));
  CHECK_THROWS_AS(tensor(a, a), LabelCollisionError);
}

TEST_CASE("inner products") {
  const auto p = phi2();
  CHECK(std::abs(inner(p, p) - 1.0) < 1e-12);
  const auto hh = PureState::from_terms(
      {{{photon(Channel::s1, TimeBin::middle), photon(Channel::i1, TimeBin::middle)}, 1.0}});
  const auto vv = PureState::from_terms({{{photon(Channel::s1, TimeBin::middle, Polarization::V),
                                           photon(Channel::i1, TimeBin::middle, Polarization::V)},
                                          1.0}});
  CHECK(std::abs(inner(hh, vv)) < 1e-15);
  CHECK_THROWS_AS(inner(hh, PureState::single(photon(Channel::s1, TimeBin::middle))), DimensionError);
  const Complex z = inner(p.scaled(Complex(0, 2)), p);
  CHECK(std::abs(z - Complex(0, -2)) < 1e-12);
}

TEST_CASE("from_terms sums duplicates coherently and checks arity") {
  const auto a = photon(Channel::s1, TimeBin::early);
  const auto s = PureState::from_terms({{{a}, 0.5}, {{a}, -0.5}});
  CHECK(s.empty());
  CHECK_THROWS_AS(PureState::from_terms({{{a}, 1.0}, {{a, photon(Channel::i1, TimeBin::early)}, 1.0}}), ArityError);
}

TEST_CASE("canonicalize makes the first amplitude real positive") {
  const auto s = phi2().scaled(std::polar(1.0, 1.1)).canonicalized();
  const Complex first = s.terms().begin()->second;
  CHECK(std::abs(first.imag()) < 1e-15);
  CHECK(first.real() > 0);
}

TEST_CASE("to_density examples") {
  const auto h = PureState::single(photon(Channel::s1, TimeBin::middle));
  const auto rh = to_density(h);
  CHECK(rh.dim() == 2);
  CHECK(std::abs(rh.matrix()(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(rh.matrix()(1, 1)) < 1e-15);

  const auto rb = to_density(phi2());
  for (int a : {0, 3}) {
    for (int b : {0, 3}) CHECK(std::abs(rb.matrix()(a, b) - 0.5) < 1e-12);
  }
  CHECK(std::abs(rb.trace() - 1.0) < 1e-12);
  CHECK(std::abs(rb.purity() - 1.0) < 1e-12);

  const auto rr = to_density(phi2().scaled(3.0).normalized());
  CHECK((rr.matrix() - rb.matrix()).norm() < 1e-12);
}

TEST_CASE("to_density rejects time-bin structure") {
  const auto mixed = PureState::from_terms({
      {{photon(Channel::s1, TimeBin::early)}, 1.0},
      {{photon(Channel::s1, TimeBin::late)}, 1.0},
  });
  CHECK_THROWS_AS(to_density(mixed.normalized()), UnresolvedDofError);
}

TEST_CASE("fidelity examples") {
  const auto b = bell_ket();
  const auto rho = DensityMatrix::from_ket(b);
  CHECK(std::abs(fidelity(rho, phi2()) - 1.0) < 1e-12);
  CHECK(std::abs(fidelity(DensityMatrix::maximally_mixed(2), b) - 0.25) < 1e-12);
  const auto w = rho.mixed_with(DensityMatrix::maximally_mixed(2), 0.832);
  CHECK(std::abs(fidelity(w, b) - 0.874) < 1e-12);
  CHECK_THROWS_AS(fidelity(DensityMatrix::maximally_mixed(1), b), DimensionError);
}

TEST_CASE("fidelity is independent of qubit ordering") {
  Eigen::VectorXcd ket(16);
  for (int k = 0; k < 16; ++k) ket(k) = Complex(std::cos(0.3 * k), std::sin(0.7 * k * k));
  ket.normalize();
  const auto pure = DensityMatrix::from_ket(ket);
  const auto rho = pure.mixed_with(DensityMatrix::maximally_mixed(4), 0.6);
  Eigen::VectorXcd target = kron(bell_ket(0.4), bell_ket(1.2));
  const std::array<int, 4> perm{2, 0, 3, 1};
  const double f0 = fidelity(rho, target);
  const double f1 = fidelity(permute_qubits(rho, perm), permute_qubits(target, perm));
  CHECK(std::abs(f0 - f1) < 1e-12);
}

TEST_CASE("density invariants are enforced") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), NumericError);
  m(0, 0) = 1.2;
  m(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), NumericError);
  const auto fixed = DensityMatrix::project_physical(m);
  CHECK(fixed.min_eigenvalue() >= -1e-12);
  CHECK(std::abs(fixed.trace() - 1.0) < 1e-12);
  Eigen::MatrixXcd odd = Eigen::MatrixXcd::Identity(3, 3) / 3.0;
  CHECK_THROWS(DensityMatrix::from_matrix(odd));
}

TEST_CASE("label strings round-trip") {
  const ModeLabel m{Channel::i2, 2, TimeBin::late_early, Polarization::V, PathTag::long_arm};
  CHECK(parse_mode_label(to_string(m)) == m);
  CHECK_THROWS(parse_channel("x9"));
}

TEST_CASE("state and density JSON round-trip") {
  const auto s = tensor(time_bin_pair(0.9, Channel::s1, Channel::i1), PureState::single(photon(Channel::s2, TimeBin::late, Polarization::V, 1)));
  const auto back = state_from_json(state_to_json(s));
  CHECK(std::abs(inner(s, back) - 1.0) < 1e-12);
  const auto rho = DensityMatrix::from_ket(bell_ket(0.3)).mixed_with(DensityMatrix::maximally_mixed(2), 0.7);
  const auto j = density_to_json(rho, {"s1", "i1"});
  CHECK(j["qubit_order"][1] == "i1");
  CHECK((density_from_json(j).matrix() - rho.matrix()).norm() < 1e-14);
  auto bad = state_to_json(s);
  bad["schema"] = "other";
  CHECK_THROWS(state_from_json(bad));
}
