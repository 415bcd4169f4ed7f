// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include "tbent/config.hpp"
#include "tbent/counts_io.hpp"
#include "tbent/detection.hpp"
#include "tbent/experiment.hpp"
#include "tbent/fringe.hpp"
#include "tbent/noise_model.hpp"
#include "tbent/optics.hpp"
#include "tbent/phasematch.hpp"
#include "tbent/spdc_source.hpp"
#include "tbent/tomography.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tbent;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kFixtures = TBENT_FIXTURE_DIR;
const std::string kConfigs = kFixtures + "/../configs/";

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    notes.push_back((cond ? "" : "!! ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  const double t = elapsed(t0);
  if (!c.ok) ++failures;
  std::printf("%s %d %s (%.2f s)\n", c.ok ? "PASS" : "FAIL", id, title, t);
  for (const auto& n : c.notes) std::printf("     %s\n", n.c_str());
  std::fflush(stdout);
}

phasematch::Dispersion fixture_dispersion() {
  return phasematch::Dispersion({phasematch::DispersionTable::load_csv(kFixtures + "/dispersion_pump.csv"),
                                 phasematch::DispersionTable::load_csv(kFixtures + "/dispersion_telecom.csv")});
}

Eigen::VectorXcd random_pure(int qubits, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> n;
  Eigen::VectorXcd v(1 << qubits);
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(n(eng), n(eng));
  return v.normalized();
}

double exact_mle_fidelity(int qubits, analysis::TomographyScheme scheme, const DensityMatrix& truth,
                          const Eigen::VectorXcd& target) {
  auto in = analysis::make_tomography_input(qubits, analysis::tomography_settings(qubits, scheme));
  analysis::fill_expected_counts(in, truth, 1e6);
  return fidelity(analysis::tomography_mle(in).rho, target);
}

}  // namespace

int main() {
  criterion(1, "QPM period from the two indices", [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const double period = phasematch::qpm_period_from_indices(775.0, 2.1669, 2.1152);
    const double t = elapsed(t0);
    c.require(std::abs(period / 15.0 - 1.0) < 0.005, fmt("period %.4f um vs 15 um (0.5%%)", period));
    c.require(std::abs(period - 14.99) < 0.005, fmt("period %.4f um rounds to 14.99", period));
    c.require(t < 1.0, fmt("runtime %.2e s < 1 s", t));
  });

  criterion(2, "phase-matching curve and bandwidths", [](Check& c) {
    const double length_mm = 12.0;
    const double zero = 2.0 * kPi / (length_mm * 1e3);
    c.require(phasematch::pm_intensity(zero, length_mm) < 1e-12,
              fmt("sinc^2 at |db|L/2pi = 1: %.2e", phasematch::pm_intensity(zero, length_mm)));
    bool positive = true;
    for (int k = 1; k < 1000; ++k) positive &= phasematch::pm_intensity(zero * k / 1000.0, length_mm) > 0.0;
    c.require(positive, "no earlier zero on a 1000-point grid");
    const auto d = fixture_dispersion();
    phasematch::PolingSpec p;
    p.period_um = phasematch::qpm_period(d, 775.0);
    p.length_mm = length_mm;
    const double fz = phasematch::bandwidth(d, p, 775.0, phasematch::BandwidthCriterion::first_zero);
    const double hm = phasematch::bandwidth(d, p, 775.0, phasematch::BandwidthCriterion::half_max);
    c.require(std::abs(fz / 58.0 - 1.0) <= 0.10, fmt("first-zero bandwidth %.2f THz vs 58 +- 10%%", fz));
    c.require(std::abs(hm / 36.0 - 1.0) <= 0.10, fmt("half-max bandwidth %.2f THz vs 36 +- 10%%", hm));
  });

  criterion(3, "time-bin to polarization conversion on a 5x5x5 phase grid", [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_f = 0.0, worst_p = 0.0;
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        for (int k = 0; k < 5; ++k) {
          const double pp = 2 * kPi * a / 5, ps = 2 * kPi * b / 5 + 0.1, pi = 2 * kPi * k / 5 + 0.3;
          const auto out = optics::dof_convert(source::ideal_pair_state(pp), ps, pi);
          const Eigen::VectorXcd ket = polarization_ket(out.state);
          const double f = std::norm(bell_ket(ps + pi - pp).dot(ket));
          worst_f = std::max(worst_f, std::abs(f - 1.0));
          worst_p = std::max(worst_p, std::abs(out.success_probability - 0.25));
        }
      }
    }
    const double t = elapsed(t0);
    c.require(worst_f < 1e-10, fmt("max |F - 1| = %.2e", worst_f));
    c.require(worst_p < 1e-12, fmt("max |p_success - 0.25| = %.2e", worst_p));
    c.require(t < 1.0, fmt("runtime %.3f s < 1 s", t));
  });

  criterion(4, "noiseless four-photon fringe", [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load_config(kConfigs + "noiseless.json");
    const auto run = experiment::simulate_fringe(cfg, analysis::FringeOrder::fourfold, experiment::FringeBasis::pm,
                                                 37, 1'000'000, 0);
    const auto fit = analysis::fit_fringe(run.scan);
    const double t = elapsed(t0);
    const double expected_phase = 2.0 * experiment::signal_angle(experiment::FringeBasis::pm);
    c.require(fit.r_squared > 0.99, fmt("R^2 = %.6f", fit.r_squared));
    c.require(fit.visibility > 0.999, fmt("V = %.6f", fit.visibility));
    c.require(std::abs(fit.phase - expected_phase) < 0.01, fmt("fitted phase %.4f rad vs %.4f", fit.phase, expected_phase));
    c.require(t < 60.0, fmt("runtime %.1f s < 60 s", t));
  });

  criterion(5, "Klyshko pair rate under efficiency scaling", [](Check& c) {
    source::SourceConfig src;
    src.pump_power = source::power_for_mean_pairs(src, 0, 0.01);
    detection::OpticsSetup optics;
    optics.setup = detection::Setup::characterization;
    const double truth = src.pgr_slope[0] * 1e6 * src.pump_power;
    std::vector<detection::PgrEstimate> est;
    for (double f : {1.0, 0.5, 0.1}) {
      detection::LossBudget l;
      l.channel_scale = {f, f, f, f};
      const auto rec = detection::run_experiment(src, optics, l, detection::DetectorModel{},
                                                 detection::RunOptions{10'000'000, 0, 5});
      const auto p = detection::estimate_pgr(rec, 0);
      est.push_back(p);
      c.require(std::abs(p.value - truth) < 3 * p.sigma,
                fmt("eta x %.1f: PGR %.4g +- %.2g Hz", f, p.value, p.sigma) +
                    fmt(" vs slope x power %.4g Hz", truth));
      const double slope = p.value / (src.pump_power * 1e6);
      c.require(std::abs(slope - src.pgr_slope[0]) < 3 * p.sigma / (src.pump_power * 1e6),
                fmt("   slope %.2f MHz/mW vs %.0f", slope, src.pgr_slope[0]));
    }
    for (std::size_t k = 1; k < est.size(); ++k) {
      const double s = std::hypot(est[0].sigma, est[k].sigma);
      c.require(std::abs(est[k].value - est[0].value) < 3 * s,
                fmt("invariance %.0f vs 0: difference %.3g, 3 sigma %.3g", static_cast<double>(k),
                    est[k].value - est[0].value, 3 * s));
    }
  });

  criterion(6, "coincidence-to-accidental ratio", [](Check& c) {
    source::SourceConfig src;
    detection::OpticsSetup optics;
    optics.setup = detection::Setup::characterization;
    auto car_at = [&](double mu, std::uint64_t stream) {
      source::SourceConfig s = src;
      s.pump_power = source::power_for_mean_pairs(s, 0, mu);
      const auto rec = detection::run_experiment(s, optics, detection::LossBudget{}, detection::DetectorModel{},
                                                 detection::RunOptions{10'000'000, 0, stream});
      return detection::estimate_car(rec, 0);
    };
    const auto c05 = car_at(0.05, 61);
    c.require(!c05.lower_bound && std::abs(c05.value * 0.05 - 1.0) < 0.15,
              fmt("CAR(0.05) = %.2f +- %.2f vs 1/mu = 20 (15%%)", c05.value, c05.sigma));
    const auto c02 = car_at(0.02, 62);
    const auto c10 = car_at(0.10, 63);
    const double s = std::hypot(c02.sigma, c10.sigma);
    c.require(c02.value - c10.value > 3 * s,
              fmt("CAR(0.02) = %.2f, CAR(0.1) = %.2f, 3 sigma = %.2f", c02.value, c10.value, 3 * s));
  });

  criterion(7, "tomography round trip", [](Check& c) {
    using analysis::TomographyScheme;
    const Eigen::VectorXcd bell = bell_ket();
    const double f_bell = exact_mle_fidelity(2, TomographyScheme::projectors, DensityMatrix::from_ket(bell), bell);
    c.require(f_bell >= 0.9999, fmt("2 qubits, Bell truth: F = %.8f", f_bell));
    const Eigen::VectorXcd psi = random_pure(2, 11);
    const double f_rand = exact_mle_fidelity(2, TomographyScheme::projectors, DensityMatrix::from_ket(psi), psi);
    c.require(f_rand >= 0.9999, fmt("2 qubits, random pure truth: F = %.8f", f_rand));

    const double v = 0.832;
    const double f_werner = exact_mle_fidelity(2, TomographyScheme::projectors, analysis::werner_state(v), bell);
    const double closed = analysis::werner_fidelity(v);
    c.require(std::abs(f_werner - closed) < 5e-3 && std::abs(f_werner - 0.874) < 5e-3,
              fmt("Werner v = 0.832: F = %.5f, closed form %.5f, target 0.874", f_werner, closed));

    const auto preset = load_config(kConfigs + "calibrated_noise.json");
    const auto nb = analysis::noise_breakdown(preset.source, preset.optics, preset.losses, preset.detectors);
    const double f_preset = fidelity(
        analysis::predict_state_under_noise(preset.source, preset.optics, preset.losses, preset.detectors, 2),
        analysis::ideal_target(2, nb.phase));
    c.require(std::abs(f_preset - 0.874) < 5e-3, fmt("calibrated noise preset, predicted state: F = %.5f", f_preset));

    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXcd bell2 = analysis::ideal_target(4);
    const double f4 = exact_mle_fidelity(4, TomographyScheme::pauli_bases, DensityMatrix::from_ket(bell2), bell2);
    const double t4 = elapsed(t0);
    c.require(f4 >= 0.999, fmt("4 qubits, 81 Pauli settings: F = %.6f", f4));
    c.require(t4 < 600.0, fmt("4-qubit runtime %.1f s < 600 s", t4));
  });

  criterion(8, "fourfold rate at the nominal operating point", [](Check& c) {
    const auto cfg = load_config(kConfigs + "default.json");
    detection::OpticsSetup optics = cfg.optics;
    optics.analyze_polarization = false;
    c.require(std::abs(detection::channel_transmission_db(cfg.losses, optics) - 12.5) < 1e-12 &&
                  std::abs(cfg.losses.total_db() - 15.5) < 1e-12,
              "15.5 dB budget, 12.5 dB applied as loss with the 3 dB line taken by post-selection");
    const double oracle = detection::fourfold_rate_oracle(cfg.source, cfg.losses);
    const auto e = detection::expected_rates(cfg.source, optics, cfg.losses, cfg.detectors);
    const double predicted = e.per_second(e.fourfold);
    // The product oracle counts one pair per channel pair; the model converges
    // to it at low power and exceeds it by about (1 + mu1)(1 + mu2) from
    // multi-pair accidentals at the operating point.
    source::SourceConfig dim = cfg.source;
    dim.pump_power *= 0.005;
    const auto ed = detection::expected_rates(dim, optics, cfg.losses, cfg.detectors);
    const double low_ratio = ed.per_second(ed.fourfold) / detection::fourfold_rate_oracle(dim, cfg.losses);
    c.require(std::abs(low_ratio - 1.0) < 2e-3, fmt("at 0.5%% power: model / oracle = %.5f", low_ratio));
    const double multi = (1.0 + source::mean_pairs(cfg.source, 0)) * (1.0 + source::mean_pairs(cfg.source, 1));
    c.require(std::abs(predicted / oracle / multi - 1.0) < 0.02,
              fmt("analytic model %.4f Hz, oracle %.4f Hz, ratio %.4f", predicted, oracle, predicted / oracle) +
                  fmt(" vs multi-pair factor %.4f (2%%)", multi));
    c.require(predicted > 1.0 / 3 && predicted < 3.0, fmt("predicted fourfold rate %.3f Hz within x3 of 1 Hz", predicted));

    // The Monte Carlo agrees with the same analytic model where fourfolds are frequent.
    ExperimentConfig bright = cfg;
    bright.losses = detection::LossBudget::lossless();
    bright.losses.channel_scale = {0.6, 0.5, 0.7, 0.55};
    const std::uint64_t pulses = 4'000'000;
    const auto eb = detection::expected_rates(bright.source, optics, bright.losses, bright.detectors);
    const auto rec = detection::run_experiment(bright.source, optics, bright.losses, bright.detectors,
                                               detection::RunOptions{pulses, 0, 81});
    const double expect = eb.fourfold * static_cast<double>(pulses);
    const double seen = static_cast<double>(rec.fourfold);
    c.require(std::abs(seen - expect) < 3 * std::sqrt(expect),
              fmt("Monte Carlo fourfolds %.0f vs analytic %.1f (3 sigma %.1f)", seen, expect, 3 * std::sqrt(expect)));
  });

  criterion(9, "determinism across runs and worker counts", [](Check& c) {
    const auto cfg = load_config(kConfigs + "calibrated_noise.json");
    auto csv_of = [&](int threads) {
      const auto run = experiment::simulate_fringe(cfg, analysis::FringeOrder::twofold, experiment::FringeBasis::hv,
                                                   9, 300'000, threads);
      std::ostringstream os;
      detection::write_counts_csv(os, run.records);
      return os.str();
    };
    const std::string a = csv_of(1), b = csv_of(1), t2 = csv_of(2), t4 = csv_of(4);
    c.require(a == b, "fringe counts CSV identical across two runs");
    c.require(a == t2 && a == t4, "fringe counts CSV identical for 1, 2 and 4 workers");
    auto tomo_json = [&](int threads) {
      const auto r = experiment::simulate_tomography(cfg, 2, analysis::TomographyScheme::pauli_bases, 200'000, threads);
      return analysis::tomography_input_to_json(r.input).dump();
    };
    c.require(tomo_json(1) == tomo_json(3), "tomography counts identical for 1 and 3 workers");
    const auto rec1 = detection::run_experiment(cfg.source, cfg.optics, cfg.losses, cfg.detectors,
                                                detection::RunOptions{1'000'000, 1, 9});
    const auto rec8 = detection::run_experiment(cfg.source, cfg.optics, cfg.losses, cfg.detectors,
                                                detection::RunOptions{1'000'000, 8, 9});
    c.require(detection::counts_to_json(rec1) == detection::counts_to_json(rec8),
              "counts record identical for 1 and 8 workers");
  });

  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
