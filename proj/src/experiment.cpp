#include "tbent/experiment.hpp"

#include "tbent/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tbent::experiment {

namespace {

constexpr double kPi = std::numbers::pi;

detection::RunOptions run_options(std::uint64_t pulses, int threads, std::size_t stream) {
  return detection::RunOptions{pulses, threads, static_cast<std::uint64_t>(stream)};
}

detection::CountsRecord run(const ExperimentConfig& c, const detection::OpticsSetup& optics,
                            const detection::RunOptions& opts) {
  return detection::run_experiment(c.source, optics, c.losses, c.detectors, opts);
}

}  // namespace

FringeBasis fringe_basis_from_string(const std::string& name) {
  if (name == "hv") return FringeBasis::hv;
  if (name == "pm") return FringeBasis::pm;
  throw ConfigError("unknown fringe basis '" + name + "' (expected hv or pm)");
}

const char* to_string(FringeBasis basis) { return basis == FringeBasis::hv ? "hv" : "pm"; }

double signal_angle(FringeBasis basis) { return basis == FringeBasis::hv ? kPi / 4 : kPi / 8; }

FringeRun simulate_fringe(const ExperimentConfig& config, analysis::FringeOrder order, FringeBasis basis,
                          int points, std::uint64_t pulses, int threads) {
  if (points < 8) throw ConfigError("a fringe scan needs at least 8 points");
  if (pulses == 0) throw ConfigError("pulses must be positive");
  if (!config.optics.analyze_polarization) throw ConfigError("fringe scans need analyze_polarization");
  const double ts = signal_angle(basis);
  FringeRun out;
  out.scan.order = order;
  for (int k = 0; k < points; ++k) {
    const double ti = kPi * k / (points - 1);
    detection::OpticsSetup optics = config.optics;
    optics.analyzers = {optics::AnalyzerSetting{Channel::s1, ts, 0.0}, optics::AnalyzerSetting{Channel::i1, ti, 0.0},
                        optics::AnalyzerSetting{Channel::s2, ts, 0.0}, optics::AnalyzerSetting{Channel::i2, ti, 0.0}};
    optics.setting_id = "theta_i_" + std::to_string(k);
    auto rec = run(config, optics, run_options(pulses, threads, static_cast<std::size_t>(k)));
    const double v = order == analysis::FringeOrder::fourfold ? static_cast<double>(rec.fourfold)
                                                              : static_cast<double>(rec.coincidences(0, 0));
    out.scan.theta_s = ts;
    out.scan.theta_i.push_back(ti);
    out.scan.values.push_back(v);
    out.records.push_back(std::move(rec));
  }
  return out;
}

TomographyRun simulate_tomography(const ExperimentConfig& config, int qubits, analysis::TomographyScheme scheme,
                                  std::uint64_t pulses, int threads) {
  if (qubits != 2 && qubits != 4) throw ConfigError("tomography supports 2 or 4 qubits");
  if (pulses == 0) throw ConfigError("pulses must be positive");
  if (!config.optics.analyze_polarization) throw ConfigError("tomography needs analyze_polarization");
  TomographyRun out;
  out.settings = analysis::tomography_settings(qubits, scheme);
  out.input = analysis::make_tomography_input(qubits, out.settings);
  const bool two_port = scheme == analysis::TomographyScheme::pauli_bases;
  std::size_t entry = 0;
  for (std::size_t s = 0; s < out.settings.size(); ++s) {
    const auto& setting = out.settings[s];
    detection::OpticsSetup optics = config.optics;
    optics.two_port = two_port;
    for (std::size_t q = 0; q < setting.analyzers.size(); ++q) optics.analyzers[q] = setting.analyzers[q];
    optics.setting_id = setting.label;
    auto rec = run(config, optics, run_options(pulses, threads, s));
    for (unsigned o : setting.outcomes) {
      double n = 0.0;
      if (!two_port) {
        n = static_cast<double>(qubits == 2 ? rec.coincidences(0, 0) : rec.fourfold);
      } else {
        n = static_cast<double>(qubits == 2 ? rec.pair_outcomes[0][o] : rec.four_outcomes[o]);
      }
      out.input.entries[entry++].counts = n;
      out.total_counts += n;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

RateSweep simulate_rates(const ExperimentConfig& config, double lo, double hi, int n, std::uint64_t pulses,
                         int threads) {
  if (n < 1) throw ConfigError("a power sweep needs at least one point");
  if (!(lo >= 0.0) || !(hi >= lo)) throw ConfigError("power sweep needs 0 <= lo <= hi");
  if (n == 1 && hi != lo) throw ConfigError("a single-point sweep needs lo == hi");
  if (pulses == 0) throw ConfigError("pulses must be positive");
  RateSweep out;
  for (int k = 0; k < n; ++k) {
    ExperimentConfig c = config;
    c.source.pump_power = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    try {
      c.source.validate();
    } catch (const OutOfModelError& e) {
      out.warnings.push_back("sweep truncated at " + std::to_string(c.source.pump_power) + " mW: " + e.what());
      break;
    }
    RatePoint p;
    p.pump_power = c.source.pump_power;
    p.counts = run(c, c.optics, run_options(pulses, threads, static_cast<std::size_t>(k)));
    if (p.counts.coincidences(0, 0) > 0) {
      const auto pgr = detection::estimate_pgr(p.counts, 0);
      p.pgr = pgr.value;
      p.pgr_sigma = pgr.sigma;
    }
    try {
      const auto car = detection::estimate_car(p.counts, 0);
      p.car = car.value;
      p.car_sigma = car.sigma;
      p.car_lower_bound = car.lower_bound;
    } catch (const UndefinedEstimateError&) {
      p.car = std::numeric_limits<double>::quiet_NaN();
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

}  // namespace tbent::experiment
