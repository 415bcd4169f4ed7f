#pragma once

#include "tbent/optics.hpp"
#include "tbent/spdc_source.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace tbent::detection {

inline constexpr int kMaxDelayBin = 5;
inline constexpr int kDelayBins = 2 * kMaxDelayBin + 1;

/// Per-stage loss in dB, identical for every channel.
struct LossBudget {
  double coupling = 4.0;
  double umzi_insertion = 2.7;
  double dof_conversion = 3.0;
  double cwdm = 1.5;
  double analyzer = 2.5;
  double fiber_to_detector = 0.8;
  double detector = 1.0;
  /// Extra multiplicative efficiency per channel (s1, i1, s2, i2).
  std::array<double, 4> channel_scale{1.0, 1.0, 1.0, 1.0};

  double total_db() const;
  static LossBudget lossless();
};

struct DetectorModel {
  double dark_count_rate = 100.0;   // Hz per detector
  double coincidence_window = 1e-9;  // s
  double dead_time = 0.0;            // s

  void validate(double rep_rate) const;
  /// Probability of at least one dark count inside one window.
  double dark_probability() const;
};

enum class Setup {
  /// Modulated pump, converter interferometer, polarization analysis.
  entanglement,
  /// Pump straight into the chip, CWDM and detectors only.
  characterization,
};

struct OpticsSetup {
  Setup setup = Setup::entanglement;
  /// Simulate the middle-bin projection explicitly. When false the
  /// post-selection appears only as the dof_conversion loss line.
  bool explicit_postselection = true;
  /// Project through the analyzer plates; false sends every photon to the
  /// transmitted detector.
  bool analyze_polarization = true;
  /// Also detect the reflected PBS port.
  bool two_port = false;
  optics::UmziConfig modulator = optics::UmziConfig::modulator(0.0);
  optics::UmziConfig converter = optics::UmziConfig::converter(0.0, 0.0);
  /// Analyzer plates for s1, i1, s2, i2.
  std::array<optics::AnalyzerSetting, 4> analyzers{
      optics::AnalyzerSetting{Channel::s1}, optics::AnalyzerSetting{Channel::i1},
      optics::AnalyzerSetting{Channel::s2}, optics::AnalyzerSetting{Channel::i2}};
  std::string setting_id = "default";

  void validate() const;
};

/// Transmission of one channel (before channel_scale) for the given setup.
double channel_transmission_db(const LossBudget& losses, const OpticsSetup& optics);

struct CountsRecord {
  static constexpr int kSchemaVersion = 1;
  std::string setting_id;
  std::uint64_t pulses = 0;
  double duration = 0.0;  // s
  /// Transmitted-port clicks per channel s1, i1, s2, i2.
  std::array<std::uint64_t, 4> singles{};
  /// Per channel pair, C(n) = #{t : signal clicks at t and idler at t+n}, n in [-5, 5].
  std::array<std::array<std::uint64_t, kDelayBins>, 2> twofold{};
  std::uint64_t fourfold = 0;
  /// Two-port outcome histograms at zero delay. Index bit set = reflected
  /// port; pair index is (s << 1 | i), four-photon index (s1 i1 s2 i2).
  std::array<std::array<std::uint64_t, 4>, 2> pair_outcomes{};
  std::array<std::uint64_t, 16> four_outcomes{};

  std::uint64_t coincidences(int channel_pair, int delay) const;
  double rate(std::uint64_t count) const { return duration > 0 ? count / duration : 0.0; }
};

struct RunOptions {
  std::uint64_t pulses = 1'000'000;
  int threads = 1;  // 0 = available parallelism
  /// Distinguishes independent runs sharing one master seed (e.g. setting index).
  std::uint64_t stream_id = 0;
};

/// Pulse-by-pulse Monte Carlo: emission, conversion, analysis, loss, darks,
/// and coincidence tallies including delayed bins. Results depend only on
/// (config, seed, stream_id), not on the thread count.
CountsRecord run_experiment(const source::SourceConfig& source, const OpticsSetup& optics,
                            const LossBudget& losses, const DetectorModel& detectors,
                            const RunOptions& options);

/// Joint outcome probabilities of one emitted pair before loss.
/// Outcome index per photon: 0 = gated out, 1 = transmitted port, 2 = reflected port.
/// Each entry is a + Re(b e^{i delta}) in the pump-phase jitter delta.
class PairOutcomeTable {
 public:
  PairOutcomeTable(const OpticsSetup& optics, double phase_p, int channel_pair);

  std::array<double, 9> at(double jitter) const;
  double mean(int s_outcome, int i_outcome) const { return a_[idx(s_outcome, i_outcome)]; }

 private:
  static std::size_t idx(int s, int i) { return static_cast<std::size_t>(3 * s + i); }
  std::array<double, 9> a_{};
  std::array<Complex, 9> b_{};
};

/// Exact per-pulse expectation of the tallied events for the same model the
/// Monte Carlo samples (dead time excluded).
struct ExpectedRates {
  std::array<double, 4> singles{};          // per pulse
  std::array<double, 2> twofold_zero{};     // per pulse
  std::array<double, 2> twofold_delayed{};  // per pulse, any n != 0
  double fourfold = 0.0;                    // per pulse
  double rep_rate = 0.0;

  double per_second(double per_pulse) const { return per_pulse * rep_rate; }
};

ExpectedRates expected_rates(const source::SourceConfig& source, const OpticsSetup& optics,
                             const LossBudget& losses, const DetectorModel& detectors);

/// Simple product-form estimate rep * mu1 * mu2 * p_ps^2 * eta^4 for the
/// fourfold rate without polarization projection.
double fourfold_rate_oracle(const source::SourceConfig& source, const LossBudget& losses);

struct PgrEstimate {
  double value = 0.0;  // Hz
  double sigma = 0.0;  // Hz
};

/// Klyshko pair-rate estimate C_s C_i / C_si(0).
PgrEstimate estimate_pgr(const CountsRecord& counts, int channel_pair);

struct CarEstimate {
  double value = 0.0;
  double sigma = 0.0;
  /// Set when no accidentals were recorded; `value` is then a lower bound.
  bool lower_bound = false;
};

/// (C(0) - C(dt)) / C(dt) with C(dt) the mean of the n = +-1 bins.
CarEstimate estimate_car(const CountsRecord& counts, int channel_pair);

}  // namespace tbent::detection
