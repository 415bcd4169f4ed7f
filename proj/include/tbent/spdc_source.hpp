#pragma once

#include "tbent/quantum_state.hpp"
#include "tbent/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tbent::source {

/// Pair-number statistics per pulse and channel pair.
enum class PairStatistics {
  poisson,  // multimode broadband emission (default)
  thermal,  // single-mode limit, for sensitivity checks
  single,   // exactly one pair every pulse; the noiseless reference
};

const char* to_string(PairStatistics s);
PairStatistics parse_statistics(const std::string& text);

struct SourceConfig {
  double rep_rate = 1e8;                       // Hz
  double pump_power = 0.08;                    // mW, on chip
  std::array<double, 2> pgr_slope{120.0, 90.0};  // MHz/mW per channel pair
  double phase_p = 0.0;                        // rad
  double phase_jitter_std = 0.0;               // rad
  int max_pairs_per_pulse = 3;
  PairStatistics statistics = PairStatistics::poisson;
  std::uint64_t seed = 20240601;

  /// Throws OutOfModelError for mu >= 1 and ConfigError for malformed fields.
  void validate() const;
};

/// mu = slope * power / rep_rate for channel pair 0 (s1,i1) or 1 (s2,i2).
double mean_pairs(const SourceConfig& config, int channel_pair);

/// Pump power that yields mean pair number `mu` in the given channel pair.
double power_for_mean_pairs(const SourceConfig& config, int channel_pair, double mu);

/// Truncated pair-number distribution; the tail beyond the truncation is
/// lumped onto the last retained value.
class PairNumberDistribution {
 public:
  PairNumberDistribution(PairStatistics statistics, double mean, int max_pairs);

  double pmf(int k) const;
  int max_pairs() const { return static_cast<int>(pmf_.size()) - 1; }
  double mean() const;
  /// Probability mass beyond the truncation point of the untruncated law.
  double truncated_tail() const { return tail_; }
  /// E[z^K] of the truncated law.
  double generating_function(double z) const;
  /// Inversion sampling from a uniform in [0, 1).
  int sample(double u) const;
  /// Sample conditioned on K >= 1.
  int sample_nonzero(double u) const;
  double probability_nonzero() const { return 1.0 - pmf_[0]; }

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double tail_ = 0.0;
};

/// (|e_s e_i> + e^{i phi_p} |l_s l_i>)/sqrt(2) (x) |V_s V_i> on channel pair 0 or 1.
PureState ideal_pair_state(double phi_p, int channel_pair = 0, std::uint8_t copy = 0);

struct PulseEmission {
  std::array<int, 2> pairs{0, 0};
  double phase_offset = 0.0;  // jitter added to phi_p for every pair of this pulse
  PureState state;            // tensor of all emitted pairs, vacuum when none
};

PulseEmission sample_pulse(const SourceConfig& config, rng::Stream& stream);

}  // namespace tbent::source
