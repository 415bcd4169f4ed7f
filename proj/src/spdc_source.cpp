#include "tbent/spdc_source.hpp"

#include "tbent/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tbent::source {

const char* to_string(PairStatistics s) {
  switch (s) {
    case PairStatistics::poisson: return "poisson";
    case PairStatistics::thermal: return "thermal";
    case PairStatistics::single: return "single";
  }
  return "?";
}

PairStatistics parse_statistics(const std::string& text) {
  if (text == "poisson") return PairStatistics::poisson;
  if (text == "thermal") return PairStatistics::thermal;
  if (text == "single") return PairStatistics::single;
  throw ConfigError("unknown pair statistics '" + text + "'");
}

void SourceConfig::validate() const {
  if (!(rep_rate > 0.0)) throw ConfigError("rep_rate must be positive");
  if (!(pump_power >= 0.0)) throw ConfigError("pump_power must be non-negative");
  if (max_pairs_per_pulse < 2) throw ConfigError("max_pairs_per_pulse must be at least 2");
  if (!(phase_jitter_std >= 0.0)) throw ConfigError("phase_jitter_std must be non-negative");
  for (int j = 0; j < 2; ++j) {
    if (!(pgr_slope[static_cast<std::size_t>(j)] >= 0.0)) {
      throw ConfigError("pgr_slope must be non-negative");
    }
    (void)mean_pairs(*this, j);
  }
}

double mean_pairs(const SourceConfig& config, int channel_pair) {
  if (channel_pair < 0 || channel_pair > 1) throw ConfigError("channel pair index must be 0 or 1");
  if (config.pump_power < 0.0) throw ConfigError("pump power must be non-negative");
  const double mu =
      config.pgr_slope[static_cast<std::size_t>(channel_pair)] * 1e6 * config.pump_power /
      config.rep_rate;
  if (mu >= 1.0 && config.statistics != PairStatistics::single) {
    throw OutOfModelError("mean pair number " + std::to_string(mu) +
                          " per pulse leaves the perturbative regime");
  }
  return mu;
}

double power_for_mean_pairs(const SourceConfig& config, int channel_pair, double mu) {
  return mu * config.rep_rate / (config.pgr_slope[static_cast<std::size_t>(channel_pair)] * 1e6);
}

PairNumberDistribution::PairNumberDistribution(PairStatistics statistics, double mean,
                                               int max_pairs) {
  if (max_pairs < 1) throw ConfigError("truncation must keep at least one pair");
  pmf_.assign(static_cast<std::size_t>(max_pairs) + 1, 0.0);
  switch (statistics) {
    case PairStatistics::single:
      pmf_[1] = 1.0;
      break;
    case PairStatistics::poisson: {
      double term = std::exp(-mean);
      for (int k = 0; k <= max_pairs; ++k) {
        pmf_[static_cast<std::size_t>(k)] = term;
        term *= mean / (k + 1);
      }
      break;
    }
    case PairStatistics::thermal: {
      const double r = mean / (1.0 + mean);
      double term = 1.0 / (1.0 + mean);
      for (int k = 0; k <= max_pairs; ++k) {
        pmf_[static_cast<std::size_t>(k)] = term;
        term *= r;
      }
      break;
    }
  }
  double kept = 0.0;
  for (double p : pmf_) kept += p;
  tail_ = std::max(0.0, 1.0 - kept);
  pmf_.back() += tail_;
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    cdf_[k] = acc;
  }
  cdf_.back() = 1.0;
}

double PairNumberDistribution::pmf(int k) const {
  if (k < 0 || k > max_pairs()) return 0.0;
  return pmf_[static_cast<std::size_t>(k)];
}

double PairNumberDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<double>(k) * pmf_[k];
  return m;
}

double PairNumberDistribution::generating_function(double z) const {
  double acc = 0.0;
  double zk = 1.0;
  for (double p : pmf_) {
    acc += p * zk;
    zk *= z;
  }
  return acc;
}

int PairNumberDistribution::sample(double u) const {
  for (std::size_t k = 0; k < cdf_.size(); ++k) {
    if (u < cdf_[k]) return static_cast<int>(k);
  }
  return max_pairs();
}

int PairNumberDistribution::sample_nonzero(double u) const {
  const double p0 = pmf_[0];
  const double target = p0 + u * (1.0 - p0);
  for (std::size_t k = 1; k < cdf_.size(); ++k) {
    if (target < cdf_[k]) return static_cast<int>(k);
  }
  return max_pairs();
}

PureState ideal_pair_state(double phi_p, int channel_pair, std::uint8_t copy) {
  const Channel s = channel_pair == 0 ? Channel::s1 : Channel::s2;
  const Channel i = channel_pair == 0 ? Channel::i1 : Channel::i2;
  const double r = 1.0 / std::sqrt(2.0);
  auto photon = [copy](Channel c, TimeBin b) {
    return ModeLabel{c, copy, b, Polarization::V, PathTag::none};
  };
  return PureState::from_terms({
      {{photon(s, TimeBin::early), photon(i, TimeBin::early)}, Complex{r}},
      {{photon(s, TimeBin::late), photon(i, TimeBin::late)}, std::polar(r, phi_p)},
  });
}

PulseEmission sample_pulse(const SourceConfig& config, rng::Stream& stream) {
  PulseEmission out;
  out.state = PureState::vacuum();
  for (int j = 0; j < 2; ++j) {
    const PairNumberDistribution dist(config.statistics, mean_pairs(config, j),
                                      config.max_pairs_per_pulse);
    out.pairs[static_cast<std::size_t>(j)] = dist.sample(stream.uniform());
  }
  if (config.phase_jitter_std > 0.0) out.phase_offset = config.phase_jitter_std * stream.normal();
  for (int j = 0; j < 2; ++j) {
    for (int c = 0; c < out.pairs[static_cast<std::size_t>(j)]; ++c) {
      out.state = tensor(out.state, ideal_pair_state(config.phase_p + out.phase_offset, j,
                                                     static_cast<std::uint8_t>(c)));
    }
  }
  return out;
}

}  // namespace tbent::source
