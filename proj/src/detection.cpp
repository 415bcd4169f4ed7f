#include "tbent/detection.hpp"

#include "tbent/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <thread>

namespace tbent::detection {

namespace {

constexpr std::uint64_t kBlockSize = 65536;
constexpr std::uint64_t kBlocksPerBatch = 64;

enum Purpose : std::uint64_t { kEmission = 1, kDark = 2 };

double db_to_eta(double db) { return std::pow(10.0, -db / 10.0); }

Channel signal_of(int j) { return j == 0 ? Channel::s1 : Channel::s2; }
Channel idler_of(int j) { return j == 0 ? Channel::i1 : Channel::i2; }

/// 0 = gated, 1 = transmitted, 2 = reflected.
int classify(const ModeLabel& m) {
  if (m.timebin != TimeBin::middle) return 0;
  return m.path == PathTag::reflected ? 2 : 1;
}

std::array<double, 9> outcome_probabilities(const OpticsSetup& optics, double phase,
                                            int channel_pair) {
  std::array<double, 9> p{};
  const bool converter = optics.setup == Setup::entanglement && optics.explicit_postselection;
  if (!converter) {
    p[4] = 1.0;  // both photons reach the transmitted detectors
    return p;
  }
  const PureState pair = source::ideal_pair_state(phase, channel_pair);
  PureState s = optics::dof_convert_unselected(pair, optics.converter);
  s = s.apply([](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
    ModeLabel out = m;
    if (m.timebin == TimeBin::early_late || m.timebin == TimeBin::late_early) {
      out.timebin = TimeBin::middle;
    }
    return {{out, Complex{1.0}}};
  });
  auto middle = [](const ModeLabel& m) { return m.timebin == TimeBin::middle; };
  if (optics.analyze_polarization) {
    for (int k = 0; k < 2; ++k) {
      const Channel c = k == 0 ? signal_of(channel_pair) : idler_of(channel_pair);
      const auto& setting = optics.analyzers[static_cast<std::size_t>(c)];
      s = optics::apply_jones(s, optics::analyzer_unitary(setting),
                              [c](const ModeLabel& m) { return m.channel == c && m.timebin == TimeBin::middle; });
    }
    s = optics::pbs_route(s, optics::PbsMode::analyzer, middle);
  }
  for (const auto& [modes, amp] : s.terms()) {
    const int os = classify(modes[0]);
    const int oi = classify(modes[1]);
    p[static_cast<std::size_t>(3 * os + oi)] += std::norm(amp);
  }
  return p;
}

std::array<double, 4> channel_efficiency(const LossBudget& losses, const OpticsSetup& optics) {
  const double eta = db_to_eta(channel_transmission_db(losses, optics));
  std::array<double, 4> out{};
  for (std::size_t c = 0; c < 4; ++c) out[c] = eta * losses.channel_scale[c];
  return out;
}

/// Failures before the first success of a Bernoulli(p) sequence.
std::uint64_t geometric_skip(double p, rng::Stream& stream) {
  if (p >= 1.0) return 0;
  if (p <= 0.0) return UINT64_MAX;
  const double g = std::floor(std::log(stream.uniform_open_zero()) / std::log1p(-p));
  return g >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(g);
}

struct Event {
  std::uint64_t pulse;
  std::uint8_t mask;  // bit c: transmitted click in channel c; bit 4+c: reflected
};

struct BlockContext {
  const source::SourceConfig* source;
  const OpticsSetup* optics;
  std::array<source::PairNumberDistribution, 2> dists;
  std::array<PairOutcomeTable, 2> tables;
  std::array<double, 4> eta;
  double p_emit;
  double p_dark;
  int detectors;
  std::uint64_t stream_id;
};

int sample_index(const std::array<double, 9>& p, double u) {
  double acc = 0.0;
  for (int k = 0; k < 9; ++k) {
    acc += p[static_cast<std::size_t>(k)];
    if (u < acc) return k;
  }
  for (int k = 8; k >= 0; --k) {
    if (p[static_cast<std::size_t>(k)] > 0.0) return k;
  }
  return 0;
}

std::vector<Event> simulate_block(const BlockContext& ctx, std::uint64_t block, std::uint64_t first,
                                  std::uint64_t count) {
  std::vector<std::uint8_t> mask;
  std::vector<std::uint64_t> touched;
  auto set = [&](std::uint64_t k, std::uint8_t bit) {
    if (mask.empty()) mask.assign(count, 0);
    if (mask[k] == 0) touched.push_back(k);
    mask[k] |= bit;
  };

  rng::Stream em(rng::derive_seed(ctx.source->seed, {ctx.stream_id, block, kEmission}));
  const bool any_jitter = ctx.source->phase_jitter_std > 0.0;
  for (std::uint64_t k = 0;;) {
    const std::uint64_t skip = geometric_skip(ctx.p_emit, em);
    if (skip >= count - k) break;
    k += skip;
    std::array<int, 2> n{};
    do {
      n[0] = ctx.dists[0].sample(em.uniform());
      n[1] = ctx.dists[1].sample(em.uniform());
    } while (n[0] == 0 && n[1] == 0);
    const double delta = any_jitter ? ctx.source->phase_jitter_std * em.normal() : 0.0;
    for (int j = 0; j < 2; ++j) {
      if (n[static_cast<std::size_t>(j)] == 0) continue;
      const auto probs = ctx.tables[static_cast<std::size_t>(j)].at(delta);
      const int cs = j == 0 ? 0 : 2;
      const int ci = cs + 1;
      for (int c = 0; c < n[static_cast<std::size_t>(j)]; ++c) {
        const int o = sample_index(probs, em.uniform());
        const int os = o / 3;
        const int oi = o % 3;
        if (os != 0 && em.uniform() < ctx.eta[static_cast<std::size_t>(cs)]) {
          set(k, static_cast<std::uint8_t>(1u << (os == 1 ? cs : 4 + cs)));
        }
        if (oi != 0 && em.uniform() < ctx.eta[static_cast<std::size_t>(ci)]) {
          set(k, static_cast<std::uint8_t>(1u << (oi == 1 ? ci : 4 + ci)));
        }
      }
    }
    ++k;
  }

  for (int d = 0; d < ctx.detectors; ++d) {
    rng::Stream dk(rng::derive_seed(ctx.source->seed,
                                    {ctx.stream_id, block, kDark, static_cast<std::uint64_t>(d)}));
    const int bit = d < 4 ? d : 4 + (d - 4);
    for (std::uint64_t k = 0;;) {
      const std::uint64_t skip = geometric_skip(ctx.p_dark, dk);
      if (skip >= count - k) break;
      k += skip;
      set(k, static_cast<std::uint8_t>(1u << bit));
      ++k;
    }
  }

  std::sort(touched.begin(), touched.end());
  std::vector<Event> out;
  out.reserve(touched.size());
  for (std::uint64_t k : touched) out.push_back({first + k, mask[k]});
  return out;
}

class Tally {
 public:
  Tally(CountsRecord& rec, const DetectorModel& det, double rep_rate, bool two_port)
      : rec_(rec), two_port_(two_port) {
    dead_pulses_ = det.dead_time > 0.0 ? det.dead_time * rep_rate : 0.0;
    last_click_.fill(-1.0);
  }

  void add(Event e) {
    if (dead_pulses_ > 0.0) {
      for (int b = 0; b < 8; ++b) {
        if (!(e.mask & (1u << b))) continue;
        auto& last = last_click_[static_cast<std::size_t>(b)];
        const double t = static_cast<double>(e.pulse);
        if (last >= 0.0 && t - last < dead_pulses_) {
          e.mask = static_cast<std::uint8_t>(e.mask & ~(1u << b));
        } else {
          last = t;
        }
      }
      if (e.mask == 0) return;
    }
    for (int c = 0; c < 4; ++c) {
      if (e.mask & (1u << c)) ++rec_.singles[static_cast<std::size_t>(c)];
    }
    while (!recent_.empty() && e.pulse - recent_.front().pulse > kMaxDelayBin) recent_.pop_front();
    for (int j = 0; j < 2; ++j) {
      const unsigned sbit = 1u << (2 * j);
      const unsigned ibit = 1u << (2 * j + 1);
      auto& row = rec_.twofold[static_cast<std::size_t>(j)];
      if ((e.mask & sbit) && (e.mask & ibit)) ++row[kMaxDelayBin];
      for (const Event& p : recent_) {
        const int n = static_cast<int>(e.pulse - p.pulse);
        if ((p.mask & sbit) && (e.mask & ibit)) ++row[static_cast<std::size_t>(kMaxDelayBin + n)];
        if ((e.mask & sbit) && (p.mask & ibit)) ++row[static_cast<std::size_t>(kMaxDelayBin - n)];
      }
    }
    if ((e.mask & 0x0f) == 0x0f) ++rec_.fourfold;
    if (two_port_) outcomes(e.mask);
    recent_.push_back(e);
  }

 private:
  /// Port of one channel when exactly one of its detectors fired: 0 = T, 1 = R, -1 otherwise.
  static int port(std::uint8_t mask, int c) {
    const bool t = mask & (1u << c);
    const bool r = mask & (1u << (4 + c));
    if (t == r) return -1;
    return r ? 1 : 0;
  }

  void outcomes(std::uint8_t mask) {
    std::array<int, 4> ports{};
    for (int c = 0; c < 4; ++c) ports[static_cast<std::size_t>(c)] = port(mask, c);
    for (int j = 0; j < 2; ++j) {
      const int ps = ports[static_cast<std::size_t>(2 * j)];
      const int pi = ports[static_cast<std::size_t>(2 * j + 1)];
      if (ps >= 0 && pi >= 0) {
        ++rec_.pair_outcomes[static_cast<std::size_t>(j)][static_cast<std::size_t>(ps << 1 | pi)];
      }
    }
    if (std::all_of(ports.begin(), ports.end(), [](int p) { return p >= 0; })) {
      const int idx = ports[0] << 3 | ports[1] << 2 | ports[2] << 1 | ports[3];
      ++rec_.four_outcomes[static_cast<std::size_t>(idx)];
    }
  }

  CountsRecord& rec_;
  bool two_port_;
  double dead_pulses_ = 0.0;
  std::array<double, 8> last_click_{};
  std::deque<Event> recent_;
};

/// Probability that a pulse shows a transmitted click in the given channels.
struct PairClickModel {
  double qs = 0.0, qi = 0.0, q11 = 0.0;
};

PairClickModel click_model(const std::array<double, 9>& p, double eta_s, double eta_i) {
  PairClickModel m;
  m.qs = eta_s * (p[3] + p[4] + p[5]);
  m.qi = eta_i * (p[1] + p[4] + p[7]);
  m.q11 = eta_s * eta_i * p[4];
  return m;
}

}  // namespace

double LossBudget::total_db() const {
  return coupling + umzi_insertion + dof_conversion + cwdm + analyzer + fiber_to_detector + detector;
}

LossBudget LossBudget::lossless() {
  LossBudget l;
  l.coupling = l.umzi_insertion = l.dof_conversion = l.cwdm = l.analyzer = 0.0;
  l.fiber_to_detector = l.detector = 0.0;
  return l;
}

void DetectorModel::validate(double rep_rate) const {
  if (!(dark_count_rate >= 0.0)) throw ConfigError("dark_count_rate must be non-negative");
  if (!(coincidence_window > 0.0)) throw ConfigError("coincidence_window must be positive");
  if (coincidence_window >= 1.0 / rep_rate) {
    throw ConfigError("coincidence window must be shorter than the pulse period");
  }
  if (!(dead_time >= 0.0)) throw ConfigError("dead_time must be non-negative");
}

double DetectorModel::dark_probability() const {
  return -std::expm1(-dark_count_rate * coincidence_window);
}

void OpticsSetup::validate() const {
  if (setup != Setup::entanglement) return;
  if (converter.role != optics::UmziRole::dof_converter ||
      modulator.role != optics::UmziRole::pump_modulator) {
    throw ConfigError("interferometer roles are swapped");
  }
  if (std::abs(converter.delay - modulator.delay) > optics::kDelayMatchTolerance) {
    throw ConfigError("interferometer delays are not matched");
  }
  if (!explicit_postselection && analyze_polarization) {
    throw ConfigError(
        "polarization analysis needs the explicit post-selection; loss-only accounting has no "
        "polarization state to project");
  }
  if (two_port && !analyze_polarization) {
    throw ConfigError("two-port detection needs polarization analysis");
  }
}

double channel_transmission_db(const LossBudget& l, const OpticsSetup& optics) {
  if (optics.setup == Setup::characterization) {
    return l.coupling + l.cwdm + l.fiber_to_detector + l.detector;
  }
  double db = l.total_db();
  if (optics.explicit_postselection) db -= l.dof_conversion;
  return db;
}

std::uint64_t CountsRecord::coincidences(int channel_pair, int delay) const {
  if (channel_pair < 0 || channel_pair > 1) throw ConfigError("channel pair index must be 0 or 1");
  if (std::abs(delay) > kMaxDelayBin) throw RangeError("delay bin outside [-5, 5]");
  return twofold[static_cast<std::size_t>(channel_pair)][static_cast<std::size_t>(delay + kMaxDelayBin)];
}

PairOutcomeTable::PairOutcomeTable(const OpticsSetup& optics, double phase_p, int channel_pair) {
  const auto p0 = outcome_probabilities(optics, phase_p, channel_pair);
  const auto p1 = outcome_probabilities(optics, phase_p + std::numbers::pi / 2, channel_pair);
  const auto p2 = outcome_probabilities(optics, phase_p + std::numbers::pi, channel_pair);
  for (std::size_t k = 0; k < 9; ++k) {
    a_[k] = 0.5 * (p0[k] + p2[k]);
    b_[k] = Complex{0.5 * (p0[k] - p2[k]), a_[k] - p1[k]};
  }
}

std::array<double, 9> PairOutcomeTable::at(double jitter) const {
  std::array<double, 9> out{};
  const Complex e = std::polar(1.0, jitter);
  for (std::size_t k = 0; k < 9; ++k) out[k] = std::max(0.0, a_[k] + (b_[k] * e).real());
  return out;
}

CountsRecord run_experiment(const source::SourceConfig& source, const OpticsSetup& optics,
                            const LossBudget& losses, const DetectorModel& detectors,
                            const RunOptions& options) {
  source.validate();
  optics.validate();
  detectors.validate(source.rep_rate);
  if (options.pulses < 1) throw ConfigError("need at least one pulse");
  const int threads = options.threads > 0 ? options.threads
                                          : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  const double phase_p = source.phase_p + optics.modulator.phase_of(Channel::pump);
  BlockContext ctx{
      &source,
      &optics,
      {source::PairNumberDistribution(source.statistics, source::mean_pairs(source, 0),
                                      source.max_pairs_per_pulse),
       source::PairNumberDistribution(source.statistics, source::mean_pairs(source, 1),
                                      source.max_pairs_per_pulse)},
      {PairOutcomeTable(optics, phase_p, 0), PairOutcomeTable(optics, phase_p, 1)},
      channel_efficiency(losses, optics),
      0.0,
      detectors.dark_probability(),
      optics.two_port ? 8 : 4,
      options.stream_id,
  };
  ctx.p_emit = 1.0 - (1.0 - ctx.dists[0].probability_nonzero()) *
                         (1.0 - ctx.dists[1].probability_nonzero());

  CountsRecord rec;
  rec.setting_id = optics.setting_id;
  rec.pulses = options.pulses;
  rec.duration = static_cast<double>(options.pulses) / source.rep_rate;
  Tally tally(rec, detectors, source.rep_rate, optics.two_port);

  const std::uint64_t blocks = (options.pulses + kBlockSize - 1) / kBlockSize;
  for (std::uint64_t b0 = 0; b0 < blocks; b0 += kBlocksPerBatch) {
    const std::uint64_t nb = std::min(kBlocksPerBatch, blocks - b0);
    std::vector<std::vector<Event>> results(nb);
    auto work = [&](std::uint64_t start) {
      for (std::uint64_t i = start; i < nb; i += static_cast<std::uint64_t>(threads)) {
        const std::uint64_t b = b0 + i;
        const std::uint64_t first = b * kBlockSize;
        const std::uint64_t count = std::min(kBlockSize, options.pulses - first);
        results[i] = simulate_block(ctx, b, first, count);
      }
    };
    if (threads == 1 || nb == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      const int used = static_cast<int>(std::min<std::uint64_t>(nb, static_cast<std::uint64_t>(threads)));
      for (int t = 0; t < used; ++t) pool.emplace_back(work, static_cast<std::uint64_t>(t));
      for (auto& th : pool) th.join();
    }
    for (const auto& events : results) {
      for (const Event& e : events) tally.add(e);
    }
  }
  return rec;
}

ExpectedRates expected_rates(const source::SourceConfig& source, const OpticsSetup& optics,
                             const LossBudget& losses, const DetectorModel& detectors) {
  source.validate();
  optics.validate();
  detectors.validate(source.rep_rate);
  const double phase_p = source.phase_p + optics.modulator.phase_of(Channel::pump);
  const std::array<source::PairNumberDistribution, 2> dists{
      source::PairNumberDistribution(source.statistics, source::mean_pairs(source, 0),
                                     source.max_pairs_per_pulse),
      source::PairNumberDistribution(source.statistics, source::mean_pairs(source, 1),
                                     source.max_pairs_per_pulse)};
  const std::array<PairOutcomeTable, 2> tables{PairOutcomeTable(optics, phase_p, 0),
                                               PairOutcomeTable(optics, phase_p, 1)};
  const auto eta = channel_efficiency(losses, optics);
  const double nd = 1.0 - detectors.dark_probability();

  struct Conditional {
    std::array<double, 4> singles{};
    std::array<double, 2> twofold{};
    double fourfold = 0.0;
  };
  auto conditional = [&](double delta) {
    Conditional c;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto m = click_model(tables[j].at(delta), eta[2 * j], eta[2 * j + 1]);
      const double ns = nd * dists[j].generating_function(1.0 - m.qs);
      const double ni = nd * dists[j].generating_function(1.0 - m.qi);
      const double nsi = nd * nd * dists[j].generating_function(1.0 - m.qs - m.qi + m.q11);
      c.singles[2 * j] = 1.0 - ns;
      c.singles[2 * j + 1] = 1.0 - ni;
      c.twofold[j] = 1.0 - ns - ni + nsi;
    }
    c.fourfold = c.twofold[0] * c.twofold[1];
    return c;
  };

  Conditional avg;
  const double sigma = source.phase_jitter_std;
  if (sigma > 0.0) {
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    auto weight = [&](double x) { return norm * std::exp(-0.5 * x * x / (sigma * sigma)); };
    const double lim = 8.0 * sigma;
    for (int k = 0; k < 4; ++k) {
      avg.singles[static_cast<std::size_t>(k)] = boost::math::quadrature::gauss<double, 40>::integrate(
          [&](double x) { return weight(x) * conditional(x).singles[static_cast<std::size_t>(k)]; }, -lim,
          lim);
    }
    for (int j = 0; j < 2; ++j) {
      avg.twofold[static_cast<std::size_t>(j)] = boost::math::quadrature::gauss<double, 40>::integrate(
          [&](double x) { return weight(x) * conditional(x).twofold[static_cast<std::size_t>(j)]; }, -lim,
          lim);
    }
    avg.fourfold = boost::math::quadrature::gauss<double, 40>::integrate(
        [&](double x) { return weight(x) * conditional(x).fourfold; }, -lim, lim);
  } else {
    avg = conditional(0.0);
  }

  ExpectedRates out;
  out.rep_rate = source.rep_rate;
  out.singles = avg.singles;
  out.twofold_zero = avg.twofold;
  for (std::size_t j = 0; j < 2; ++j) out.twofold_delayed[j] = avg.singles[2 * j] * avg.singles[2 * j + 1];
  out.fourfold = avg.fourfold;
  return out;
}

double fourfold_rate_oracle(const source::SourceConfig& source, const LossBudget& losses) {
  const double eta = db_to_eta(losses.total_db() - losses.dof_conversion);
  const double p_ps = 0.25;
  return source.rep_rate * source::mean_pairs(source, 0) * source::mean_pairs(source, 1) * p_ps *
         p_ps * std::pow(eta, 4);
}

PgrEstimate estimate_pgr(const CountsRecord& counts, int channel_pair) {
  const double cc = static_cast<double>(counts.coincidences(channel_pair, 0));
  if (cc <= 0.0) throw UndefinedEstimateError("no zero-delay coincidences; PGR is undefined");
  const double cs = static_cast<double>(counts.singles[static_cast<std::size_t>(2 * channel_pair)]);
  const double ci = static_cast<double>(counts.singles[static_cast<std::size_t>(2 * channel_pair + 1)]);
  PgrEstimate out;
  out.value = cs * ci / cc / counts.duration;
  const double rel_var = std::max(0.0, 1.0 / cc - 1.0 / cs - 1.0 / ci + 2.0 * cc / (cs * ci));
  out.sigma = out.value * std::sqrt(rel_var);
  return out;
}

CarEstimate estimate_car(const CountsRecord& counts, int channel_pair) {
  const double c0 = static_cast<double>(counts.coincidences(channel_pair, 0));
  const double acc_total = static_cast<double>(counts.coincidences(channel_pair, -1) +
                                               counts.coincidences(channel_pair, 1));
  CarEstimate out;
  if (acc_total <= 0.0) {
    if (c0 <= 0.0) throw UndefinedEstimateError("no coincidences and no accidentals recorded");
    // 1.5 accidental counts summed over both bins as the upper limit
    const double acc_upper = 1.5 / 2.0;
    out.value = std::max(0.0, (c0 - acc_upper) / acc_upper);
    out.lower_bound = true;
    return out;
  }
  const double acc = 0.5 * acc_total;
  out.value = (c0 - acc) / acc;
  const double ratio = c0 / acc;
  out.sigma = ratio * std::sqrt((c0 > 0 ? 1.0 / c0 : 0.0) + 1.0 / acc_total);
  return out;
}

}  // namespace tbent::detection
