#include "tbent/optics.hpp"

#include "tbent/errors.hpp"

#include <cmath>
#include <numbers>

namespace tbent::optics {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
const Complex kI{0.0, 1.0};

std::vector<std::pair<ModeLabel, Complex>> jones_image(const Jones& m, const ModeLabel& label) {
  const int col = label.polarization == Polarization::H ? 0 : 1;
  ModeLabel h = label;
  h.polarization = Polarization::H;
  ModeLabel v = label;
  v.polarization = Polarization::V;
  return {{h, m(0, col)}, {v, m(1, col)}};
}

bool inside_arm(const ModeLabel& m) {
  return m.path == PathTag::long_arm || m.path == PathTag::short_arm;
}

/// Long-arm phase for each photon travelling the long arm.
PureState apply_arm_phases(const PureState& s, const UmziConfig& umzi) {
  return s.apply([&](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
    if (m.path == PathTag::long_arm) return {{m, std::polar(1.0, umzi.phase_of(m.channel))}};
    return {{m, Complex{1.0}}};
  });
}

/// Two passes through QWP@45 in each arm swap H and V.
PureState double_pass_flip(const PureState& s) {
  const Jones q = jones_qwp(45.0 * kDeg);
  return apply_jones(s, q * q, inside_arm);
}

TimeBin composite_bin(TimeBin upstream, PathTag arm) {
  const bool late_arm = arm == PathTag::long_arm;
  if (upstream == TimeBin::early) return late_arm ? TimeBin::early_late : TimeBin::early_early;
  if (upstream == TimeBin::late) return late_arm ? TimeBin::late_late : TimeBin::late_early;
  throw UnresolvedDofError("converter input must be in the early or late bin, got " +
                           to_string(upstream));
}

PureState recombine(const PureState& s, UmziRole role) {
  return s.apply([role](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
    if (!inside_arm(m)) return {{m, Complex{1.0}}};
    ModeLabel out = m;
    if (role == UmziRole::pump_modulator) {
      out.timebin = m.path == PathTag::long_arm ? TimeBin::late : TimeBin::early;
    } else {
      out.timebin = composite_bin(m.timebin, m.path);
    }
    out.path = PathTag::none;
    return {{out, Complex{1.0}}};
  });
}

PureState strip_paths(const PureState& s) {
  return s.apply([](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
    ModeLabel out = m;
    out.path = PathTag::none;
    return {{out, Complex{1.0}}};
  });
}

void check_converter_input(const PureState& pair) {
  if (pair.photon_count() != 2) {
    throw ArityError("converter expects a two-photon state, got " +
                     std::to_string(pair.photon_count()) + " photons");
  }
  const auto photons = pair.photons();
  const auto [a, ca] = photons[0];
  const auto [b, cb] = photons[1];
  const bool pair1 = a == Channel::s1 && b == Channel::i1;
  const bool pair2 = a == Channel::s2 && b == Channel::i2;
  if (!(pair1 || pair2) || ca != cb) {
    throw ArityError("converter input must be one signal/idler pair of a single channel pair");
  }
  for (const auto& [modes, amp] : pair.terms()) {
    for (const auto& m : modes) {
      if (m.path != PathTag::none || (m.timebin != TimeBin::early && m.timebin != TimeBin::late)) {
        throw UnresolvedDofError("converter input photon " + to_string(m) +
                                 " is not in an upstream time bin");
      }
    }
  }
}

}  // namespace

Jones jones_hwp(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  Jones m;
  m << c, s, s, -c;
  return m;
}

Jones jones_qwp(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Complex off = (1.0 - kI) * s * c;
  Jones m;
  m << c * c + kI * s * s, off, off, s * s + kI * c * c;
  return std::polar(1.0, -std::numbers::pi / 4.0) * m;
}

PureState apply_jones(const PureState& s, const Jones& m, const PhotonSelector& select) {
  return s.apply([&m](const ModeLabel& label) { return jones_image(m, label); }, select);
}

PureState pbs_route(const PureState& s, PbsMode mode, const PhotonSelector& select) {
  return s.apply(
      [mode](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
        ModeLabel out = m;
        const bool h = m.polarization == Polarization::H;
        if (mode == PbsMode::interferometer) {
          out.path = h ? PathTag::long_arm : PathTag::short_arm;
        } else {
          out.path = h ? PathTag::transmitted : PathTag::reflected;
        }
        return {{out, Complex{1.0}}};
      },
      select);
}

UmziConfig UmziConfig::modulator(double phi_p, double delay) {
  UmziConfig cfg;
  cfg.role = UmziRole::pump_modulator;
  cfg.phase[static_cast<std::size_t>(Channel::pump)] = phi_p;
  cfg.delay = delay;
  return cfg;
}

UmziConfig UmziConfig::converter(double phi_s, double phi_i, double delay) {
  UmziConfig cfg;
  cfg.role = UmziRole::dof_converter;
  cfg.phase[static_cast<std::size_t>(Channel::s1)] = phi_s;
  cfg.phase[static_cast<std::size_t>(Channel::s2)] = phi_s;
  cfg.phase[static_cast<std::size_t>(Channel::i1)] = phi_i;
  cfg.phase[static_cast<std::size_t>(Channel::i2)] = phi_i;
  cfg.delay = delay;
  return cfg;
}

PumpModulatorOutput pump_modulator(const UmziConfig& modulator) {
  const Jones half = jones_hwp(22.5 * kDeg);
  PureState s = PureState::single({Channel::pump, 0, TimeBin::early, Polarization::H});
  s = apply_jones(s, half);
  s = pbs_route(s, PbsMode::interferometer);
  s = apply_arm_phases(s, modulator);
  s = double_pass_flip(s);
  s = recombine(s, UmziRole::pump_modulator);
  s = apply_jones(s, half);
  s = pbs_route(s, PbsMode::analyzer);

  auto port_is = [](PathTag port) {
    return [port](const ModeTuple& modes) { return modes.front().path == port; };
  };
  PureState transmitted = strip_paths(s.filter(port_is(PathTag::transmitted)));
  PureState reflected = strip_paths(s.filter(port_is(PathTag::reflected)));

  // Remove the common phase picked up in the arms so the transmitted early
  // amplitude is real and positive.
  const Complex lead = transmitted.terms().begin()->second;
  const Complex fix = std::conj(lead) / std::abs(lead);
  return {transmitted.scaled(fix), reflected.scaled(fix)};
}

PumpModulatorOutput pump_modulator(double phi_p) {
  return pump_modulator(UmziConfig::modulator(phi_p));
}

PureState dof_convert_unselected(const PureState& pair, const UmziConfig& converter) {
  check_converter_input(pair);
  Jones swap;
  swap << 0.0, 1.0, 1.0, 0.0;
  PureState s = apply_jones(pair, swap);  // polarization controller: V -> H
  s = apply_jones(s, jones_hwp(22.5 * kDeg));
  s = pbs_route(s, PbsMode::interferometer);
  s = apply_arm_phases(s, converter);
  s = double_pass_flip(s);
  return recombine(s, UmziRole::dof_converter);
}

PostSelectionOutcome postselect_middle(const PureState& s) {
  const PureState merged = s.apply([](const ModeLabel& m) -> std::vector<std::pair<ModeLabel, Complex>> {
    ModeLabel out = m;
    if (m.timebin == TimeBin::early_late || m.timebin == TimeBin::late_early) {
      out.timebin = TimeBin::middle;
    }
    return {{out, Complex{1.0}}};
  });
  const PureState kept = merged.filter([](const ModeTuple& modes) {
    for (const auto& m : modes) {
      if (m.timebin != TimeBin::middle) return false;
    }
    return true;
  });
  const double p = kept.norm_squared();
  if (p <= 0.0) return {kept, 0.0};
  return {kept.normalized(), p};
}

PostSelectionOutcome dof_convert(const PureState& pair, double phi_s, double phi_i) {
  return postselect_middle(dof_convert_unselected(pair, UmziConfig::converter(phi_s, phi_i)));
}

PostSelectionOutcome dof_convert(const PureState& pair, const UmziConfig& converter,
                                 const UmziConfig& modulator) {
  if (converter.role != UmziRole::dof_converter || modulator.role != UmziRole::pump_modulator) {
    throw ConfigError("dof_convert needs a converter and a modulator interferometer");
  }
  if (std::abs(converter.delay - modulator.delay) > kDelayMatchTolerance) {
    throw ConfigError("interferometer delays are not matched (" + std::to_string(converter.delay) +
                      " s vs " + std::to_string(modulator.delay) + " s)");
  }
  return postselect_middle(dof_convert_unselected(pair, converter));
}

// ---------------------------------------------------------------------------

Jones analyzer_unitary(const AnalyzerSetting& setting) {
  return jones_qwp(setting.qwp) * jones_hwp(setting.hwp);
}

Eigen::Vector2cd analyzer_ket(const AnalyzerSetting& setting, Port port) {
  Eigen::Vector2cd basis = Eigen::Vector2cd::Zero();
  basis(port == Port::H ? 0 : 1) = 1.0;
  return analyzer_unitary(setting).adjoint() * basis;
}

PureState measure_projector(std::span<const AnalyzerSetting> settings, std::span<const Port> ports) {
  if (settings.size() != ports.size()) {
    throw DimensionError("one port is required per analyzed photon");
  }
  PureState out = PureState::vacuum();
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const Eigen::Vector2cd ket = analyzer_ket(settings[k], ports[k]);
    const ModeLabel h{settings[k].channel, 0, TimeBin::middle, Polarization::H};
    ModeLabel v = h;
    v.polarization = Polarization::V;
    out = tensor(out, PureState::from_terms({{{h}, ket(0)}, {{v}, ket(1)}}));
  }
  return out;
}

Eigen::Vector2cd eigenstate_ket(Eigenstate e) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (e) {
    case Eigenstate::H: return {1.0, 0.0};
    case Eigenstate::V: return {0.0, 1.0};
    case Eigenstate::D: return {r, r};
    case Eigenstate::A: return {r, -r};
    case Eigenstate::R: return {Complex{r}, Complex{0.0, r}};
    case Eigenstate::L: return {Complex{r}, Complex{0.0, -r}};
  }
  return {};
}

const char* to_string(Eigenstate e) {
  static constexpr std::array<const char*, 6> names{"H", "V", "D", "A", "R", "L"};
  return names.at(static_cast<std::size_t>(e));
}

AnalyzerSetting setting_for(Eigenstate e, Channel channel) {
  switch (e) {
    case Eigenstate::H: return {channel, 0.0, 0.0};
    case Eigenstate::V: return {channel, 45.0 * kDeg, 0.0};
    case Eigenstate::D: return {channel, 22.5 * kDeg, 0.0};
    case Eigenstate::A: return {channel, 67.5 * kDeg, 0.0};
    case Eigenstate::R: return {channel, 0.0, 135.0 * kDeg};
    case Eigenstate::L: return {channel, 0.0, 45.0 * kDeg};
  }
  return {channel, 0.0, 0.0};
}

AnalyzerSetting basis_setting(char pauli, Channel channel) {
  switch (pauli) {
    case 'Z': return setting_for(Eigenstate::H, channel);
    case 'X': return setting_for(Eigenstate::D, channel);
    case 'Y': return setting_for(Eigenstate::R, channel);
    default: throw ConfigError(std::string("unknown Pauli basis '") + pauli + "'");
  }
}

nlohmann::json settings_to_json(std::span<const AnalyzerSetting> settings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : settings) {
    out.push_back({{"photon", tbent::to_string(s.channel)},
                   {"hwp_deg", s.hwp / kDeg},
                   {"qwp_deg", s.qwp / kDeg}});
  }
  return out;
}

std::vector<AnalyzerSetting> settings_from_json(const nlohmann::json& j) {
  std::vector<AnalyzerSetting> out;
  for (const auto& row : j) {
    for (const auto& [key, value] : row.items()) {
      if (key != "photon" && key != "hwp_deg" && key != "qwp_deg") {
        throw ConfigError("unknown key '" + key + "' in measurement setting");
      }
    }
    out.push_back({parse_channel(row.at("photon").get<std::string>()),
                   row.value("hwp_deg", 0.0) * kDeg, row.value("qwp_deg", 0.0) * kDeg});
  }
  return out;
}

}  // namespace tbent::optics
