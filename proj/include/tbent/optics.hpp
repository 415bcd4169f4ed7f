#pragma once

#include "tbent/quantum_state.hpp"

#include <json.hpp>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace tbent::optics {

using Jones = Eigen::Matrix2cd;
using PhotonSelector = std::function<bool(const ModeLabel&)>;

inline constexpr double kDefaultDelay = 645e-12;  // s
inline constexpr double kDelayMatchTolerance = 1e-12;  // s, well below the 10 ps pulse width

/// Half-wave plate with fast axis at theta: [[cos2t, sin2t], [sin2t, -cos2t]].
Jones jones_hwp(double theta);

/// Quarter-wave plate with fast axis at theta (pinned convention):
/// e^{-i pi/4} [[cos^2 + i sin^2, (1-i) sin cos], [(1-i) sin cos, sin^2 + i cos^2]].
Jones jones_qwp(double theta);

enum class PlateKind { HWP, QWP };

struct WaveplateSetting {
  PlateKind kind = PlateKind::HWP;
  double angle = 0.0;  // rad

  Jones matrix() const { return kind == PlateKind::HWP ? jones_hwp(angle) : jones_qwp(angle); }
};

/// Applies a Jones matrix to the polarization of every selected photon.
PureState apply_jones(const PureState& s, const Jones& m, const PhotonSelector& select = {});

enum class PbsMode {
  interferometer,  // H -> long arm, V -> short arm
  analyzer,        // H -> transmitted port, V -> reflected port
};

/// Tags each selected photon with the arm or port its polarization selects.
/// A relabeling of the joint path x polarization basis, hence unitary.
PureState pbs_route(const PureState& s, PbsMode mode = PbsMode::interferometer,
                    const PhotonSelector& select = {});

enum class UmziRole { pump_modulator, dof_converter };

struct UmziConfig {
  UmziRole role = UmziRole::dof_converter;
  /// Long-arm phase per channel (pump entry for the modulator), rad.
  std::array<double, 5> phase{};
  double delay = kDefaultDelay;  // s

  double phase_of(Channel c) const { return phase[static_cast<std::size_t>(c)]; }
  static UmziConfig modulator(double phi_p, double delay = kDefaultDelay);
  static UmziConfig converter(double phi_s, double phi_i, double delay = kDefaultDelay);
};

struct PumpModulatorOutput {
  PureState transmitted;  // 1/2 (|e> + e^{i phi_p}|l>) |H>
  PureState reflected;    // 1/2 (|e> - e^{i phi_p}|l>) |V>, the locking reference
};

/// Pump preparation: PBS, HWP@22.5, UMZI with double-pass QWP@45 in each
/// arm, HWP@22.5, PBS split into transmitted pump and reflected reference.
PumpModulatorOutput pump_modulator(double phi_p);
PumpModulatorOutput pump_modulator(const UmziConfig& modulator);

struct PostSelectionOutcome {
  PureState state;             // renormalized
  double success_probability;  // squared norm of the kept component
};

/// Converter interferometer without the final post-selection: PC (V<->H),
/// HWP@22.5, PBS into arms, long-arm phases, double-pass QWP@45 flip and
/// recombination into composite time bins. Norm-preserving.
PureState dof_convert_unselected(const PureState& pair, const UmziConfig& converter);

/// Projects every photon onto the composite bins early-late / late-early,
/// merges them into the middle bin and renormalizes.
PostSelectionOutcome postselect_middle(const PureState& s);

/// Time-bin to polarization conversion with middle-bin post-selection.
/// `pair` must be a two-photon state in one signal/idler channel pair.
PostSelectionOutcome dof_convert(const PureState& pair, double phi_s, double phi_i);

/// As above; additionally checks that both interferometer delays match.
PostSelectionOutcome dof_convert(const PureState& pair, const UmziConfig& converter,
                                 const UmziConfig& modulator);

// ---------------------------------------------------------------------------
// Polarization analysis

enum class Port { H, V };  // PBS transmitted / reflected

/// HWP then QWP in front of the analysis PBS.
struct AnalyzerSetting {
  Channel channel = Channel::s1;
  double hwp = 0.0;  // rad
  double qwp = 0.0;  // rad
};

/// Jones matrix of the analyzer plates, QWP(qwp) * HWP(hwp).
Jones analyzer_unitary(const AnalyzerSetting& setting);

/// The polarization ket projected on when a photon exits `port`: U^dagger |port>.
Eigen::Vector2cd analyzer_ket(const AnalyzerSetting& setting, Port port);

/// Product projector ket over the listed photons, each in the middle time bin.
PureState measure_projector(std::span<const AnalyzerSetting> settings, std::span<const Port> ports);

enum class Eigenstate { H, V, D, A, R, L };

inline constexpr std::array<Eigenstate, 6> kAllEigenstates{Eigenstate::H, Eigenstate::V,
                                                           Eigenstate::D, Eigenstate::A,
                                                           Eigenstate::R, Eigenstate::L};

Eigen::Vector2cd eigenstate_ket(Eigenstate e);
const char* to_string(Eigenstate e);

/// Plate angles that make the transmitted port project onto `e`.
AnalyzerSetting setting_for(Eigenstate e, Channel channel);

/// Plate angles for measuring in the Pauli basis containing `e` (its partner
/// exits the reflected port). Uses the H, D and R settings.
AnalyzerSetting basis_setting(char pauli, Channel channel);

/// Measurement-setting table as JSON: [{photon, hwp_deg, qwp_deg}, ...].
nlohmann::json settings_to_json(std::span<const AnalyzerSetting> settings);
std::vector<AnalyzerSetting> settings_from_json(const nlohmann::json& j);

}  // namespace tbent::optics
