#pragma once

#include <Eigen/Dense>

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tbent {

using Complex = std::complex<double>;

inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kDensityTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-8;

enum class Channel : std::uint8_t { s1, i1, s2, i2, pump };

/// Time-bin labels. early/late live upstream of the converter interferometer,
/// the composite bins downstream of it, middle only after post-selection.
enum class TimeBin : std::uint8_t {
  early,
  late,
  middle,
  early_early,
  early_late,
  late_early,
  late_late,
};

enum class Polarization : std::uint8_t { H, V };

/// Interferometer-arm or PBS-port tag carried while a photon is inside an element.
enum class PathTag : std::uint8_t { none, long_arm, short_arm, transmitted, reflected };

/// One photon's mode. `copy` distinguishes independent pairs emitted into the
/// same channel within one pulse.
struct ModeLabel {
  Channel channel = Channel::s1;
  std::uint8_t copy = 0;
  TimeBin timebin = TimeBin::early;
  Polarization polarization = Polarization::H;
  PathTag path = PathTag::none;

  auto operator<=>(const ModeLabel&) const = default;
};

using ModeTuple = std::vector<ModeLabel>;

bool is_composite(TimeBin bin);

std::string to_string(Channel c);
std::string to_string(TimeBin b);
std::string to_string(Polarization p);
std::string to_string(PathTag p);
std::string to_string(const ModeLabel& label);

Channel parse_channel(const std::string& text);
TimeBin parse_timebin(const std::string& text);
Polarization parse_polarization(const std::string& text);
PathTag parse_path(const std::string& text);
ModeLabel parse_mode_label(const std::string& text);

/// Sparse superposition over ordered photon-mode tuples.
///
/// Tuples are kept in canonical photon order (channel, then copy), so two
/// states over the same photons always agree on tuple layout. Values are
/// immutable after construction; every operation returns a new state.
class PureState {
 public:
  using Terms = std::map<ModeTuple, Complex>;

  /// The zero vector (no terms).
  PureState() = default;

  /// Builds a state from raw terms. Duplicate tuples are summed coherently and
  /// vanishing amplitudes are dropped. Throws ArityError on mixed tuple sizes.
  static PureState from_terms(const std::vector<std::pair<ModeTuple, Complex>>& terms);

  /// The photon vacuum: a single empty tuple with amplitude one.
  static PureState vacuum();
  static PureState single(const ModeLabel& label, Complex amplitude = 1.0);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  int photon_count() const { return photon_count_; }

  Complex amplitude(const ModeTuple& modes) const;
  double norm_squared() const;

  PureState normalized() const;
  PureState scaled(Complex factor) const;

  /// Rotates the global phase so the lexicographically first nonzero
  /// amplitude is real and positive.
  PureState canonicalized() const;

  /// (channel, copy) of each photon, in tuple order.
  std::vector<std::pair<Channel, std::uint8_t>> photons() const;

  /// Applies a single-photon linear map to every photon for which `select`
  /// holds. The map returns the image of one basis label as a superposition.
  using PhotonMap = std::function<std::vector<std::pair<ModeLabel, Complex>>(const ModeLabel&)>;
  PureState apply(const PhotonMap& map,
                  const std::function<bool(const ModeLabel&)>& select = {}) const;

  /// Keeps only terms satisfying `keep` (an unnormalized projection).
  PureState filter(const std::function<bool(const ModeTuple&)>& keep) const;

 private:
  Terms terms_;
  int photon_count_ = 0;
};

PureState operator+(const PureState& a, const PureState& b);

/// Tensor product; the photon sets of a and b must be disjoint.
PureState tensor(const PureState& a, const PureState& b);

/// <a|b>, conjugate-linear in a.
Complex inner(const PureState& a, const PureState& b);

/// Polarization register of a state whose photons each occupy one fixed time
/// bin and no path tag. Qubit order follows canonical photon order; |H> = 0 and
/// the first photon is the most significant bit.
Eigen::VectorXcd polarization_ket(const PureState& s);

/// Hermitian, positive-semidefinite, unit-trace operator on a qubit register.
class DensityMatrix {
 public:
  /// Validates the invariants (Hermitian and unit trace within 1e-10, minimum
  /// eigenvalue >= -1e-8, power-of-two dimension).
  static DensityMatrix from_matrix(const Eigen::MatrixXcd& m);
  static DensityMatrix from_ket(const Eigen::VectorXcd& ket);
  static DensityMatrix maximally_mixed(int qubits);

  /// Hermitizes, truncates negative eigenvalues to zero and renormalizes.
  static DensityMatrix project_physical(const Eigen::MatrixXcd& m);

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }
  int qubits() const;
  double trace() const { return rho_.trace().real(); }
  double purity() const;
  double min_eigenvalue() const;
  Eigen::VectorXd eigenvalues() const;

  /// Convex combination weight*this + (1-weight)*other.
  DensityMatrix mixed_with(const DensityMatrix& other, double weight) const;

 private:
  explicit DensityMatrix(Eigen::MatrixXcd m) : rho_(std::move(m)) {}
  Eigen::MatrixXcd rho_;
};

DensityMatrix to_density(const PureState& s);

double fidelity(const DensityMatrix& rho, const PureState& target);
double fidelity(const DensityMatrix& rho, const Eigen::VectorXcd& target);

/// Reorders qubits: output qubit k is input qubit perm[k].
DensityMatrix permute_qubits(const DensityMatrix& rho, std::span<const int> perm);
Eigen::VectorXcd permute_qubits(const Eigen::VectorXcd& ket, std::span<const int> perm);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// (|HH> + e^{i phase}|VV>)/sqrt(2) as a 4-vector.
Eigen::VectorXcd bell_ket(double phase = 0.0);

}  // namespace tbent
