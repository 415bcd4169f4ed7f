#include "tbent/quantum_state.hpp"

#include "tbent/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace tbent {

namespace {

constexpr double kDropAmplitude = 1e-15;

bool photon_order(const ModeLabel& a, const ModeLabel& b) {
  if (a.channel != b.channel) return a.channel < b.channel;
  return a.copy < b.copy;
}

bool same_photon(const ModeLabel& a, const ModeLabel& b) {
  return a.channel == b.channel && a.copy == b.copy;
}

void canonical_order(ModeTuple& modes) {
  std::stable_sort(modes.begin(), modes.end(), photon_order);
  for (std::size_t k = 1; k < modes.size(); ++k) {
    if (same_photon(modes[k - 1], modes[k])) {
      throw LabelCollisionError("two photons share channel " + to_string(modes[k].channel) +
                                " (copy " + std::to_string(modes[k].copy) + ")");
    }
  }
}

bool is_power_of_two(Eigen::Index n) { return n >= 2 && (n & (n - 1)) == 0; }

int log2_exact(Eigen::Index n) {
  int q = 0;
  while ((Eigen::Index{1} << q) < n) ++q;
  return q;
}

}  // namespace

bool is_composite(TimeBin bin) {
  switch (bin) {
    case TimeBin::early_early:
    case TimeBin::early_late:
    case TimeBin::late_early:
    case TimeBin::late_late:
      return true;
    default:
      return false;
  }
}

std::string to_string(Channel c) {
  static constexpr std::array<const char*, 5> names{"s1", "i1", "s2", "i2", "pump"};
  return names.at(static_cast<std::size_t>(c));
}

std::string to_string(TimeBin b) {
  static constexpr std::array<const char*, 7> names{
      "early", "late", "middle", "early-early", "early-late", "late-early", "late-late"};
  return names.at(static_cast<std::size_t>(b));
}

std::string to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

std::string to_string(PathTag p) {
  static constexpr std::array<const char*, 5> names{"none", "long", "short", "transmitted",
                                                    "reflected"};
  return names.at(static_cast<std::size_t>(p));
}

std::string to_string(const ModeLabel& label) {
  std::string out = to_string(label.channel) + ":" + to_string(label.timebin) + ":" +
                    to_string(label.polarization);
  if (label.path != PathTag::none) out += ":" + to_string(label.path);
  if (label.copy != 0) out += "#" + std::to_string(label.copy);
  return out;
}

Channel parse_channel(const std::string& text) {
  for (int k = 0; k < 5; ++k) {
    if (to_string(static_cast<Channel>(k)) == text) return static_cast<Channel>(k);
  }
  throw ConfigError("unknown channel '" + text + "'");
}

TimeBin parse_timebin(const std::string& text) {
  for (int k = 0; k < 7; ++k) {
    if (to_string(static_cast<TimeBin>(k)) == text) return static_cast<TimeBin>(k);
  }
  throw ConfigError("unknown time bin '" + text + "'");
}

Polarization parse_polarization(const std::string& text) {
  if (text == "H") return Polarization::H;
  if (text == "V") return Polarization::V;
  throw ConfigError("unknown polarization '" + text + "'");
}

PathTag parse_path(const std::string& text) {
  for (int k = 0; k < 5; ++k) {
    if (to_string(static_cast<PathTag>(k)) == text) return static_cast<PathTag>(k);
  }
  throw ConfigError("unknown path tag '" + text + "'");
}

ModeLabel parse_mode_label(const std::string& text) {
  std::string body = text;
  ModeLabel label;
  if (auto hash = body.find('#'); hash != std::string::npos) {
    label.copy = static_cast<std::uint8_t>(std::stoi(body.substr(hash + 1)));
    body.resize(hash);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto colon = body.find(':', start);
    parts.push_back(body.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 3 || parts.size() > 4) {
    throw ConfigError("malformed mode label '" + text + "'");
  }
  label.channel = parse_channel(parts[0]);
  label.timebin = parse_timebin(parts[1]);
  label.polarization = parse_polarization(parts[2]);
  if (parts.size() == 4) label.path = parse_path(parts[3]);
  return label;
}

// ---------------------------------------------------------------------------
// PureState

PureState PureState::from_terms(const std::vector<std::pair<ModeTuple, Complex>>& terms) {
  PureState s;
  bool first = true;
  for (const auto& [modes, amp] : terms) {
    if (first) {
      s.photon_count_ = static_cast<int>(modes.size());
      first = false;
    } else if (static_cast<int>(modes.size()) != s.photon_count_) {
      throw ArityError("terms of one state must have identical photon count");
    }
    ModeTuple key = modes;
    canonical_order(key);
    s.terms_[key] += amp;
  }
  std::erase_if(s.terms_, [](const auto& kv) { return std::abs(kv.second) < kDropAmplitude; });
  return s;
}

PureState PureState::vacuum() { return from_terms({{ModeTuple{}, Complex{1.0}}}); }

PureState PureState::single(const ModeLabel& label, Complex amplitude) {
  return from_terms({{ModeTuple{label}, amplitude}});
}

Complex PureState::amplitude(const ModeTuple& modes) const {
  ModeTuple key = modes;
  canonical_order(key);
  auto it = terms_.find(key);
  return it == terms_.end() ? Complex{} : it->second;
}

double PureState::norm_squared() const {
  double acc = 0.0;
  for (const auto& [modes, amp] : terms_) acc += std::norm(amp);
  return acc;
}

PureState PureState::normalized() const {
  const double n2 = norm_squared();
  if (n2 <= 0.0) throw NumericError("cannot normalize the zero state");
  return scaled(1.0 / std::sqrt(n2));
}

PureState PureState::scaled(Complex factor) const {
  PureState out = *this;
  for (auto& [modes, amp] : out.terms_) amp *= factor;
  std::erase_if(out.terms_, [](const auto& kv) { return std::abs(kv.second) < kDropAmplitude; });
  return out;
}

PureState PureState::canonicalized() const {
  if (terms_.empty()) return *this;
  const Complex lead = terms_.begin()->second;
  return scaled(std::conj(lead) / std::abs(lead));
}

std::vector<std::pair<Channel, std::uint8_t>> PureState::photons() const {
  std::vector<std::pair<Channel, std::uint8_t>> out;
  if (terms_.empty()) return out;
  for (const auto& m : terms_.begin()->first) out.emplace_back(m.channel, m.copy);
  return out;
}

PureState PureState::apply(const PhotonMap& map,
                           const std::function<bool(const ModeLabel&)>& select) const {
  std::vector<std::pair<ModeTuple, Complex>> out;
  for (const auto& [modes, amp] : terms_) {
    std::vector<std::pair<ModeTuple, Complex>> partial{{ModeTuple{}, amp}};
    for (const auto& label : modes) {
      std::vector<std::pair<ModeLabel, Complex>> images;
      if (!select || select(label)) {
        images = map(label);
      } else {
        images = {{label, Complex{1.0}}};
      }
      std::vector<std::pair<ModeTuple, Complex>> next;
      next.reserve(partial.size() * images.size());
      for (const auto& [prefix, a] : partial) {
        for (const auto& [image, c] : images) {
          if (c == Complex{}) continue;
          ModeTuple extended = prefix;
          extended.push_back(image);
          next.emplace_back(std::move(extended), a * c);
        }
      }
      partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  PureState result = from_terms(out);
  if (out.empty()) result.photon_count_ = photon_count_;
  return result;
}

PureState PureState::filter(const std::function<bool(const ModeTuple&)>& keep) const {
  PureState out;
  out.photon_count_ = photon_count_;
  for (const auto& [modes, amp] : terms_) {
    if (keep(modes)) out.terms_.emplace(modes, amp);
  }
  return out;
}

PureState operator+(const PureState& a, const PureState& b) {
  std::vector<std::pair<ModeTuple, Complex>> all(a.terms().begin(), a.terms().end());
  all.insert(all.end(), b.terms().begin(), b.terms().end());
  if (!a.empty() && !b.empty() && a.photon_count() != b.photon_count()) {
    throw ArityError("cannot add states with different photon counts");
  }
  return PureState::from_terms(all);
}

PureState tensor(const PureState& a, const PureState& b) {
  std::set<std::pair<Channel, std::uint8_t>> used;
  for (const auto& p : a.photons()) used.insert(p);
  for (const auto& p : b.photons()) {
    if (used.count(p)) {
      throw LabelCollisionError("tensor operands share channel " + to_string(p.first));
    }
  }
  std::vector<std::pair<ModeTuple, Complex>> out;
  out.reserve(a.size() * b.size());
  for (const auto& [ma, xa] : a.terms()) {
    for (const auto& [mb, xb] : b.terms()) {
      ModeTuple joined = ma;
      joined.insert(joined.end(), mb.begin(), mb.end());
      out.emplace_back(std::move(joined), xa * xb);
    }
  }
  return PureState::from_terms(out);
}

Complex inner(const PureState& a, const PureState& b) {
  if (!a.empty() && !b.empty() && a.photon_count() != b.photon_count()) {
    throw DimensionError("inner product of states with " + std::to_string(a.photon_count()) +
                         " and " + std::to_string(b.photon_count()) + " photons");
  }
  Complex acc{};
  const auto& small = a.size() <= b.size() ? a.terms() : b.terms();
  const auto& large = a.size() <= b.size() ? b.terms() : a.terms();
  const bool a_is_small = a.size() <= b.size();
  for (const auto& [modes, amp] : small) {
    auto it = large.find(modes);
    if (it == large.end()) continue;
    acc += a_is_small ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return acc;
}

Eigen::VectorXcd polarization_ket(const PureState& s) {
  if (s.empty()) throw DimensionError("polarization register of the zero state");
  const int n = s.photon_count();
  if (n == 0) throw DimensionError("polarization register of the vacuum");
  const ModeTuple& reference = s.terms().begin()->first;
  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  for (const auto& [modes, amp] : s.terms()) {
    Eigen::Index index = 0;
    for (int k = 0; k < n; ++k) {
      const ModeLabel& m = modes[static_cast<std::size_t>(k)];
      if (m.path != PathTag::none) {
        throw UnresolvedDofError("photon " + to_string(m) + " still carries a path tag");
      }
      if (m.timebin != reference[static_cast<std::size_t>(k)].timebin) {
        throw UnresolvedDofError("photon in channel " + to_string(m.channel) +
                                 " is spread over several time bins");
      }
      index = (index << 1) | (m.polarization == Polarization::V ? 1 : 0);
    }
    ket(index) += amp;
  }
  return ket;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::from_matrix(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || !is_power_of_two(m.rows())) {
    throw DimensionError("density matrix must be square with power-of-two dimension, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kDensityTolerance) {
    throw NumericError("density matrix not Hermitian (deviation " + std::to_string(asym) + ")");
  }
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > kDensityTolerance || std::abs(m.trace().imag()) > kDensityTolerance) {
    throw NumericError("density matrix trace " + std::to_string(tr) + " != 1");
  }
  Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenvalueFloor) {
    throw NumericError("density matrix has negative eigenvalue " +
                       std::to_string(es.eigenvalues().minCoeff()));
  }
  return DensityMatrix(std::move(herm));
}

DensityMatrix DensityMatrix::from_ket(const Eigen::VectorXcd& ket) {
  const double n2 = ket.squaredNorm();
  if (n2 <= 0.0) throw NumericError("density matrix of the zero vector");
  Eigen::MatrixXcd m = ket * ket.adjoint() / n2;
  return from_matrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
  const Eigen::Index d = Eigen::Index{1} << qubits;
  return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::project_physical(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || !is_power_of_two(m.rows())) {
    throw DimensionError("density matrix must be square with power-of-two dimension");
  }
  Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  const double total = lambda.sum();
  if (total <= 0.0) throw NumericError("no positive spectrum left after truncation");
  lambda /= total;
  Eigen::MatrixXcd out = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() *
                         es.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint());
  return DensityMatrix(std::move(out));
}

int DensityMatrix::qubits() const { return log2_exact(rho_.rows()); }

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

DensityMatrix DensityMatrix::mixed_with(const DensityMatrix& other, double weight) const {
  if (other.dim() != dim()) throw DimensionError("mixing density matrices of different size");
  return DensityMatrix(weight * rho_ + (1.0 - weight) * other.rho_);
}

DensityMatrix to_density(const PureState& s) { return DensityMatrix::from_ket(polarization_ket(s)); }

double fidelity(const DensityMatrix& rho, const Eigen::VectorXcd& target) {
  if (target.size() != rho.dim()) {
    throw DimensionError("fidelity target has dimension " + std::to_string(target.size()) +
                         ", state has " + std::to_string(rho.dim()));
  }
  const Eigen::VectorXcd t = target / target.norm();
  const double f = (t.adjoint() * rho.matrix() * t)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const PureState& target) {
  return fidelity(rho, polarization_ket(target));
}

namespace {

std::vector<Eigen::Index> permutation_map(int n, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != n) throw DimensionError("permutation size mismatch");
  std::vector<int> check(perm.begin(), perm.end());
  std::sort(check.begin(), check.end());
  for (int k = 0; k < n; ++k) {
    if (check[static_cast<std::size_t>(k)] != k) throw DimensionError("not a permutation");
  }
  const Eigen::Index d = Eigen::Index{1} << n;
  std::vector<Eigen::Index> src(static_cast<std::size_t>(d));
  for (Eigen::Index out = 0; out < d; ++out) {
    Eigen::Index in = 0;
    for (int k = 0; k < n; ++k) {
      const int bit = static_cast<int>((out >> (n - 1 - k)) & 1);
      in |= Eigen::Index{bit} << (n - 1 - perm[static_cast<std::size_t>(k)]);
    }
    src[static_cast<std::size_t>(out)] = in;
  }
  return src;
}

}  // namespace

Eigen::VectorXcd permute_qubits(const Eigen::VectorXcd& ket, std::span<const int> perm) {
  if (!is_power_of_two(ket.size())) throw DimensionError("ket dimension is not a power of two");
  const auto src = permutation_map(log2_exact(ket.size()), perm);
  Eigen::VectorXcd out(ket.size());
  for (Eigen::Index k = 0; k < ket.size(); ++k) out(k) = ket(src[static_cast<std::size_t>(k)]);
  return out;
}

DensityMatrix permute_qubits(const DensityMatrix& rho, std::span<const int> perm) {
  const auto src = permutation_map(rho.qubits(), perm);
  Eigen::MatrixXcd out(rho.dim(), rho.dim());
  for (int r = 0; r < rho.dim(); ++r) {
    for (int c = 0; c < rho.dim(); ++c) {
      out(r, c) = rho.matrix()(src[static_cast<std::size_t>(r)], src[static_cast<std::size_t>(c)]);
    }
  }
  return DensityMatrix::from_matrix(out);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index r = 0; r < a.size(); ++r) out.segment(r * b.size(), b.size()) = a(r) * b;
  return out;
}

Eigen::VectorXcd bell_ket(double phase) {
  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(4);
  ket(0) = 1.0 / std::sqrt(2.0);
  ket(3) = std::polar(1.0 / std::sqrt(2.0), phase);
  return ket;
}

}  // namespace tbent
