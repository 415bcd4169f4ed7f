#include "tbent/tomography.hpp"

#include "tbent/errors.hpp"
#include "tbent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <thread>

namespace tbent::analysis {

namespace {

const std::array<Channel, 4> kQubitChannels{Channel::s1, Channel::i1, Channel::s2, Channel::i2};

void check_qubits(int qubits) {
  if (qubits != 2 && qubits != 4) throw ConfigError("tomography supports 2 or 4 qubits");
}

Eigen::VectorXcd outcome_ket(const MeasurementSetting& s, unsigned outcome) {
  const int n = static_cast<int>(s.analyzers.size());
  Eigen::VectorXcd ket = Eigen::VectorXcd::Ones(1);
  for (int k = 0; k < n; ++k) {
    const bool reflected = (outcome >> (n - 1 - k)) & 1u;
    const Eigen::VectorXcd q =
        optics::analyzer_ket(s.analyzers[static_cast<std::size_t>(k)], reflected ? optics::Port::V : optics::Port::H);
    ket = kron(ket, q);
  }
  return ket;
}

/// Working arrays for one likelihood problem.
struct Problem {
  int dim = 0;
  Eigen::MatrixXcd kets;    // dim x m
  Eigen::VectorXd counts;   // normalized to unit total
  Eigen::VectorXd exposure;
  Eigen::MatrixXcd exposure_op;  // sum_j T_j |k_j><k_j|

  explicit Problem(const TomographyInput& in) {
    dim = 1 << in.qubits;
    const auto m = static_cast<Eigen::Index>(in.entries.size());
    kets.resize(dim, m);
    counts.resize(m);
    exposure.resize(m);
    double total = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& e = in.entries[static_cast<std::size_t>(j)];
      if (e.ket.size() != dim) throw DimensionError("projector ket does not match qubit count");
      if (!(e.counts >= 0.0) || !std::isfinite(e.counts)) throw ConfigError("counts must be non-negative");
      if (!(e.exposure > 0.0)) throw ConfigError("exposure must be positive");
      kets.col(j) = e.ket;
      counts(j) = e.counts;
      exposure(j) = e.exposure;
      total += e.counts;
    }
    if (!(total > 0.0)) throw DegenerateDataError("all tomography counts are zero");
    counts /= total;
    exposure_op = kets * exposure.asDiagonal() * kets.adjoint();
  }

  Eigen::VectorXd probs(const Eigen::MatrixXcd& sigma) const {
    const Eigen::MatrixXcd b = sigma * kets;
    return (kets.conjugate().cwiseProduct(b)).colwise().sum().real().transpose();
  }

  /// Log-likelihood per count of the unnormalized operator sigma.
  double value(const Eigen::MatrixXcd& sigma) const {
    const Eigen::VectorXd p = probs(sigma);
    const double s = exposure.dot(p);
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    double l = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (counts(j) == 0.0) continue;
      if (!(p(j) > 0.0)) return -std::numeric_limits<double>::infinity();
      l += counts(j) * std::log(p(j));
    }
    return l - std::log(s);
  }

  Eigen::MatrixXcd gradient_op(const Eigen::MatrixXcd& sigma) const {
    const Eigen::VectorXd p = probs(sigma);
    const double s = exposure.dot(p);
    Eigen::VectorXd w(p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      w(j) = counts(j) > 0.0 ? counts(j) / p(j) : 0.0;
    }
    Eigen::MatrixXcd g = kets * w.asDiagonal() * kets.adjoint();
    g -= exposure_op / s;
    return g;
  }
};

Eigen::MatrixXcd pauli(int which) {
  Eigen::Matrix2cd m;
  switch (which) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

std::vector<Eigen::MatrixXcd> pauli_strings(int qubits) {
  std::vector<Eigen::MatrixXcd> out{Eigen::MatrixXcd::Ones(1, 1)};
  for (int q = 0; q < qubits; ++q) {
    std::vector<Eigen::MatrixXcd> next;
    next.reserve(out.size() * 4);
    for (const auto& m : out) {
      for (int k = 0; k < 4; ++k) next.push_back(kron(m, pauli(k)));
    }
    out = std::move(next);
  }
  return out;
}

/// Design matrix M_ja = <k_j|P_a|k_j>; full column rank iff the projectors are
/// informationally complete.
Eigen::MatrixXd design_matrix(const Problem& pb, const std::vector<Eigen::MatrixXcd>& paulis) {
  Eigen::MatrixXd m(pb.kets.cols(), static_cast<Eigen::Index>(paulis.size()));
  for (std::size_t a = 0; a < paulis.size(); ++a) {
    const Eigen::MatrixXcd b = paulis[a] * pb.kets;
    m.col(static_cast<Eigen::Index>(a)) = (pb.kets.conjugate().cwiseProduct(b)).colwise().sum().real().transpose();
  }
  return m;
}

Eigen::MatrixXcd linear_inversion_start(const Problem& pb, int qubits) {
  const auto paulis = pauli_strings(qubits);
  const Eigen::MatrixXd m = design_matrix(pb, paulis);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-9);
  if (qr.rank() < m.cols()) {
    throw UnidentifiableError("measurement settings are not informationally complete (rank " +
                              std::to_string(qr.rank()) + " of " + std::to_string(m.cols()) + ")");
  }
  const Eigen::VectorXd y = pb.counts.cwiseQuotient(pb.exposure);
  const Eigen::VectorXd r = qr.solve(y);
  const int d = pb.dim;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / d;
  if (r(0) > 0.0) {
    Eigen::MatrixXcd lin = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t a = 0; a < paulis.size(); ++a) lin += r(static_cast<Eigen::Index>(a)) / r(0) * paulis[a];
    rho = lin / d;
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  ev /= std::max(ev.sum(), 1e-300);
  const double floor = 1e-3 / d;
  ev = ev.cwiseMax(floor);
  ev /= ev.sum();
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::VectorXd pack(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.size();
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k) = a.data()[k].real();
    x(n + k) = a.data()[k].imag();
  }
  return x;
}

Eigen::MatrixXcd unpack(const Eigen::VectorXd& x, int d) {
  Eigen::MatrixXcd a(d, d);
  const Eigen::Index n = a.size();
  for (Eigen::Index k = 0; k < n; ++k) a.data()[k] = Complex(x(k), x(n + k));
  return a;
}

struct Eval {
  double f;            // log-likelihood per count
  Eigen::VectorXd g;   // gradient wrt packed A
};

Eval evaluate(const Problem& pb, const Eigen::VectorXd& x) {
  const Eigen::MatrixXcd a = unpack(x, pb.dim);
  const Eigen::MatrixXcd sigma = a * a.adjoint();
  Eval e{pb.value(sigma), {}};
  if (std::isfinite(e.f)) {
    const Eigen::MatrixXcd ga = 2.0 * pb.gradient_op(sigma) * a;
    e.g = pack(ga);
  }
  return e;
}

/// Limited-memory BFGS ascent with Armijo backtracking; every accepted step
/// increases the likelihood.
bool lbfgs(const Problem& pb, Eigen::VectorXd& x, const MleOptions& opt, MleResult& res) {
  constexpr int kMemory = 12;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  Eval cur = evaluate(pb, x);
  if (!std::isfinite(cur.f)) return false;
  res.trace.push_back(cur.f);
  int stalls = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    // Two-loop recursion on the negated objective.
    Eigen::VectorXd q = -cur.g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      const auto ku = static_cast<std::size_t>(k);
      alpha[ku] = s_hist[ku].dot(q) / y_hist[ku].dot(s_hist[ku]);
      q -= alpha[ku] * y_hist[ku];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = y_hist[k].dot(q) / y_hist[k].dot(s_hist[k]);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = cur.g.dot(dir);
    if (!(slope > 0.0)) {
      s_hist.clear();
      y_hist.clear();
      dir = cur.g;
      slope = dir.squaredNorm();
    }
    if (slope < 1e-300) {
      res.converged = true;
      return true;
    }
    double step = s_hist.empty() ? std::min(1.0, 0.1 / std::sqrt(slope)) : 1.0;
    Eval next{};
    Eigen::VectorXd xn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      next = evaluate(pb, xn);
      if (std::isfinite(next.f) && next.f >= cur.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) return res.iterations > 0;
      s_hist.clear();
      y_hist.clear();
      continue;
    }
    const double gain = next.f - cur.f;
    const Eigen::VectorXd sv = xn - x;
    const Eigen::VectorXd yv = -(next.g - cur.g);
    if (sv.dot(yv) > 1e-16 * sv.norm() * yv.norm()) {
      s_hist.push_back(sv);
      y_hist.push_back(yv);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    x = xn;
    cur = next;
    res.trace.push_back(cur.f);
    ++res.iterations;
    // Keep Tr(AA^dagger) near one; the likelihood is scale invariant.
    const double n2 = x.squaredNorm();
    if (n2 > 10.0 || n2 < 0.1) {
      x /= std::sqrt(n2);
      cur = evaluate(pb, x);
      s_hist.clear();
      y_hist.clear();
    }
    stalls = gain < opt.tolerance ? stalls + 1 : 0;
    if (stalls >= 3) {
      res.converged = true;
      return true;
    }
  }
  return true;
}

/// Diluted fixed-point iteration rho -> (I + eps G) rho (I + eps G).
void fixed_point(const Problem& pb, Eigen::MatrixXcd& rho, const MleOptions& opt, MleResult& res) {
  const int d = pb.dim;
  double cur = pb.value(rho);
  double eps = 0.5;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXcd g = pb.gradient_op(rho);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(d, d) + eps * g;
      Eigen::MatrixXcd next = r * rho * r.adjoint();
      next /= next.trace().real();
      const double v = pb.value(next);
      if (std::isfinite(v) && v >= cur) {
        const double gain = v - cur;
        rho = next;
        cur = v;
        res.trace.push_back(cur);
        ++res.iterations;
        accepted = true;
        if (gain < opt.tolerance) {
          res.converged = true;
          return;
        }
        eps = std::min(eps * 1.5, 10.0);
        break;
      }
      eps *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      return;
    }
  }
}

}  // namespace

std::vector<MeasurementSetting> tomography_settings(int qubits, TomographyScheme scheme) {
  check_qubits(qubits);
  std::vector<MeasurementSetting> out;
  if (scheme == TomographyScheme::projectors) {
    std::size_t total = 1;
    for (int q = 0; q < qubits; ++q) total *= 6;
    for (std::size_t idx = 0; idx < total; ++idx) {
      MeasurementSetting s;
      std::size_t rest = idx;
      std::vector<std::size_t> digits(static_cast<std::size_t>(qubits));
      for (int q = qubits - 1; q >= 0; --q) {
        digits[static_cast<std::size_t>(q)] = rest % 6;
        rest /= 6;
      }
      for (int q = 0; q < qubits; ++q) {
        const auto e = optics::kAllEigenstates[digits[static_cast<std::size_t>(q)]];
        s.analyzers.push_back(optics::setting_for(e, kQubitChannels[static_cast<std::size_t>(q)]));
        s.label += optics::to_string(e);
      }
      s.outcomes = {0u};
      out.push_back(std::move(s));
    }
    return out;
  }
  const char bases[3] = {'Z', 'X', 'Y'};
  std::size_t total = 1;
  for (int q = 0; q < qubits; ++q) total *= 3;
  for (std::size_t idx = 0; idx < total; ++idx) {
    MeasurementSetting s;
    std::size_t rest = idx;
    std::vector<std::size_t> digits(static_cast<std::size_t>(qubits));
    for (int q = qubits - 1; q >= 0; --q) {
      digits[static_cast<std::size_t>(q)] = rest % 3;
      rest /= 3;
    }
    for (int q = 0; q < qubits; ++q) {
      const char b = bases[digits[static_cast<std::size_t>(q)]];
      s.analyzers.push_back(optics::basis_setting(b, kQubitChannels[static_cast<std::size_t>(q)]));
      s.label += b;
    }
    for (unsigned o = 0; o < (1u << qubits); ++o) s.outcomes.push_back(o);
    out.push_back(std::move(s));
  }
  return out;
}

TomographyInput make_tomography_input(int qubits, const std::vector<MeasurementSetting>& settings) {
  check_qubits(qubits);
  TomographyInput in;
  in.qubits = qubits;
  for (const auto& s : settings) {
    if (static_cast<int>(s.analyzers.size()) != qubits) throw DimensionError("setting has the wrong number of analyzers");
    for (unsigned o : s.outcomes) in.entries.push_back({outcome_ket(s, o), 0.0, 1.0});
  }
  return in;
}

void fill_expected_counts(TomographyInput& input, const DensityMatrix& rho, double total) {
  if (rho.qubits() != input.qubits) throw DimensionError("state and tomography input differ in qubit count");
  for (auto& e : input.entries) {
    const double p = std::max(0.0, (e.ket.adjoint() * rho.matrix() * e.ket)(0, 0).real());
    e.counts = total * e.exposure * p;
  }
}

double log_likelihood(const TomographyInput& input, const DensityMatrix& rho) {
  const Problem pb(input);
  double total = 0.0;
  for (const auto& e : input.entries) total += e.counts;
  return total * pb.value(rho.matrix());
}

MleResult tomography_mle(const TomographyInput& input, const MleOptions& options) {
  check_qubits(input.qubits);
  const Problem pb(input);
  double total = 0.0;
  for (const auto& e : input.entries) total += e.counts;

  const Eigen::MatrixXcd a0 = linear_inversion_start(pb, input.qubits);
  MleResult res;
  Eigen::VectorXd x = pack(a0);
  Eigen::MatrixXcd sigma;
  if (lbfgs(pb, x, options, res)) {
    const Eigen::MatrixXcd a = unpack(x, pb.dim);
    sigma = a * a.adjoint();
  } else {
    res.used_fallback = true;
    res.trace.clear();
    res.iterations = 0;
    sigma = a0 * a0.adjoint();
    sigma /= sigma.trace().real();
    fixed_point(pb, sigma, options, res);
  }
  sigma /= sigma.trace().real();
  res.rho = DensityMatrix::project_physical(sigma);
  res.log_likelihood = total * pb.value(res.rho.matrix());
  for (double& t : res.trace) t *= total;
  return res;
}

FidelityReport tomography_report(const TomographyInput& input, const Eigen::VectorXcd& target,
                                 int resamples, std::uint64_t seed, int threads) {
  const MleResult mle = tomography_mle(input);
  FidelityReport rep;
  rep.rho = mle.rho;
  rep.fidelity = fidelity(mle.rho, target);
  rep.log_likelihood = mle.log_likelihood;
  if (resamples < 2) return rep;

  double total = 0.0;
  double norm = 0.0;
  std::vector<double> p(input.entries.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto& e = input.entries[j];
    p[j] = std::max(0.0, (e.ket.adjoint() * mle.rho.matrix() * e.ket)(0, 0).real());
    total += e.counts;
    norm += e.exposure * p[j];
  }
  std::vector<double> fids(static_cast<std::size_t>(resamples), std::numeric_limits<double>::quiet_NaN());
  auto work = [&](int start, int stride) {
    for (int r = start; r < resamples; r += stride) {
      std::mt19937_64 eng(rng::derive_seed(seed, {0x70e0u, static_cast<std::uint64_t>(r)}));
      TomographyInput copy = input;
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double mu = total * copy.entries[j].exposure * p[j] / norm;
        copy.entries[j].counts = mu > 0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(eng)) : 0.0;
      }
      try {
        fids[static_cast<std::size_t>(r)] = fidelity(tomography_mle(copy).rho, target);
      } catch (const NumericError&) {
      }
    }
  };
  const int nt = std::max(1, std::min(threads, resamples));
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
    for (auto& th : pool) th.join();
  }
  double s1 = 0.0, s2 = 0.0;
  int used = 0;
  for (double f : fids) {
    if (std::isnan(f)) continue;
    s1 += f;
    s2 += f * f;
    ++used;
  }
  if (used > 1) {
    const double m = s1 / used;
    rep.sigma = std::sqrt(std::max(0.0, (s2 - used * m * m) / (used - 1)));
  }
  return rep;
}

nlohmann::json tomography_input_to_json(const TomographyInput& input) {
  nlohmann::json j;
  j["schema"] = "tbent.tomography/1";
  j["qubit_order"] = input.qubits == 2 ? nlohmann::json{"s1", "i1"} : nlohmann::json{"s1", "i1", "s2", "i2"};
  j["entries"] = nlohmann::json::array();
  for (const auto& e : input.entries) {
    nlohmann::json row;
    std::vector<double> re, im;
    for (Eigen::Index k = 0; k < e.ket.size(); ++k) {
      re.push_back(e.ket(k).real());
      im.push_back(e.ket(k).imag());
    }
    row["ket_re"] = re;
    row["ket_im"] = im;
    row["counts"] = e.counts;
    row["exposure"] = e.exposure;
    j["entries"].push_back(row);
  }
  return j;
}

TomographyInput tomography_input_from_json(const nlohmann::json& j) {
  if (j.value("schema", std::string{}) != "tbent.tomography/1") {
    throw ConfigError("tomography JSON must carry schema tbent.tomography/1");
  }
  TomographyInput in;
  in.qubits = static_cast<int>(j.at("qubit_order").size());
  check_qubits(in.qubits);
  for (const auto& row : j.at("entries")) {
    const auto re = row.at("ket_re").get<std::vector<double>>();
    const auto im = row.at("ket_im").get<std::vector<double>>();
    if (re.size() != im.size() || re.size() != (1u << in.qubits)) throw DimensionError("ket size mismatch");
    TomographyEntry e;
    e.ket.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t k = 0; k < re.size(); ++k) e.ket(static_cast<Eigen::Index>(k)) = Complex(re[k], im[k]);
    e.counts = row.at("counts").get<double>();
    e.exposure = row.value("exposure", 1.0);
    in.entries.push_back(std::move(e));
  }
  return in;
}

}  // namespace tbent::analysis
