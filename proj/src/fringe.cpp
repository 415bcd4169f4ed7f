#include "tbent/fringe.hpp"

#include "tbent/errors.hpp"
#include "tbent/optics.hpp"
#include "tbent/rng.hpp"

#include <boost/math/tools/minima.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace tbent::analysis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kWeightPasses = 3;

double shape(FringeOrder order, double x) {
  const double c2 = std::cos(x) * std::cos(x);
  return order == FringeOrder::twofold ? c2 : c2 * c2;
}

struct Linear {
  double a = 0.0, b = 0.0, sse = 0.0;
};

/// Best (A >= 0, B) for a fixed phase under weights w; sse is weighted.
Linear solve_linear(const FringeScan& scan, const std::vector<double>& w, double phase) {
  const std::size_t n = scan.theta_i.size();
  double sw = 0, sg = 0, sgg = 0, sy = 0, sgy = 0;
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = shape(scan.order, 2.0 * scan.theta_i[k] - phase);
    sw += w[k];
    sg += w[k] * g[k];
    sgg += w[k] * g[k] * g[k];
    sy += w[k] * scan.values[k];
    sgy += w[k] * g[k] * scan.values[k];
  }
  const double det = sw * sgg - sg * sg;
  Linear out;
  if (std::abs(det) > 1e-300 * sw * sw) {
    out.a = (sw * sgy - sg * sy) / det;
    out.b = (sy - out.a * sg) / sw;
  }
  if (!(out.a > 0.0)) {
    out.a = 0.0;
    out.b = sy / sw;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double r = scan.values[k] - (out.a * g[k] + out.b);
    out.sse += w[k] * r * r;
  }
  return out;
}

double wrap_phase(double phi) {
  phi = std::fmod(phi, kPi);
  return phi < 0 ? phi + kPi : phi;
}

}  // namespace

void FringeScan::validate() const {
  if (theta_i.size() != values.size()) throw ConfigError("fringe scan grid and values differ in size");
  if (theta_i.size() < 8) throw ConfigError("fringe fit needs at least 8 points");
  for (std::size_t k = 1; k < theta_i.size(); ++k) {
    if (!(theta_i[k] > theta_i[k - 1])) throw ConfigError("fringe grid must be strictly increasing");
  }
  if (theta_i.back() - theta_i.front() < kPi - 1e-9) throw ConfigError("fringe grid must span at least pi");
  for (double v : values) {
    if (!std::isfinite(v)) throw FitFailure("fringe data contain non-finite values");
  }
}

double predict_fringe(const PureState& state, double theta_s, double theta_i, FringeOrder order) {
  const int expected = order == FringeOrder::twofold ? 2 : 4;
  if (state.photon_count() != expected) {
    throw ArityError("fringe order needs " + std::to_string(expected) + " photons, state has " +
                     std::to_string(state.photon_count()));
  }
  std::vector<optics::AnalyzerSetting> settings;
  std::vector<optics::Port> ports;
  for (const auto& [channel, copy] : state.photons()) {
    const bool signal = channel == Channel::s1 || channel == Channel::s2;
    settings.push_back({channel, signal ? theta_s : theta_i, 0.0});
    ports.push_back(optics::Port::H);
  }
  const PureState proj = optics::measure_projector(settings, ports);
  return std::norm(inner(proj, state));
}

double fringe_model(FringeOrder order, double amplitude, double offset, double phase, double theta) {
  return amplitude * shape(order, 2.0 * theta - phase) + offset;
}

FringeFit fit_fringe(const FringeScan& scan) {
  scan.validate();
  const std::size_t n = scan.theta_i.size();

  // Phase seed from the 4 theta Fourier component; both shapes carry it with
  // a positive weight, so its argument is 2 phi.
  Complex c{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) c += scan.values[k] * std::polar(1.0, 4.0 * scan.theta_i[k]);
  const double seed = std::abs(c) > 0 ? wrap_phase(0.5 * std::arg(c)) : 0.0;

  // Poisson weights 1/max(model, 1), refined from an unweighted start.
  std::vector<double> w(n, 1.0);
  double best_phi = seed;
  int restarts = 0;
  for (int pass = 0; pass < kWeightPasses; ++pass) {
    auto objective = [&](double phi) { return solve_linear(scan, w, phi).sse; };
    const double start = pass == 0 ? seed : best_phi;
    double best = objective(start);
    best_phi = start;
    // Bounded restarts tiling one full period around the start.
    for (int k = 0; k < 8; ++k) {
      const double centre = start + (k % 2 == 0 ? 1 : -1) * ((k + 1) / 2) * kPi / 8;
      const auto [phi, val] =
          boost::math::tools::brent_find_minima(objective, centre - kPi / 16, centre + kPi / 16, 52);
      ++restarts;
      if (val < best) {
        best = val;
        best_phi = phi;
      }
    }
    if (!std::isfinite(best)) throw FitFailure("fringe fit did not converge after " + std::to_string(restarts) + " restarts");
    if (pass + 1 == kWeightPasses) break;
    const Linear lin = solve_linear(scan, w, best_phi);
    for (std::size_t k = 0; k < n; ++k) {
      const double m = fringe_model(scan.order, lin.a, lin.b, best_phi, scan.theta_i[k]);
      w[k] = 1.0 / std::max(m, 1.0);
    }
  }

  const Linear lin = solve_linear(scan, w, best_phi);
  FringeFit fit;
  fit.amplitude = lin.a;
  fit.offset = lin.b;
  fit.phase = wrap_phase(best_phi);
  fit.c_max = lin.a + lin.b;
  fit.c_min = std::max(0.0, lin.b);
  fit.visibility = fit.c_max + fit.c_min > 0 ? (fit.c_max - fit.c_min) / (fit.c_max + fit.c_min) : 0.0;
  double mean = 0.0;
  for (double v : scan.values) mean += v;
  mean /= static_cast<double>(n);
  double sst = 0.0, sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = scan.values[k] - fringe_model(scan.order, lin.a, lin.b, best_phi, scan.theta_i[k]);
    sse += r * r;
    sst += (scan.values[k] - mean) * (scan.values[k] - mean);
  }
  fit.r_squared = sst > 0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  fit.restarts = restarts;
  return fit;
}

FringeFit fit_fringe_bootstrap(const FringeScan& scan, int resamples, std::uint64_t seed) {
  FringeFit fit = fit_fringe(scan);
  if (resamples < 2) return fit;
  double s1 = 0.0, s2 = 0.0;
  int used = 0;
  for (int r = 0; r < resamples; ++r) {
    std::mt19937_64 eng(rng::derive_seed(seed, {0xb007u, static_cast<std::uint64_t>(r)}));
    FringeScan copy = scan;
    for (std::size_t k = 0; k < copy.values.size(); ++k) {
      const double mu = fringe_model(scan.order, fit.amplitude, fit.offset, fit.phase, scan.theta_i[k]);
      copy.values[k] = mu > 0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(eng)) : 0.0;
    }
    try {
      const double v = fit_fringe(copy).visibility;
      s1 += v;
      s2 += v * v;
      ++used;
    } catch (const FitFailure&) {
    }
  }
  if (used > 1) {
    const double m = s1 / used;
    fit.visibility_sigma = std::sqrt(std::max(0.0, (s2 - used * m * m) / (used - 1)));
  }
  return fit;
}

ChshResult chsh_check(double visibility) {
  const double threshold = 1.0 / std::sqrt(2.0);
  return {visibility > threshold, visibility - threshold};
}

}  // namespace tbent::analysis
