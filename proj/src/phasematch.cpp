#include "tbent/phasematch.hpp"

#include "tbent/errors.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tbent::phasematch {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc2(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
  const double s = std::sin(x) / x;
  return s * s;
}

double nm_to_hz(double nm) { return kSpeedOfLight / (nm * 1e-9); }
double hz_to_nm(double hz) { return kSpeedOfLight / hz * 1e9; }

template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

struct DispersionTable::Spline {
  gsl_interp_accel* acc = nullptr;
  gsl_spline* spline = nullptr;
  ~Spline() {
    if (spline) gsl_spline_free(spline);
    if (acc) gsl_interp_accel_free(acc);
  }
};

DispersionTable::DispersionTable(std::vector<double> wavelength_nm, std::vector<double> n_eff, std::string name)
    : wl_(std::move(wavelength_nm)), n_(std::move(n_eff)), name_(std::move(name)) {
  build();
}

DispersionTable::~DispersionTable() = default;
DispersionTable::DispersionTable(const DispersionTable& o) : wl_(o.wl_), n_(o.n_), name_(o.name_) { build(); }
DispersionTable& DispersionTable::operator=(const DispersionTable& o) {
  if (this != &o) {
    wl_ = o.wl_;
    n_ = o.n_;
    name_ = o.name_;
    build();
  }
  return *this;
}
DispersionTable::DispersionTable(DispersionTable&&) noexcept = default;
DispersionTable& DispersionTable::operator=(DispersionTable&&) noexcept = default;

void DispersionTable::build() {
  if (wl_.size() != n_.size()) throw ConfigError("dispersion columns differ in length");
  if (wl_.size() < 4) throw ConfigError("dispersion table needs at least 4 samples");
  for (std::size_t k = 1; k < wl_.size(); ++k) {
    if (!(wl_[k] > wl_[k - 1])) throw ConfigError("dispersion wavelengths must be strictly increasing");
  }
  for (double n : n_) {
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("effective index must be positive");
  }
  gsl_set_error_handler_off();
  spline_ = std::make_unique<Spline>();
  spline_->acc = gsl_interp_accel_alloc();
  spline_->spline = gsl_spline_alloc(gsl_interp_cspline, wl_.size());
  if (gsl_spline_init(spline_->spline, wl_.data(), n_.data(), wl_.size()) != GSL_SUCCESS) {
    throw NumericError("spline construction failed");
  }
}

DispersionTable DispersionTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dispersion table " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("wavelength_nm,n_eff", 0) != 0) {
    throw ConfigError(path + ": expected header 'wavelength_nm,n_eff'");
  }
  std::vector<double> wl, n;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) throw ConfigError(path + ": malformed row " + line);
    wl.push_back(std::stod(a));
    n.push_back(std::stod(b));
  }
  return DispersionTable(std::move(wl), std::move(n), path);
}

bool DispersionTable::contains(double w) const { return w >= wl_.front() && w <= wl_.back(); }

double DispersionTable::n_eff(double w) const {
  if (!contains(w)) {
    std::ostringstream os;
    os << "wavelength " << w << " nm outside dispersion table range [" << wl_.front() << ", " << wl_.back()
       << "] nm";
    throw RangeError(os.str());
  }
  return gsl_spline_eval(spline_->spline, w, spline_->acc);
}

Dispersion::Dispersion(std::vector<DispersionTable> bands) : bands_(std::move(bands)) {}

double Dispersion::n_eff(double w) const {
  for (const auto& b : bands_) {
    if (b.contains(w)) return b.n_eff(w);
  }
  std::ostringstream os;
  os << "no dispersion table covers " << w << " nm";
  throw RangeError(os.str());
}

void PolingSpec::validate() const {
  if (!(period_um > 0.0)) throw ConfigError("poling period must be positive");
  if (!(length_mm > 0.0)) throw ConfigError("waveguide length must be positive");
  if (!(duty_cycle > 0.0 && duty_cycle < 1.0)) throw ConfigError("duty cycle must lie in (0, 1)");
}

double qpm_period_from_indices(double pump_nm, double n_pump, double n_degenerate) {
  const double dn = n_pump - n_degenerate;
  if (!(dn > 0.0)) throw NoQpmSolutionError("pump index does not exceed the degenerate index");
  return pump_nm / dn * 1e-3;
}

double qpm_period(const Dispersion& d, double pump_nm) {
  return qpm_period_from_indices(pump_nm, d.n_eff(pump_nm), d.n_eff(2.0 * pump_nm));
}

double delta_beta(const Dispersion& d, const PolingSpec& poling, double pump_nm, double signal_nm,
                  double idler_nm) {
  auto beta = [&](double nm) { return 2.0 * kPi * d.n_eff(nm) / (nm * 1e-3); };
  return beta(signal_nm) + beta(idler_nm) - beta(pump_nm) + 2.0 * kPi / poling.period_um;
}

double pm_intensity(double dbeta, double length_mm) { return sinc2(0.5 * dbeta * length_mm * 1e3); }

double half_max_argument() {
  return bisect([](double x) { return sinc2(x) - 0.5; }, 1.0, 2.0);
}

double bandwidth(const Dispersion& d, const PolingSpec& poling, double pump_nm, BandwidthCriterion criterion) {
  poling.validate();
  const double target = criterion == BandwidthCriterion::first_zero ? kPi : half_max_argument();
  const double nu_p = nm_to_hz(pump_nm);
  // |delta_beta| L / 2 as a function of signal detuning (Hz).
  auto arg = [&](double detuning) {
    const double s = hz_to_nm(0.5 * nu_p + detuning);
    const double i = hz_to_nm(0.5 * nu_p - detuning);
    return std::abs(delta_beta(d, poling, pump_nm, s, i)) * poling.length_mm * 1e3 * 0.5;
  };
  if (arg(0.0) >= target) throw RangeError("criterion already violated at degeneracy");
  auto side = [&](double sign) {
    const double step = 0.1e12;
    double lo = 0.0;
    for (int k = 1; k < 10000; ++k) {
      const double hi = sign * step * k;
      double v;
      try {
        v = arg(hi);
      } catch (const RangeError&) {
        throw RangeError("bandwidth criterion not reached within the dispersion table range");
      }
      if (v >= target) return std::abs(bisect([&](double x) { return arg(x) - target; }, lo, hi));
      lo = hi;
    }
    throw RangeError("bandwidth criterion not reached");
  };
  return (side(+1.0) + side(-1.0)) * 1e-12;
}

void ShgParams::validate() const {
  if (!(d33_pm_per_v > 0 && wavelength_fh_nm > 0 && n_fh > 0 && n_sh > 0 && a_eff_um2 > 0)) {
    throw ConfigError("SHG parameters must be positive");
  }
  if (!(overlap > 0.0 && overlap <= 1.0)) throw ConfigError("overlap must lie in (0, 1]");
}

double shg_efficiency_theory(const ShgParams& p, const PolingSpec& poling) {
  p.validate();
  poling.validate();
  const double d33 = p.d33_pm_per_v * 1e-12;
  const double len = poling.length_mm * 1e-3;
  const double lam = p.wavelength_fh_nm * 1e-9;
  const double area = p.a_eff_um2 * 1e-12;
  const double s = std::sin(kPi * poling.duty_cycle);
  const double eta = 32.0 * d33 * d33 * len * len /
                     (kEpsilon0 * kSpeedOfLight * p.n_fh * p.n_fh * p.n_sh * lam * lam) *
                     p.overlap * p.overlap / area * s * s;
  return eta * 100.0;
}

double calibrate_effective_area(const ShgParams& params, const PolingSpec& poling, double target) {
  if (!(target > 0.0)) throw ConfigError("target efficiency must be positive");
  ShgParams unit = params;
  unit.a_eff_um2 = 1.0;
  unit.overlap = 1.0;
  return shg_efficiency_theory(unit, poling) / target;
}

double shg_efficiency_measured(double p_fh, double p_sh, double eta_fh, double eta_sh) {
  if (!(p_fh > 0.0 && p_sh > 0.0)) throw ConfigError("powers must be positive");
  if (!(eta_fh > 0.0 && eta_fh <= 1.0 && eta_sh > 0.0 && eta_sh <= 1.0)) {
    throw ConfigError("transmission efficiencies must lie in (0, 1]");
  }
  const double fh = p_fh / eta_fh;
  return (p_sh / eta_sh) / (fh * fh) * 100.0;
}

double transform_limited_bandwidth(double pulse_fwhm_s) {
  if (!(pulse_fwhm_s > 0.0)) throw ConfigError("pulse duration must be positive");
  return 2.0 * std::log(2.0) / kPi / pulse_fwhm_s;
}

JsiGrid jsi(const Dispersion& d, const PolingSpec& poling, double pump_nm, double pump_fwhm_hz,
            const std::vector<double>& signal_nm, const std::vector<double>& idler_nm) {
  poling.validate();
  if (signal_nm.empty() || idler_nm.empty()) throw ConfigError("JSI grid is empty");
  if (!(pump_fwhm_hz >= 0.0)) throw ConfigError("pump bandwidth must be non-negative");
  const double nu_p = nm_to_hz(pump_nm);
  JsiGrid g{signal_nm, idler_nm, {}};
  g.intensity.assign(signal_nm.size(), std::vector<double>(idler_nm.size(), 0.0));
  double peak = 0.0;
  for (std::size_t a = 0; a < signal_nm.size(); ++a) {
    const double nu_s = nm_to_hz(signal_nm[a]);
    std::size_t best = 0;
    if (pump_fwhm_hz == 0.0) {
      double err = 1e300;
      for (std::size_t b = 0; b < idler_nm.size(); ++b) {
        const double e = std::abs(nu_s + nm_to_hz(idler_nm[b]) - nu_p);
        if (e < err) {
          err = e;
          best = b;
        }
      }
      // only a true crossing of the anti-diagonal counts
      double spacing = 0.0;
      if (idler_nm.size() > 1) {
        const std::size_t nb = best + 1 < idler_nm.size() ? best + 1 : best - 1;
        spacing = std::abs(nm_to_hz(idler_nm[nb]) - nm_to_hz(idler_nm[best]));
      }
      if (err > 0.5 * spacing + 1e-6 * nu_p * 1e-9) continue;
    }
    for (std::size_t b = 0; b < idler_nm.size(); ++b) {
      if (pump_fwhm_hz == 0.0 && b != best) continue;
      const double nu_i = nm_to_hz(idler_nm[b]);
      const double nu_sum = nu_s + nu_i;
      double env = 1.0;
      if (pump_fwhm_hz > 0.0) {
        const double x = (nu_sum - nu_p) / pump_fwhm_hz;
        env = std::exp(-4.0 * std::log(2.0) * x * x);
      }
      if (env < 1e-300) continue;
      const double lp = hz_to_nm(nu_sum);
      const double v = env * pm_intensity(delta_beta(d, poling, lp, signal_nm[a], idler_nm[b]), poling.length_mm);
      g.intensity[a][b] = v;
      peak = std::max(peak, v);
    }
  }
  if (peak > 0.0) {
    for (auto& row : g.intensity) {
      for (double& v : row) v /= peak;
    }
  }
  return g;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return out;
}

}  // namespace tbent::phasematch
