#pragma once

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace tbent::phasematch {

inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kEpsilon0 = 8.8541878128e-12;     // F/m

/// Effective index vs wavelength for one band, natural cubic spline.
/// Queries outside the sampled range throw RangeError.
class DispersionTable {
 public:
  DispersionTable(std::vector<double> wavelength_nm, std::vector<double> n_eff, std::string name = {});
  ~DispersionTable();
  DispersionTable(const DispersionTable& other);
  DispersionTable& operator=(const DispersionTable& other);
  DispersionTable(DispersionTable&&) noexcept;
  DispersionTable& operator=(DispersionTable&&) noexcept;

  /// Reads a `wavelength_nm,n_eff` CSV.
  static DispersionTable load_csv(const std::string& path);

  double n_eff(double wavelength_nm) const;
  bool contains(double wavelength_nm) const;
  double min_wavelength() const { return wl_.front(); }
  double max_wavelength() const { return wl_.back(); }
  const std::string& name() const { return name_; }

 private:
  void build();
  std::vector<double> wl_;
  std::vector<double> n_;
  std::string name_;
  struct Spline;
  std::unique_ptr<Spline> spline_;
};

/// Several bands; each query picks the table whose range holds the wavelength.
class Dispersion {
 public:
  Dispersion() = default;
  explicit Dispersion(std::vector<DispersionTable> bands);
  void add(DispersionTable band) { bands_.push_back(std::move(band)); }
  double n_eff(double wavelength_nm) const;
  const std::vector<DispersionTable>& bands() const { return bands_; }

 private:
  std::vector<DispersionTable> bands_;
};

struct PolingSpec {
  double period_um = 15.0;
  double length_mm = 12.0;
  double duty_cycle = 0.68;

  void validate() const;
};

/// Lambda = lambda_p / (n(lambda_p) - n(2 lambda_p)), in um.
double qpm_period_from_indices(double pump_nm, double n_pump, double n_degenerate);
double qpm_period(const Dispersion& dispersion, double pump_nm);

/// Signed mismatch beta_s + beta_i - beta_p + 2 pi / Lambda in rad/um, with
/// beta = 2 pi n_eff / lambda. Zero at degeneracy for the matched period.
double delta_beta(const Dispersion& dispersion, const PolingSpec& poling, double pump_nm,
                  double signal_nm, double idler_nm);

/// sinc^2(delta_beta L / 2), delta_beta in rad/um and L in mm.
double pm_intensity(double delta_beta, double length_mm);

/// Root of sinc^2(x) = 1/2, x ~ 1.3916.
double half_max_argument();

enum class BandwidthCriterion { first_zero, half_max };

/// Full signal-frequency span (THz) over which the criterion holds, from the
/// first crossing on each side of degeneracy.
double bandwidth(const Dispersion& dispersion, const PolingSpec& poling, double pump_nm,
                 BandwidthCriterion criterion);

struct ShgParams {
  double d33_pm_per_v = 27.0;
  double wavelength_fh_nm = 1550.0;
  double n_fh = 2.1152;
  double n_sh = 2.1669;
  double a_eff_um2 = 14.9;
  double overlap = 1.0;  // zeta

  void validate() const;
};

/// 32 d33^2 L^2 / (eps0 c n_FH^2 n_SH lambda^2) * zeta^2 / A_eff * sin^2(pi D), in %/W.
double shg_efficiency_theory(const ShgParams& params, const PolingSpec& poling);

/// A_eff / zeta^2 (um^2) that yields `target_percent_per_w`.
double calibrate_effective_area(const ShgParams& params, const PolingSpec& poling,
                                double target_percent_per_w);

/// (P_SH / eta_SH) / (P_FH / eta_FH)^2 in %/W, powers in W.
double shg_efficiency_measured(double p_fh_w, double p_sh_w, double eta_fh, double eta_sh);

struct JsiGrid {
  std::vector<double> signal_nm;
  std::vector<double> idler_nm;
  std::vector<std::vector<double>> intensity;  // [signal][idler], unit peak
};

/// Intensity FWHM in Hz of a transform-limited Gaussian pulse of the given FWHM duration.
double transform_limited_bandwidth(double pulse_fwhm_s);

/// |pump envelope(w_s + w_i)|^2 sinc^2(delta_beta L / 2). `pump_fwhm_hz` is
/// the intensity FWHM; zero selects the delta limit, keeping on each signal row
/// only the idler sample closest to energy conservation.
JsiGrid jsi(const Dispersion& dispersion, const PolingSpec& poling, double pump_nm,
            double pump_fwhm_hz, const std::vector<double>& signal_nm,
            const std::vector<double>& idler_nm);

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace tbent::phasematch
