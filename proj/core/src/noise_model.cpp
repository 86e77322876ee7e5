#include "qrng/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrng/error.hpp"

namespace qrng::noise {
namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ParameterError(field, what);
}

void require_frequency(double f) {
  require(std::isfinite(f) && f >= 0.0, "frequency", "must be finite and >= 0");
}

double thermal_current_density(double temperature, double resistance) {
  return std::sqrt(4.0 * kBoltzmann * temperature / resistance);
}

// sqrt(2 e I) for the series pair, where I = 2 x per-diode current.
double pair_shot_density(double per_diode_current) {
  return std::sqrt(2.0 * kElementaryCharge * 2.0 * per_diode_current);
}

}  // namespace

PhotodiodeModel PhotodiodeModel::gesi() { return {}; }

PhotodiodeModel PhotodiodeModel::gesi_alt_dark() {
  PhotodiodeModel pd;
  pd.dark_current = 5e-8;
  pd.label = "GeSi (I_PDD = 5e-8 A)";
  return pd;
}

PhotodiodeModel PhotodiodeModel::ingaas() {
  return {.shunt_resistance = 1e11,
          .junction_capacitance = 0.8e-12,
          .dark_current = 5e-12,
          .label = "InGaAs"};
}

void PhotodiodeModel::validate() const {
  require(shunt_resistance > 0.0, "shunt_resistance", "must be > 0");
  require(junction_capacitance > 0.0, "junction_capacitance", "must be > 0");
  require(dark_current >= 0.0, "dark_current", "must be >= 0");
}

void FrontEndModel::validate() const {
  require(feedback_resistance > 0.0, "feedback_resistance", "must be > 0");
  require(feedback_capacitance >= 0.0, "feedback_capacitance", "must be >= 0");
  require(feedback_parasitic >= 0.0, "feedback_parasitic", "must be >= 0");
  require(amp_input_capacitance > 0.0, "amp_input_capacitance", "must be > 0");
  require(input_parasitic >= 0.0, "input_parasitic", "must be >= 0");
  require(gain_bandwidth > 0.0, "gain_bandwidth", "must be > 0");
  require(voltage_noise_white > 0.0, "voltage_noise_white", "must be > 0");
  require(flicker_coefficient > 0.0, "flicker_coefficient", "must be > 0");
  require(current_noise > 0.0, "current_noise", "must be > 0");
}

void DetectorConfig::validate() const {
  photodiode.validate();
  frontend.validate();
  require(temperature > 0.0, "temperature", "must be > 0");
  require(photocurrent >= 0.0, "photocurrent", "must be >= 0");
  require(hpf_cutoff >= 0.0, "hpf_cutoff", "must be >= 0");
  require(second_stage_gain >= 1.0, "second_stage_gain", "must be >= 1");
  require(load_resistance > 0.0, "load_resistance", "must be > 0");
}

double SourceDensities::total() const {
  return std::sqrt(i_pdt * i_pdt + i_pdd * i_pdd + i_nc * i_nc + i_rft * i_rft + i_nv * i_nv);
}

std::complex<double> input_impedance(const DetectorConfig& cfg, double f) {
  require_frequency(f);
  return 1.0 / cd(2.0 / cfg.photodiode.shunt_resistance, kTwoPi * f * cfg.total_input_capacitance());
}

std::complex<double> feedback_impedance(const DetectorConfig& cfg, double f) {
  require_frequency(f);
  const auto& fe = cfg.frontend;
  return 1.0 / cd(1.0 / fe.feedback_resistance, kTwoPi * f * fe.total_feedback_capacitance());
}

SourceDensities classical_source_densities(const DetectorConfig& cfg, double f) {
  cfg.validate();
  require_frequency(f);
  const auto& fe = cfg.frontend;

  SourceDensities d;
  // Series pair: shunt R_PD/2, dark current doubled.
  d.i_pdt = thermal_current_density(cfg.temperature, cfg.photodiode.shunt_resistance / 2.0);
  d.i_pdd = pair_shot_density(cfg.photodiode.dark_current);
  d.i_rft = thermal_current_density(cfg.temperature, fe.feedback_resistance);
  d.i_nc = fe.current_noise;

  if (f == 0.0) {
    d.flicker_divergent = true;
    d.i_nv = std::numeric_limits<double>::infinity();
    return d;
  }
  const double flicker = fe.flicker_coefficient / std::sqrt(f);
  const double u_nv = std::hypot(fe.voltage_noise_white, flicker);
  const cd admittance = 1.0 / input_impedance(cfg, f) + 1.0 / feedback_impedance(cfg, f);
  d.i_nv = std::abs(admittance) * u_nv;
  return d;
}

double shot_noise_density(double photocurrent) {
  require(std::isfinite(photocurrent) && photocurrent >= 0.0, "photocurrent", "must be >= 0");
  return pair_shot_density(photocurrent);
}

std::complex<double> tia_gain(const DetectorConfig& cfg, double f) {
  cfg.validate();
  const cd y_f = 1.0 / feedback_impedance(cfg, f);
  const cd y_in = 1.0 / input_impedance(cfg, f);
  const cd jf_over_gbw(0.0, f / cfg.frontend.gain_bandwidth);
  return -1.0 / (y_f + jf_over_gbw * (y_f + y_in));
}

std::complex<double> tia_gain_expanded(const DetectorConfig& cfg, double f) {
  cfg.validate();
  require_frequency(f);
  const auto& fe = cfg.frontend;
  const double rf = fe.feedback_resistance;
  const double gbw = fe.gain_bandwidth;
  const double ctf = fe.total_feedback_capacitance();
  const double ctin = cfg.total_input_capacitance();
  const double rpd = cfg.photodiode.shunt_resistance;

  const double re = 1.0 - kTwoPi * f * f * rf * (ctin + ctf) / gbw;
  const double im = f / gbw + f * rf * 2.0 / (rpd * gbw) + kTwoPi * f * ctf * rf;
  return -rf / cd(re, im);
}

std::complex<double> hpf_response(double cutoff, double f) {
  require(std::isfinite(cutoff) && cutoff >= 0.0, "hpf_cutoff", "must be >= 0");
  require_frequency(f);
  if (cutoff == 0.0) return {1.0, 0.0};
  // H(f) = j(f/fc) / (1 + j f/fc)
  const cd jx(0.0, f / cutoff);
  return jx / (1.0 + jx);
}

double output_voltage_density(const DetectorConfig& cfg, double f, const OutputOptions& options) {
  require(f > 0.0, "frequency", "must be > 0");
  const auto src = classical_source_densities(cfg, f);
  double i_total = src.total();
  if (options.include_shot) i_total = std::hypot(i_total, shot_noise_density(cfg.photocurrent));

  double u = i_total * std::abs(tia_gain(cfg, f));
  if (options.include_hpf) u *= std::abs(hpf_response(cfg.hpf_cutoff, f));
  if (options.include_second_stage) u *= cfg.second_stage_gain;
  return u;
}

double density_to_dbm_per_hz(double u, double load) {
  require(std::isfinite(u) && u >= 0.0, "voltage_density", "must be >= 0");
  require(load > 0.0, "load_resistance", "must be > 0");
  const double half = u / 2.0;
  return 10.0 * std::log10(half * half / load / 1e-3);
}

double power_in_rbw(double s_dbm_per_hz, double rbw) {
  require(rbw > 0.0, "rbw", "must be > 0");
  return s_dbm_per_hz + 10.0 * std::log10(rbw);
}

double qcnr(const DetectorConfig& cfg, double f) {
  require(f > 0.0, "frequency", "must be > 0");
  const double classical = classical_source_densities(cfg, f).total();
  const double shot = shot_noise_density(cfg.photocurrent);
  if (shot == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(shot / classical);
}

double bandwidth_3db(const DetectorConfig& cfg) {
  cfg.validate();
  const double target = std::abs(tia_gain(cfg, 0.0)) / std::numbers::sqrt2;
  auto excess = [&](double f) { return std::abs(tia_gain(cfg, f)) - target; };

  // Bracket on a log grid (20 points per decade), then bisect in log space.
  constexpr double kLo = 1.0, kHi = 1e10;
  constexpr int kSteps = 200;
  double prev = kLo;
  if (excess(prev) <= 0.0) return prev;
  for (int k = 1; k <= kSteps; ++k) {
    const double f = kLo * std::pow(kHi / kLo, static_cast<double>(k) / kSteps);
    if (excess(f) <= 0.0) {
      double lo = prev, hi = f;
      while ((hi - lo) > 1e-6 * lo) {
        const double mid = std::sqrt(lo * hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = f;
  }
  throw ComputationError("no 3-dB crossing of the TIA gain within [1 Hz, 10 GHz]");
}

double cmrr_from_imbalance(double split_a, double split_b, double responsivity_mismatch) {
  require(split_a > 0.0, "split_a", "must be > 0");
  require(split_b > 0.0, "split_b", "must be > 0");
  require(std::isfinite(responsivity_mismatch) && std::abs(responsivity_mismatch) < 2.0,
          "responsivity_mismatch", "must lie in (-2, 2)");
  const double pa = split_a * (1.0 + responsivity_mismatch / 2.0);
  const double pb = split_b * (1.0 - responsivity_mismatch / 2.0);
  const double diff = std::abs(pa - pb);
  if (diff == 0.0) return kCmrrCapDb;
  return std::min(kCmrrCapDb, 20.0 * std::log10((pa + pb) / diff));
}

std::vector<double> log_grid(double fmin, double fmax, int per_decade) {
  require(fmin > 0.0 && std::isfinite(fmin), "fmin", "must be > 0");
  require(fmax > fmin && std::isfinite(fmax), "fmax", "must be > fmin");
  require(per_decade >= 1, "points_per_decade", "must be >= 1");
  const double decades = std::log10(fmax / fmin);
  const auto steps = static_cast<int>(std::ceil(decades * per_decade - 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k < steps; ++k) grid.push_back(fmin * std::pow(10.0, k * decades / steps));
  grid.push_back(fmax);
  return grid;
}

NoiseSpectrum noise_spectrum(const DetectorConfig& cfg, std::span<const double> f_grid,
                             const OutputOptions& options) {
  cfg.validate();
  require(!f_grid.empty(), "frequencies", "grid is empty");
  for (std::size_t k = 0; k < f_grid.size(); ++k) {
    require(f_grid[k] > 0.0 && std::isfinite(f_grid[k]), "frequencies", "must be positive");
    require(k == 0 || f_grid[k] > f_grid[k - 1], "frequencies", "must be strictly increasing");
  }

  NoiseSpectrum s;
  const std::size_t n = f_grid.size();
  s.frequencies.assign(f_grid.begin(), f_grid.end());
  for (auto* v : {&s.i_pdt, &s.i_pdd, &s.i_rft, &s.i_nc, &s.i_nv, &s.total_classical, &s.shot,
                  &s.u_out, &s.s_dbm_hz}) {
    v->reserve(n);
  }

  const double shot = shot_noise_density(cfg.photocurrent);
  for (double f : f_grid) {
    const auto d = classical_source_densities(cfg, f);
    s.i_pdt.push_back(d.i_pdt);
    s.i_pdd.push_back(d.i_pdd);
    s.i_rft.push_back(d.i_rft);
    s.i_nc.push_back(d.i_nc);
    s.i_nv.push_back(d.i_nv);
    s.total_classical.push_back(d.total());
    s.shot.push_back(shot);
    const double u = output_voltage_density(cfg, f, options);
    s.u_out.push_back(u);
    s.s_dbm_hz.push_back(density_to_dbm_per_hz(u, cfg.load_resistance));
  }
  return s;
}

std::vector<FeedbackCandidate> sweep_feedback(const DetectorConfig& cfg,
                                              std::span<const double> feedback_resistances,
                                              std::span<const double> feedback_capacitances,
                                              double min_bandwidth) {
  cfg.validate();
  require(!feedback_resistances.empty(), "feedback_resistances", "range is empty");
  require(!feedback_capacitances.empty(), "feedback_capacitances", "range is empty");
  require(min_bandwidth >= 0.0, "min_bandwidth", "must be >= 0");

  std::vector<FeedbackCandidate> out;
  for (double rf : feedback_resistances) {
    for (double ctf : feedback_capacitances) {
      DetectorConfig trial = cfg;
      trial.frontend.feedback_resistance = rf;
      trial.frontend.feedback_capacitance = 0.0;
      trial.frontend.feedback_parasitic = ctf;
      trial.validate();

      double bw = 0.0;
      try {
        bw = bandwidth_3db(trial);
      } catch (const ComputationError&) {
        continue;
      }
      if (bw < min_bandwidth) continue;
      out.push_back({rf, ctf, bw, qcnr(trial, kSweepQcnrFrequency)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.qcnr_db > b.qcnr_db;
  });
  return out;
}

}  // namespace qrng::noise
