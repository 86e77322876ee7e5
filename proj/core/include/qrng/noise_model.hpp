#pragma once

// Closed-form noise budget of a balanced homodyne detector: two photodiodes
// in series feeding a transimpedance amplifier (TIA), followed by a
// first-order high-pass filter and an optional noiseless second-stage gain.
//
// All quantities are SI: ohms, farads, amperes, hertz, kelvin. Current noise
// densities are A/sqrt(Hz), voltage densities V/sqrt(Hz).

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrng::noise {

inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

// Returned by cmrr_from_imbalance for a perfectly balanced split.
inline constexpr double kCmrrCapDb = 200.0;

struct PhotodiodeModel {
  double shunt_resistance = 2.47e6;       // R_PD
  double junction_capacitance = 40e-15;   // C_PD, one diode
  double dark_current = 4e-8;             // I_PDD
  std::string label = "GeSi";

  static PhotodiodeModel gesi();
  // Same diode with I_PDD = 5e-8 A, the value consistent with the quoted
  // 1.790e-13 A/sqrt(Hz) dark-current density.
  static PhotodiodeModel gesi_alt_dark();
  // Dark current 5e-12 A is back-derived from the quoted 1.790e-15 density.
  static PhotodiodeModel ingaas();

  void validate() const;
};

struct FrontEndModel {
  double feedback_resistance = 510e3;     // R_F
  double feedback_capacitance = 0.0;      // C_F
  double feedback_parasitic = 0.3e-12;    // C_FP
  double amp_input_capacitance = 1.4e-12; // C_IN
  double input_parasitic = 6.62e-12;      // C_INP
  double gain_bandwidth = 410e6;          // GBW
  double voltage_noise_white = 4e-9;      // V/sqrt(Hz)
  double flicker_coefficient = 553.25e-9; // V; density = coeff / sqrt(f)
  double current_noise = 2.5e-15;         // i_NC

  double total_feedback_capacitance() const {
    return feedback_capacitance + feedback_parasitic;
  }

  void validate() const;
};

enum class FilterOrder { kFirst = 1 };

struct DetectorConfig {
  PhotodiodeModel photodiode;
  FrontEndModel frontend;
  double temperature = 295.0;
  double photocurrent = 1e-6;  // per-diode photoelectron current
  double hpf_cutoff = 1.6e3;
  FilterOrder hpf_order = FilterOrder::kFirst;
  double second_stage_gain = 1.0;
  double load_resistance = 50.0;

  // C_TIN = 2 C_PD + C_INP + C_IN.
  double total_input_capacitance() const {
    return 2.0 * photodiode.junction_capacitance + frontend.input_parasitic +
           frontend.amp_input_capacitance;
  }

  void validate() const;
};

struct SourceDensities {
  double i_pdt = 0.0;
  double i_pdd = 0.0;
  double i_rft = 0.0;
  double i_nc = 0.0;
  double i_nv = 0.0;
  // Set when f == 0 with a non-zero flicker coefficient; i_nv is +inf then.
  bool flicker_divergent = false;

  double total() const;
};

SourceDensities classical_source_densities(const DetectorConfig& cfg, double f);

std::complex<double> input_impedance(const DetectorConfig& cfg, double f);
std::complex<double> feedback_impedance(const DetectorConfig& cfg, double f);

double shot_noise_density(double photocurrent);

// Closed-loop transimpedance including the finite gain-bandwidth product.
std::complex<double> tia_gain(const DetectorConfig& cfg, double f);
// Same transfer function with numerator and denominator multiplied out in
// terms of the raw component values. Independent of the impedance helpers.
std::complex<double> tia_gain_expanded(const DetectorConfig& cfg, double f);

std::complex<double> hpf_response(double cutoff, double f);

struct OutputOptions {
  bool include_shot = true;
  bool include_hpf = true;
  bool include_second_stage = true;
};

double output_voltage_density(const DetectorConfig& cfg, double f,
                              const OutputOptions& options);

// Voltage density into `load` through the matched 50/50 divider, in dBm/Hz.
double density_to_dbm_per_hz(double u, double load);
// Power in a resolution bandwidth `rbw` (Hz) for a density `s` in dBm/Hz.
double power_in_rbw(double s_dbm_per_hz, double rbw);

// 20 log10(i_shot / i_classical). Returns -inf for zero photocurrent.
double qcnr(const DetectorConfig& cfg, double f);

// Lowest frequency at which |G| drops to |G(0)|/sqrt(2). Searches
// [1 Hz, 10 GHz]; throws ComputationError if no crossing exists.
double bandwidth_3db(const DetectorConfig& cfg);

double cmrr_from_imbalance(double split_a, double split_b, double responsivity_mismatch);

struct NoiseSpectrum {
  std::vector<double> frequencies;
  std::vector<double> i_pdt, i_pdd, i_rft, i_nc, i_nv;
  std::vector<double> total_classical;
  std::vector<double> shot;
  std::vector<double> u_out;      // V/sqrt(Hz), per OutputOptions
  std::vector<double> s_dbm_hz;   // u_out into load_resistance

  std::size_t size() const { return frequencies.size(); }
};

NoiseSpectrum noise_spectrum(const DetectorConfig& cfg, std::span<const double> f_grid,
                             const OutputOptions& options = {});

// Log-spaced grid from fmin to fmax inclusive, `per_decade` points per decade.
std::vector<double> log_grid(double fmin, double fmax, int per_decade = 50);

struct FeedbackCandidate {
  double feedback_resistance = 0.0;
  double total_feedback_capacitance = 0.0;
  double bandwidth_hz = 0.0;
  double qcnr_db = 0.0;  // at kSweepQcnrFrequency
};

inline constexpr double kSweepQcnrFrequency = 100e3;

// Evaluates every (R_F, C_TF) pair. The candidate C_TF replaces the whole
// feedback capacitance (C_F = 0, C_FP = C_TF). Candidates whose bandwidth is
// below `min_bandwidth` or has no crossing are dropped; the rest are sorted by
// descending QCNR.
std::vector<FeedbackCandidate> sweep_feedback(const DetectorConfig& cfg,
                                              std::span<const double> feedback_resistances,
                                              std::span<const double> feedback_capacitances,
                                              double min_bandwidth);

}  // namespace qrng::noise
