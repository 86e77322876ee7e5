#pragma once

// Average conditional min-entropy of a quantized Gaussian measurement
// m = q + e, where the adversary observes the classical noise e exactly and
// the quantum noise q is inaccessible.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrng::entropy {

struct GaussianNoiseModel {
  double sigma_q = 0.2685;  // V, quantum noise SD
  double sigma_e = 0.028;   // V, classical noise SD

  double sigma_m() const;
  void validate() const;
};

// Bin width convention for the entropy model. The converter always has 2^n
// bins centred on zero; the two edge bins extend to -inf and +inf.
//   kFullSpan: width 2R / 2^n, bins tile [-R, R].
//   kHalfSpan: width R / 2^n, bins tile [-R/2, R/2].
enum class BinConvention { kFullSpan, kHalfSpan };

std::string_view to_string(BinConvention c);
BinConvention bin_convention_from_string(std::string_view s);

struct AdcModel {
  double range = 5.0;  // V, converter spans +/- range
  int bits = 8;
  BinConvention bin_convention = BinConvention::kHalfSpan;

  double bin_width() const;
  std::size_t bin_count() const { return std::size_t{1} << bits; }
  // Lower boundary of bin 0's finite extent (the first interior edge minus
  // one bin width).
  double lower_edge() const;
  void validate() const;
};

struct IntegrationOptions {
  double half_width_sigmas = 10.0;
  int node_count = 4001;  // odd, >= 3
};

struct EntropyEstimate {
  double hmin = 0.0;              // bits per sample
  double quadrature_error = 0.0;  // bits
  GaussianNoiseModel model;
  AdcModel adc;
};

// sigma_q = sigma_e * 10^(qcnr_db / 20).
double sigma_from_qcnr(double qcnr_db, double sigma_e);

// Largest probability of any output bin given the classical noise value e.
double conditional_pmax(double e, const GaussianNoiseModel& model, const AdcModel& adc);

EntropyEstimate average_min_entropy(const GaussianNoiseModel& model, const AdcModel& adc,
                                    const IntegrationOptions& integration = {});

struct CurvePoint {
  double ratio = 0.0;  // R / sigma_q
  double hmin = 0.0;
};

// sigma_q is fixed at 1 and R = ratio; sigma_e follows from qcnr_db.
// Points are evaluated on `workers` threads (0 = hardware concurrency); the
// result does not depend on the worker count.
std::vector<CurvePoint> hmin_curve(double qcnr_db, std::span<const double> ratio_grid, int bits,
                                   BinConvention convention,
                                   const IntegrationOptions& integration = {}, unsigned workers = 1);

// Ratio of the curve maximum, refined by a parabola through the best grid
// point and its neighbours.
double peak_ratio(std::span<const CurvePoint> curve);

double extractable_rate(double hmin_bits_per_sample, double sample_rate);

}  // namespace qrng::entropy
