#include "qrng/entropy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "qrng/error.hpp"

namespace qrng::entropy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ParameterError(field, what);
}

// Mass of N(mean, sigma) on [a, b]. Both endpoints are shifted by the mean
// before the error function is applied, and the tail form is used when the
// interval lies on one side of the mean so narrow far-out bins keep their
// relative precision.
double gaussian_mass(double a, double b, double mean, double sigma) {
  const double scale = 1.0 / (std::numbers::sqrt2 * sigma);
  const double za = (a - mean) * scale;
  const double zb = (b - mean) * scale;
  if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 0.5 * (std::erf(zb) - std::erf(za));
}

double normal_pdf(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double GaussianNoiseModel::sigma_m() const { return std::hypot(sigma_q, sigma_e); }

void GaussianNoiseModel::validate() const {
  require(std::isfinite(sigma_q) && sigma_q > 0.0, "sigma_q", "must be > 0");
  require(std::isfinite(sigma_e) && sigma_e >= 0.0, "sigma_e", "must be >= 0");
}

std::string_view to_string(BinConvention c) {
  return c == BinConvention::kFullSpan ? "FULL_SPAN" : "HALF_SPAN";
}

BinConvention bin_convention_from_string(std::string_view s) {
  if (s == "FULL_SPAN" || s == "full" || s == "full_span") return BinConvention::kFullSpan;
  if (s == "HALF_SPAN" || s == "half" || s == "half_span") return BinConvention::kHalfSpan;
  throw ParameterError("bin_convention", "expected FULL_SPAN or HALF_SPAN, got '" + std::string(s) + "'");
}

double AdcModel::bin_width() const {
  const double span = bin_convention == BinConvention::kFullSpan ? 2.0 * range : range;
  return span / static_cast<double>(bin_count());
}

double AdcModel::lower_edge() const {
  return -0.5 * bin_width() * static_cast<double>(bin_count());
}

void AdcModel::validate() const {
  require(std::isfinite(range) && range > 0.0, "range", "must be > 0");
  require(bits >= 1 && bits <= 24, "bits", "must be in [1, 24]");
}

double sigma_from_qcnr(double qcnr_db, double sigma_e) {
  require(std::isfinite(qcnr_db), "qcnr_db", "must be finite");
  require(std::isfinite(sigma_e) && sigma_e > 0.0, "sigma_e", "must be > 0");
  return sigma_e * std::pow(10.0, qcnr_db / 20.0);
}

double conditional_pmax(double e, const GaussianNoiseModel& model, const AdcModel& adc) {
  require(std::isfinite(e), "e", "must be finite");
  adc.validate();
  if (model.sigma_q == 0.0) return 1.0;
  model.validate();

  const auto count = static_cast<std::ptrdiff_t>(adc.bin_count());
  const double width = adc.bin_width();
  const double lower = adc.lower_edge();

  auto bin_mass = [&](std::ptrdiff_t k) {
    const double a = k == 0 ? -kInf : lower + static_cast<double>(k) * width;
    const double b = k == count - 1 ? kInf : lower + static_cast<double>(k + 1) * width;
    return gaussian_mass(a, b, e, model.sigma_q);
  };

  // Equal-width bins: the heaviest finite bin is the one holding e or a
  // neighbour of it. Edge bins are unbounded and checked separately.
  const double pos = std::floor((e - lower) / width);
  const auto home = static_cast<std::ptrdiff_t>(
      std::clamp(pos, 0.0, static_cast<double>(count - 1)));

  double best = std::max(bin_mass(0), bin_mass(count - 1));
  for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, home - 1);
       k <= std::min(count - 1, home + 1); ++k) {
    best = std::max(best, bin_mass(k));
  }
  return std::min(best, 1.0);
}

EntropyEstimate average_min_entropy(const GaussianNoiseModel& model, const AdcModel& adc,
                                    const IntegrationOptions& integration) {
  model.validate();
  adc.validate();
  require(integration.node_count >= 3 && integration.node_count % 2 == 1, "node_count",
          "must be odd and >= 3");
  require(std::isfinite(integration.half_width_sigmas) && integration.half_width_sigmas > 0.0,
          "half_width_sigmas", "must be > 0");

  EntropyEstimate est{.model = model, .adc = adc};
  if (model.sigma_e == 0.0) {
    est.hmin = -std::log2(conditional_pmax(0.0, model, adc));
    return est;
  }

  // Evaluate on the refined grid (2N - 1 nodes); the even nodes form the
  // requested N-node grid, and the difference between the two Simpson sums
  // is the error estimate.
  const int coarse_n = integration.node_count;
  const int fine_n = 2 * coarse_n - 1;
  const double half_width = integration.half_width_sigmas * model.sigma_e;
  const double h = 2.0 * half_width / (fine_n - 1);

  std::vector<double> values(static_cast<std::size_t>(fine_n));
  for (int i = 0; i < fine_n; ++i) {
    const double e = -half_width + i * h;
    values[static_cast<std::size_t>(i)] =
        normal_pdf(e, model.sigma_e) * conditional_pmax(e, model, adc);
  }

  auto simpson = [&](int stride) {
    const int n = (fine_n - 1) / stride + 1;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = (j == 0 || j == n - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      sum += w * values[static_cast<std::size_t>(j * stride)];
    }
    return sum * (h * stride) / 3.0;
  };

  const double coarse = -std::log2(simpson(2));
  const double fine = -std::log2(simpson(1));
  est.hmin = std::clamp(coarse, 0.0, static_cast<double>(adc.bits));
  est.quadrature_error = std::abs(coarse - fine);
  return est;
}

std::vector<CurvePoint> hmin_curve(double qcnr_db, std::span<const double> ratio_grid, int bits,
                                   BinConvention convention, const IntegrationOptions& integration,
                                   unsigned workers) {
  for (double r : ratio_grid) require(std::isfinite(r) && r > 0.0, "ratio", "must be > 0");
  const GaussianNoiseModel model{.sigma_q = 1.0,
                                 .sigma_e = 1.0 / std::pow(10.0, qcnr_db / 20.0)};
  model.validate();

  std::vector<CurvePoint> curve(ratio_grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ratio_grid.size(); i = next++) {
      const AdcModel adc{.range = ratio_grid[i], .bits = bits, .bin_convention = convention};
      curve[i] = {ratio_grid[i], average_min_entropy(model, adc, integration).hmin};
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, ratio_grid.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return curve;
}

double peak_ratio(std::span<const CurvePoint> curve) {
  require(!curve.empty(), "curve", "is empty");
  const auto best = std::max_element(curve.begin(), curve.end(),
                                     [](const auto& a, const auto& b) { return a.hmin < b.hmin; });
  const auto i = static_cast<std::size_t>(best - curve.begin());
  if (i == 0 || i + 1 == curve.size()) return best->ratio;

  const double x0 = curve[i - 1].ratio, x1 = curve[i].ratio, x2 = curve[i + 1].ratio;
  const double y0 = curve[i - 1].hmin, y1 = curve[i].hmin, y2 = curve[i + 1].hmin;
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den == 0.0) return x1;
  return std::clamp(x1 - 0.5 * num / den, x0, x2);
}

double extractable_rate(double hmin_bits_per_sample, double sample_rate) {
  require(std::isfinite(hmin_bits_per_sample) && hmin_bits_per_sample >= 0.0, "hmin",
          "must be >= 0");
  require(std::isfinite(sample_rate) && sample_rate >= 0.0, "sample_rate", "must be >= 0");
  return hmin_bits_per_sample * sample_rate;
}

}  // namespace qrng::entropy
