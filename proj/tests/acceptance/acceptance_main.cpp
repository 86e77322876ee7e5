// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and nowhere else.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/randtest.hpp"
#include "qrng/trace.hpp"

using namespace qrng;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      detail += " [x]";
      pass = false;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

BitVector random_bits(std::size_t n, std::mt19937_64& rng) {
  BitVector v(n);
  for (auto& w : v.words()) w = rng();
  v.resize(n);
  return v;
}

std::vector<std::uint8_t> unpack(const BitVector& v) {
  std::vector<std::uint8_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

// 1 ------------------------------------------------------------------------
Outcome noise_sources() {
  Outcome o;
  const noise::DetectorConfig gesi;
  const auto d = noise::classical_source_densities(gesi, 1e5);
  o.check(rel(d.i_pdt, 1.155e-13) <= 0.015, "GeSi i_PDT " + fmt("%.4e", d.i_pdt) + " (" +
                                                 fmt("%.2f", 100 * rel(d.i_pdt, 1.155e-13)) + "% <= 1.5%)");
  o.check(rel(d.i_rft, 1.797e-13) <= 0.01, "i_RFT " + fmt("%.4e", d.i_rft) + " (" +
                                               fmt("%.2f", 100 * rel(d.i_rft, 1.797e-13)) + "% <= 1%)");
  noise::DetectorConfig ingaas;
  ingaas.photodiode = noise::PhotodiodeModel::ingaas();
  const double ig = noise::classical_source_densities(ingaas, 1e5).i_pdt;
  o.check(rel(ig, 5.739e-16) <= 0.005,
          "InGaAs i_PDT " + fmt("%.4e", ig) + " (" + fmt("%.2f", 100 * rel(ig, 5.739e-16)) + "% <= 0.5%)");
  const double shot = noise::shot_noise_density(1e-6);
  o.check(rel(shot, 8.006e-13) <= 0.001,
          "i_shot(1 uA) " + fmt("%.4e", shot) + " (" + fmt("%.3f", 100 * rel(shot, 8.006e-13)) + "% <= 0.1%)");
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome qcnr_nine_db() {
  Outcome o;
  for (const char* name : {"gesi-paper", "gesi-paper-dark5e-8"}) {
    auto cfg = load_profile(name).detector;
    cfg.photocurrent = 1e-6;
    const double q = noise::qcnr(cfg, 1e5);
    o.check(q >= 8.2 && q <= 9.8, std::string(name) + " " + fmt("%.3f", q) + " dB in [8.2, 9.8]");
  }
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome tia_bandwidth() {
  Outcome o;
  const double bw = noise::bandwidth_3db(noise::DetectorConfig{});
  o.check(bw >= 1.05e6 && bw <= 1.35e6, "default " + fmt("%.4f", bw / 1e6) + " MHz in [1.05, 1.35]");
  std::vector<double> bws;
  for (double ctf : {0.1e-12, 0.15e-12, 0.2e-12, 0.3e-12, 0.4e-12, 0.5e-12}) {
    noise::DetectorConfig cfg;
    cfg.frontend.feedback_capacitance = 0.0;
    cfg.frontend.feedback_parasitic = ctf;
    bws.push_back(noise::bandwidth_3db(cfg));
  }
  const bool monotone = std::is_sorted(bws.rbegin(), bws.rend()) &&
                        std::adjacent_find(bws.begin(), bws.end()) == bws.end();
  o.check(monotone, "strictly decreasing over C_TF 0.1..0.5 pF (" + fmt("%.3f", bws.front() / 1e6) +
                        " -> " + fmt("%.3f", bws.back() / 1e6) + " MHz)");
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome shot_scaling() {
  // Shot-noise power at the analyzer: total minus the electronic floor
  // measured with the shot term switched off.
  Outcome o;
  const std::array<double, 4> currents{1e-6, 1e-5, 1e-4, 1e-3};
  const std::array<double, 4> probes{2e4, 5e4, 1e5, 2e5};
  double worst = 0.0;
  std::string total_info;
  for (double f : probes) {
    std::array<double, 4> shot_dbm{}, total_dbm{};
    for (std::size_t k = 0; k < currents.size(); ++k) {
      noise::DetectorConfig cfg;
      cfg.photocurrent = currents[k];
      const double on = noise::density_to_dbm_per_hz(noise::output_voltage_density(cfg, f, {.include_shot = true}), 50.0);
      const double off = noise::density_to_dbm_per_hz(noise::output_voltage_density(cfg, f, {.include_shot = false}), 50.0);
      shot_dbm[k] = 10.0 * std::log10(std::pow(10.0, on / 10.0) - std::pow(10.0, off / 10.0));
      total_dbm[k] = on;
    }
    for (std::size_t k = 1; k < currents.size(); ++k) {
      worst = std::max(worst, std::abs(shot_dbm[k] - shot_dbm[k - 1] - 10.0));
    }
    if (f == 1e5) {
      total_info = fmt("%.2f", total_dbm[1] - total_dbm[0]) + "/" + fmt("%.2f", total_dbm[2] - total_dbm[1]) + "/" +
                   fmt("%.2f", total_dbm[3] - total_dbm[2]);
    }
  }
  o.check(worst <= 0.1, "shot component steps deviate from 10 dB by at most " + fmt("%.2e", worst) + " dB");
  o.detail += "; total incl. electronic floor at 100 kHz steps " + total_info + " dB (info)";
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome reference_min_entropy() {
  Outcome o;
  const entropy::GaussianNoiseModel model{.sigma_q = 0.2685, .sigma_e = 0.028};
  const entropy::AdcModel adc{.range = 5.0, .bits = 8, .bin_convention = entropy::BinConvention::kHalfSpan};
  const auto est = entropy::average_min_entropy(model, adc);
  o.check(std::abs(est.hmin - 5.117) <= 0.05, "Hmin " + fmt("%.4f", est.hmin) + " = 5.117 +- 0.05");
  const auto mc = oracle::monte_carlo_hmin(model.sigma_q, model.sigma_e, adc.bin_width(), adc.bits,
                                           10'000'000, 0xacce55);
  const double se = std::hypot(mc.standard_error, est.quadrature_error);
  o.check(std::abs(est.hmin - mc.hmin) <= 3.0 * se, "MC(1e7) " + fmt("%.5f", mc.hmin) + ", |diff| " +
                                                        fmt("%.2e", std::abs(est.hmin - mc.hmin)) +
                                                        " <= 3 SE " + fmt("%.2e", 3.0 * se));
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome curve_peak() {
  Outcome o;
  std::vector<double> grid;
  for (double r = 1.0; r <= 8.0 + 1e-9; r += 0.05) grid.push_back(r);
  const auto full = entropy::hmin_curve(20.0, grid, 8, entropy::BinConvention::kFullSpan);
  const double peak = entropy::peak_ratio(full);
  o.check(std::abs(peak - 2.3) <= 0.3, "FULL_SPAN peak R/sigma_Q " + fmt("%.3f", peak) + " = 2.3 +- 0.3");
  const auto half = entropy::hmin_curve(20.0, grid, 8, entropy::BinConvention::kHalfSpan);
  o.detail += "; HALF_SPAN peak " + fmt("%.3f", entropy::peak_ratio(half)) + " (info)";
  return o;
}

// 7 ------------------------------------------------------------------------
Outcome rate_accounting() {
  Outcome o;
  auto profile = load_profile("gesi-paper");
  profile.trace.sample_count = 4096 * 25;
  const auto report = run_pipeline(profile);
  const double rate = report.extractable_bits_per_second;
  // +-0.05 bit/sample (criterion 5) at 200 kHz.
  o.check(std::abs(rate - 1.0234e6) <= 0.05 * 200e3,
          "pipeline reports " + fmt("%.0f", rate) + " bit/s = 1.0234e6 +- 1.0e4");

  std::mt19937_64 rng(7);
  std::vector<std::uint32_t> codes(4096 * 30);
  for (auto& c : codes) c = static_cast<std::uint32_t>(rng() & 0xFF);
  const std::size_t n = 32768, m = 20859;
  const extractor::ToeplitzExtractor ext(
      {.input_bits = n, .output_bits = m, .security_log2 = 50, .seed = extractor::expand_seed(n + m - 1, 1)});
  extractor::VectorByteSink sink;
  extractor::SpanCodeSource src(codes);
  const auto s = extractor::stream_extract(src, 8, ext, sink, {.workers = 1});
  o.check(s.bits_per_second >= 1.0234e6,
          "single-thread extractor " + fmt("%.3e", s.bits_per_second) + " bit/s >= 1.0234e6");
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome extractor_oracle() {
  Outcome o;
  std::mt19937_64 rng(8);
  int mismatches = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng() % 64;
    const std::size_t m = 1 + rng() % std::min<std::size_t>(n, 32);
    const auto seed = random_bits(n + m - 1, rng);
    const auto in = random_bits(n, rng);
    const extractor::ToeplitzExtractor ext({.input_bits = n, .output_bits = m, .security_log2 = 0, .seed = seed});
    if (unpack(ext.extract_block(in)) != oracle::toeplitz(unpack(seed), unpack(in), m)) ++mismatches;
  }
  o.check(mismatches == 0, std::to_string(200 - mismatches) + "/200 small instances bit-exact");

  const std::size_t n = 32768, m = 20859;
  const auto seed = random_bits(n + m - 1, rng);
  const auto in = random_bits(n, rng);
  const extractor::ToeplitzExtractor ext({.input_bits = n, .output_bits = m, .security_log2 = 50, .seed = seed});
  o.check(unpack(ext.extract_block(in)) == oracle::toeplitz(unpack(seed), unpack(in), m),
          "default geometry 32768 -> 20859 bit-exact");
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome cmrr() {
  Outcome o;
  const double db = noise::cmrr_from_imbalance(0.505, 0.495, 0.0);
  o.check(std::abs(db - 40.0) <= 1e-9, "1% imbalance -> " + fmt("%.6f", db) + " dB");
  o.detail += "; hardware bound > 40 dB is documented, not simulated";
  return o;
}

// 10 -----------------------------------------------------------------------
Outcome randomness() {
  Outcome o;
  constexpr int kStreams = 100;
  constexpr std::size_t kBits = 1'000'000;
  auto profile = load_profile("gesi-paper");
  const auto est = entropy::average_min_entropy(profile.trace.model, profile.trace.adc, profile.integration);
  const std::size_t spb = profile.extractor.samples_per_block;
  const std::size_t n = spb * 8;
  const std::size_t m = extractor::output_length(spb, 8, est.hmin, profile.extractor.security_log2);
  const extractor::ToeplitzExtractor ext(
      {.input_bits = n, .output_bits = m, .security_log2 = profile.extractor.security_log2,
       .seed = extractor::expand_seed(n + m - 1, 0x7e0b11c2)});
  const std::size_t blocks = (kBits + m - 1) / m;

  std::vector<std::string> names;
  std::vector<int> passes;
  for (int s = 0; s < kStreams; ++s) {
    auto tc = profile.trace;
    tc.sample_count = blocks * spb;
    tc.rng_seed = 0x5eed0000u + static_cast<std::uint64_t>(s);
    const auto trace = trace::generate_gaussian_trace(tc);
    const auto bits = extractor::extract_codes(trace.codes, 8, ext).slice(0, kBits);
    const auto report = randtest::run_battery(bits);
    std::size_t slot = 0;
    for (const auto& r : report.results) {
      for (std::size_t j = 0; j < r.p_values.size(); ++j, ++slot) {
        if (names.size() <= slot) {
          names.push_back(r.p_values.size() > 1 ? r.name + "_p" + std::to_string(j + 1) : r.name);
          passes.push_back(0);
        }
        if (r.p_values[j] >= report.alpha) ++passes[slot];
      }
    }
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    o.check(passes[k] >= 96, names[k] + " " + std::to_string(passes[k]) + "/100");
  }
  return o;
}

// 11 -----------------------------------------------------------------------
Outcome measured_sigma_scaling() {
  Outcome o;
  struct Row {
    double magnification;
    double sq[3];
  };
  constexpr Row rows[] = {{10, {0.0153, 0.0474, 0.1537}},
                          {20, {0.0267, 0.0933, 0.2923}},
                          {50, {0.0746, 0.2068, 0.6607}},
                          {100, {0.1386, 0.4402, 1.3764}}};
  double worst_i = 0.0, worst_g = 0.0;
  for (const auto& r : rows) {
    for (int c = 0; c < 2; ++c) worst_i = std::max(worst_i, std::abs(r.sq[c + 1] / r.sq[c] / std::sqrt(10.0) - 1.0));
  }
  for (std::size_t k = 1; k < std::size(rows); ++k) {
    for (int c = 0; c < 3; ++c) {
      const double expect = rows[k].magnification / rows[k - 1].magnification;
      worst_g = std::max(worst_g, std::abs(rows[k].sq[c] / rows[k - 1].sq[c] / expect - 1.0));
    }
  }
  o.check(worst_i <= 0.15, "sqrt(I_PD) rows worst " + fmt("%.1f", 100 * worst_i) + "% <= 15%");
  o.check(worst_g <= 0.15, "magnification columns worst " + fmt("%.1f", 100 * worst_g) + "% <= 15%");
  return o;
}

// 12 -----------------------------------------------------------------------
Outcome invariants() {
  Outcome o;
  std::mt19937_64 rng(12);

  {
    int bad = 0;
    const auto grid = noise::log_grid(1.0, 1e9, 20);
    const auto s = noise::noise_spectrum(noise::DetectorConfig{}, grid);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double q = std::sqrt(s.i_pdt[k] * s.i_pdt[k] + s.i_pdd[k] * s.i_pdd[k] + s.i_nc[k] * s.i_nc[k] +
                                 s.i_rft[k] * s.i_rft[k] + s.i_nv[k] * s.i_nv[k]);
      if (q != s.total_classical[k]) ++bad;
    }
    o.check(bad == 0, "quadrature identity " + std::to_string(s.size() - bad) + "/" + std::to_string(s.size()));
  }
  {
    int bad = 0;
    std::uniform_real_distribution<double> u(0.05, 1.0), lc(-3.0, 3.0);
    for (int k = 0; k < 10; ++k) {
      const entropy::GaussianNoiseModel m{.sigma_q = u(rng), .sigma_e = 0.2 * u(rng)};
      const entropy::AdcModel adc{.range = 5.0 * u(rng), .bits = 8, .bin_convention = entropy::BinConvention::kHalfSpan};
      const double c = std::pow(10.0, lc(rng));
      const double h0 = entropy::average_min_entropy(m, adc).hmin;
      const double h1 = entropy::average_min_entropy({.sigma_q = c * m.sigma_q, .sigma_e = c * m.sigma_e},
                                                     {.range = c * adc.range, .bits = 8, .bin_convention = adc.bin_convention})
                            .hmin;
      if (std::abs(h1 - h0) > 1e-9 * h0) ++bad;
    }
    o.check(bad == 0, "Hmin scale invariance " + std::to_string(10 - bad) + "/10");
  }
  {
    int bad = 0;
    const entropy::AdcModel adc;
    std::uniform_real_distribution<double> v(-8.0, 8.0);
    for (int k = 0; k < 100000; ++k) {
      double a = v(rng), b = v(rng);
      if (a > b) std::swap(a, b);
      if (trace::quantize(a, adc) > trace::quantize(b, adc)) ++bad;
    }
    o.check(bad == 0, "quantizer monotone over 1e5 pairs");
  }
  {
    int bad = 0;
    const std::size_t n = 256, m = 100;
    const extractor::ToeplitzExtractor ext(
        {.input_bits = n, .output_bits = m, .security_log2 = 0, .seed = random_bits(n + m - 1, rng)});
    for (int k = 0; k < 1000; ++k) {
      const auto a = random_bits(n, rng), b = random_bits(n, rng);
      if (ext.extract_block(a ^ b) != (ext.extract_block(a) ^ ext.extract_block(b))) ++bad;
    }
    o.check(bad == 0, "extractor linearity " + std::to_string(1000 - bad) + "/1000");
  }
  {
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
      const std::size_t n = 128 + rng() % 8000;
      BitVector v = random_bits(n, rng);
      if (k % 3 == 1) v = BitVector(n);
      if (k % 3 == 2) {
        for (std::size_t i = 0; i < n; ++i) v.set(i, (rng() % 10) == 0);
      }
      for (const auto& r : randtest::run_battery(v).results) {
        for (double p : r.p_values) {
          if (!(p >= 0.0 && p <= 1.0)) ++bad;
        }
      }
    }
    o.check(bad == 0, "p-value range fuzz 1000 inputs");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"noise-source values", noise_sources},
      {"QCNR at 1 uA, 100 kHz", qcnr_nine_db},
      {"3-dB TIA bandwidth", tia_bandwidth},
      {"shot-noise scaling", shot_scaling},
      {"reference min-entropy", reference_min_entropy},
      {"Hmin curve peak", curve_peak},
      {"extraction rate accounting", rate_accounting},
      {"extractor oracle equivalence", extractor_oracle},
      {"CMRR arithmetic", cmrr},
      {"randomness battery 100 x 1e6 bits", randomness},
      {"measured sigma_Q scaling", measured_sigma_scaling},
      {"module invariants", invariants},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failed;
    std::printf("%s  criterion %2zu  %-34s %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
