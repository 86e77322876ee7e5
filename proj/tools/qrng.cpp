// qrng: command-line front end for the detector noise model, min-entropy
// estimator, trace simulator, Toeplitz extractor and randomness battery.
//
// Exit codes: 0 ok, 1 invalid input, 2 I/O, 3 computation failed.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrng/config_json.hpp"
#include "qrng/entropy.hpp"
#include "qrng/error.hpp"
#include "qrng/extractor.hpp"
#include "qrng/io.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/randtest.hpp"
#include "qrng/trace.hpp"

using namespace qrng;
using Json = config::Json;

namespace {

constexpr int kExitParameter = 1;
constexpr int kExitIo = 2;
constexpr int kExitComputation = 3;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Options shared by most subcommands.
struct Common {
  std::string config;
  std::string profile;
  std::optional<std::string> out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--config", c.config, "Profile or detector JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--profile", c.profile, "Bundled profile name (see `qrng profiles`)");
  cmd->add_option("--out", c.out, "Output file; '-' or absent writes to stdout");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

Profile resolve_profile(const Common& c, const char* fallback = "gesi-paper") {
  if (!c.config.empty()) return load_config_file(c.config);
  if (!c.profile.empty()) return load_profile(c.profile);
  if (fallback == nullptr) return Profile{};
  try {
    return load_profile(fallback);
  } catch (const ParameterError&) {
    // No profile directory available: built-in defaults match the bundled one.
    Profile p;
    p.name = "defaults";
    return p;
  }
}

void emit(const Common& c, const std::string& text) {
  if (!c.out || *c.out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  io::write_file_atomic(*c.out, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::uint8_t> to_u8(const std::vector<std::byte>& b) {
  std::vector<std::uint8_t> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = static_cast<std::uint8_t>(b[i]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vacuum-noise QRNG model: detector noise, min-entropy, simulation, extraction, testing.\n"
               "All numeric flags are SI base units (Hz, A, V, ohm, F, K); dB/dBm appear only in outputs."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qrng 0.1.0");

  // spectrum ---------------------------------------------------------------
  Common sp;
  double sp_fmin = 1.0, sp_fmax = 1e8, sp_photocurrent = NAN, sp_gain = NAN;
  int sp_per_decade = 50;
  bool sp_no_shot = false, sp_no_hpf = false;
  auto* spectrum = app.add_subcommand("spectrum", "Noise density spectrum of the detector output");
  add_common(spectrum, sp, "csv");
  spectrum->add_option("--fmin", sp_fmin, "Lowest frequency [Hz]")->capture_default_str();
  spectrum->add_option("--fmax", sp_fmax, "Highest frequency [Hz]")->capture_default_str();
  spectrum->add_option("--per-decade", sp_per_decade, "Log-spaced points per decade [count]")->capture_default_str();
  spectrum->add_option("--photocurrent", sp_photocurrent, "Per-diode photocurrent [A] (default from profile)");
  spectrum->add_option("--second-stage-gain", sp_gain, "Voltage gain after the TIA [V/V] (default from profile)");
  spectrum->add_flag("--no-shot", sp_no_shot, "Exclude shot noise (electronic floor only)");
  spectrum->add_flag("--no-hpf", sp_no_hpf, "Bypass the high-pass filter");

  // gain -------------------------------------------------------------------
  Common gn;
  double gn_fmin = 1.0, gn_fmax = 1e9;
  int gn_per_decade = 20;
  auto* gain = app.add_subcommand("gain", "Closed-loop TIA transimpedance versus frequency");
  add_common(gain, gn, "csv");
  gain->add_option("--fmin", gn_fmin, "Lowest frequency [Hz]")->capture_default_str();
  gain->add_option("--fmax", gn_fmax, "Highest frequency [Hz]")->capture_default_str();
  gain->add_option("--per-decade", gn_per_decade, "Log-spaced points per decade [count]")->capture_default_str();

  // qcnr -------------------------------------------------------------------
  Common qc;
  double qc_photocurrent = NAN, qc_freq = 1e5;
  auto* qcnr = app.add_subcommand("qcnr", "Quantum-to-classical noise ratio at one frequency");
  add_common(qcnr, qc, "csv");
  qcnr->add_option("--photocurrent", qc_photocurrent, "Per-diode photocurrent [A] (default from profile)");
  qcnr->add_option("--freq", qc_freq, "Frequency [Hz]")->capture_default_str();

  // bandwidth --------------------------------------------------------------
  Common bw;
  auto* bandwidth = app.add_subcommand("bandwidth", "3-dB bandwidth of the TIA gain");
  add_common(bandwidth, bw, "csv");

  // cmrr -------------------------------------------------------------------
  Common cm;
  double cm_a = 0.5, cm_b = 0.5, cm_mismatch = 0.0;
  auto* cmrr = app.add_subcommand("cmrr", "Common-mode rejection from splitter and responsivity imbalance");
  add_common(cmrr, cm, "csv");
  cmrr->add_option("--split-a", cm_a, "Power fraction to diode A [dimensionless]")->capture_default_str();
  cmrr->add_option("--split-b", cm_b, "Power fraction to diode B [dimensionless]")->capture_default_str();
  cmrr->add_option("--mismatch", cm_mismatch, "Relative responsivity mismatch, B vs A [dimensionless]")
      ->capture_default_str();

  // sweep ------------------------------------------------------------------
  Common sw;
  std::vector<double> sw_rf{100e3, 200e3, 510e3, 1e6, 2e6}, sw_ctf{0.1e-12, 0.15e-12, 0.3e-12, 0.5e-12};
  double sw_min_bw = 1e6;
  auto* sweep = app.add_subcommand("sweep", "Rank feedback R_F / C_TF pairs by QCNR at 100 kHz");
  add_common(sweep, sw, "csv");
  sweep->add_option("--rf", sw_rf, "Feedback resistances [ohm]")->delimiter(',')->capture_default_str();
  sweep->add_option("--ctf", sw_ctf, "Total feedback capacitances [F]")->delimiter(',')->capture_default_str();
  sweep->add_option("--min-bandwidth", sw_min_bw, "Required 3-dB bandwidth [Hz]")->capture_default_str();

  // hmin -------------------------------------------------------------------
  Common hm;
  double hm_sq = NAN, hm_se = NAN, hm_range = NAN;
  std::optional<int> hm_bits, hm_nodes;
  std::string hm_conv;
  auto* hmin = app.add_subcommand("hmin", "Average conditional min-entropy per sample");
  add_common(hmin, hm, "json");
  hmin->add_option("--sigma-q", hm_sq, "Quantum noise SD [V] (default from profile)");
  hmin->add_option("--sigma-e", hm_se, "Classical noise SD [V] (default from profile)");
  hmin->add_option("--range", hm_range, "ADC full scale +/-R [V] (default from profile)");
  hmin->add_option("--bits", hm_bits, "ADC resolution [bits] (default from profile)");
  hmin->add_option("--convention", hm_conv, "Bin width convention FULL_SPAN (2R/2^n) or HALF_SPAN (R/2^n)");
  hmin->add_option("--nodes", hm_nodes, "Quadrature nodes, odd [count] (default 4001)");

  // curve ------------------------------------------------------------------
  Common cv;
  double cv_qcnr = 20.0, cv_lo = 1.0, cv_hi = 5.0, cv_step = 0.05;
  int cv_bits = 8;
  unsigned cv_workers = 0;
  std::string cv_conv = "FULL_SPAN";
  auto* curve = app.add_subcommand("curve", "Min-entropy versus R/sigma_Q at fixed QCNR (sigma_Q = 1 V)");
  add_common(curve, cv, "csv");
  curve->add_option("--qcnr", cv_qcnr, "Quantum-to-classical ratio [dB]")->capture_default_str();
  curve->add_option("--ratio-min", cv_lo, "Smallest R/sigma_Q [dimensionless]")->capture_default_str();
  curve->add_option("--ratio-max", cv_hi, "Largest R/sigma_Q [dimensionless]")->capture_default_str();
  curve->add_option("--ratio-step", cv_step, "Grid step [dimensionless]")->capture_default_str();
  curve->add_option("--bits", cv_bits, "ADC resolution [bits]")->capture_default_str();
  curve->add_option("--convention", cv_conv, "FULL_SPAN or HALF_SPAN")->capture_default_str();
  curve->add_option("--workers", cv_workers, "Threads, 0 = all cores [count]")->capture_default_str();

  // simulate ---------------------------------------------------------------
  Common sm;
  std::optional<std::uint64_t> sm_samples;
  std::string sm_seed, sm_codes = "trace";
  auto* simulate = app.add_subcommand("simulate", "Generate a quantized Gaussian noise trace");
  add_common(simulate, sm, "json");
  simulate->add_option("--samples", sm_samples, "Number of samples [count] (default from profile)");
  simulate->add_option("--seed", sm_seed, "Simulation RNG seed [hex]");
  simulate->add_option("--trace-out", sm_codes, "Trace encoding written to --out: trace (binary) or csv")
      ->check(CLI::IsMember({"trace", "csv"}))
      ->capture_default_str();

  // extract ----------------------------------------------------------------
  Common ex;
  std::string ex_in, ex_seed, ex_seed_file, ex_ascii, ex_report;
  double ex_hmin = NAN;
  std::size_t ex_spb = extractor::kDefaultSamplesPerBlock;
  int ex_sec = extractor::kDefaultSecurityLog2, ex_csv_bits = 0;
  unsigned ex_workers = 1;
  auto* extract = app.add_subcommand("extract", "Toeplitz-hash a trace into random bytes");
  add_common(extract, ex, "json");
  extract->add_option("--in", ex_in, "Input trace file (binary trace, or index,code CSV with --csv-bits)")->required();
  extract->add_option("--csv-bits", ex_csv_bits, "Read --in as CSV with this ADC resolution [bits]");
  extract->add_option("--seed", ex_seed, "Expand the Toeplitz seed from this value [hex] (reproducible, not secret)");
  extract->add_option("--seed-file", ex_seed_file, "Raw seed bits, LSB-first bytes")->check(CLI::ExistingFile);
  extract->add_option("--hmin", ex_hmin, "Min-entropy per sample [bits] (default: computed from trace metadata)");
  extract->add_option("--samples-per-block", ex_spb, "Samples per hashed block [count]")->capture_default_str();
  extract->add_option("--security", ex_sec, "Security parameter, epsilon = 2^-s [bits]")->capture_default_str();
  extract->add_option("--workers", ex_workers, "Hashing threads, 0 = all cores [count]")->capture_default_str();
  extract->add_option("--ascii", ex_ascii, "Also write the output as '0'/'1' lines");
  extract->add_option("--report", ex_report, "Write the JSON report here instead of stdout");

  // test -------------------------------------------------------------------
  Common ts;
  std::string ts_in;
  bool ts_ascii = false;
  std::optional<std::size_t> ts_bits;
  double ts_alpha = randtest::kDefaultAlpha;
  std::size_t ts_block = 0;
  int ts_serial = 0;
  auto* test = app.add_subcommand("test", "Run the six-test randomness battery");
  add_common(test, ts, "json");
  test->add_option("--in", ts_in, "Input file: raw bytes (LSB-first) or '0'/'1' text with --ascii")->required();
  test->add_flag("--ascii", ts_ascii, "Input is '0'/'1' text");
  test->add_option("--bits", ts_bits, "Use only the first N bits [count]");
  test->add_option("--alpha", ts_alpha, "Significance level [probability]")->capture_default_str();
  test->add_option("--block-len", ts_block, "Block frequency block length [bits], 0 = automatic")->capture_default_str();
  test->add_option("--serial-m", ts_serial, "Serial test pattern length [bits], 0 = automatic")->capture_default_str();

  // pipeline ---------------------------------------------------------------
  Common pl;
  std::optional<std::uint64_t> pl_samples;
  std::string pl_seed, pl_trace_seed, pl_bytes;
  unsigned pl_workers = 1;
  auto* pipeline = app.add_subcommand("pipeline", "Simulate, estimate min-entropy, extract and test in one run");
  add_common(pipeline, pl, "json");
  pipeline->add_option("--samples", pl_samples, "Trace length [count] (default from profile)");
  pipeline->add_option("--seed", pl_seed, "Toeplitz seed expansion value [hex]");
  pipeline->add_option("--trace-seed", pl_trace_seed, "Simulation RNG seed [hex]");
  pipeline->add_option("--bytes-out", pl_bytes, "Write extracted bytes here");
  pipeline->add_option("--workers", pl_workers, "Hashing threads, 0 = all cores [count]")->capture_default_str();

  // profiles ---------------------------------------------------------------
  auto* profiles = app.add_subcommand("profiles", "List bundled profiles and the search path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParameter;
  }

  try {
    if (*spectrum) {
      auto cfg = resolve_profile(sp).detector;
      if (!std::isnan(sp_photocurrent)) cfg.photocurrent = sp_photocurrent;
      if (!std::isnan(sp_gain)) cfg.second_stage_gain = sp_gain;
      if (!(sp_fmin > 0.0 && sp_fmax > sp_fmin)) throw ParameterError("fmin", "need 0 < fmin < fmax");
      if (sp_per_decade < 1) throw ParameterError("per-decade", "must be >= 1");
      const auto grid = noise::log_grid(sp_fmin, sp_fmax, sp_per_decade);
      const auto s = noise::noise_spectrum(cfg, grid, {.include_shot = !sp_no_shot, .include_hpf = !sp_no_hpf});
      if (sp.format == "json") {
        Json j = {{"units", {{"freq", "Hz"}, {"current", "A/sqrt(Hz)"}, {"u_out", "V/sqrt(Hz)"}, {"s", "dBm/Hz"}}},
                  {"freq_hz", s.frequencies}, {"i_pdt", s.i_pdt}, {"i_pdd", s.i_pdd}, {"i_rft", s.i_rft},
                  {"i_nc", s.i_nc}, {"i_nv", s.i_nv}, {"i_total", s.total_classical}, {"i_shot", s.shot},
                  {"u_out_v_rthz", s.u_out}, {"s_dbm_hz", s.s_dbm_hz}};
        emit(sp, dump(j));
      } else {
        std::string text = "freq_hz,i_pdt,i_pdd,i_rft,i_nc,i_nv,i_total,i_shot,u_out_v_rthz,s_dbm_hz\n";
        for (std::size_t k = 0; k < s.size(); ++k) {
          text += num(s.frequencies[k]) + "," + num(s.i_pdt[k]) + "," + num(s.i_pdd[k]) + "," + num(s.i_rft[k]) +
                  "," + num(s.i_nc[k]) + "," + num(s.i_nv[k]) + "," + num(s.total_classical[k]) + "," +
                  num(s.shot[k]) + "," + num(s.u_out[k]) + "," + num(s.s_dbm_hz[k]) + "\n";
        }
        emit(sp, text);
      }
    } else if (*gain) {
      const auto cfg = resolve_profile(gn).detector;
      if (!(gn_fmin > 0.0 && gn_fmax > gn_fmin)) throw ParameterError("fmin", "need 0 < fmin < fmax");
      const auto grid = noise::log_grid(gn_fmin, gn_fmax, gn_per_decade);
      Json rows = Json::array();
      std::string text = "freq_hz,gain_re_ohm,gain_im_ohm,gain_mag_ohm,phase_deg\n";
      for (double f : grid) {
        const auto g = noise::tia_gain(cfg, f);
        const double phase = std::arg(g) * 180.0 / M_PI;
        text += num(f) + "," + num(g.real()) + "," + num(g.imag()) + "," + num(std::abs(g)) + "," + num(phase) + "\n";
        rows.push_back({{"freq_hz", f}, {"gain_re_ohm", g.real()}, {"gain_im_ohm", g.imag()},
                        {"gain_mag_ohm", std::abs(g)}, {"phase_deg", phase}});
      }
      emit(gn, gn.format == "json" ? dump(rows) : text);
    } else if (*qcnr) {
      auto cfg = resolve_profile(qc).detector;
      if (!std::isnan(qc_photocurrent)) cfg.photocurrent = qc_photocurrent;
      const double q = noise::qcnr(cfg, qc_freq);
      if (qc.format == "json") {
        emit(qc, dump({{"freq_hz", qc_freq}, {"photocurrent_a", cfg.photocurrent}, {"qcnr_db", q}}));
      } else {
        emit(qc, "freq_hz,photocurrent_a,qcnr_db\n" + num(qc_freq) + "," + num(cfg.photocurrent) + "," + num(q) + "\n");
      }
    } else if (*bandwidth) {
      const auto cfg = resolve_profile(bw).detector;
      const double b = noise::bandwidth_3db(cfg);
      const double ctf = cfg.frontend.total_feedback_capacitance();
      if (bw.format == "json") {
        emit(bw, dump({{"feedback_resistance_ohm", cfg.frontend.feedback_resistance},
                       {"feedback_capacitance_f", ctf}, {"bandwidth_hz", b}}));
      } else {
        emit(bw, "feedback_resistance_ohm,feedback_capacitance_f,bandwidth_hz\n" +
                     num(cfg.frontend.feedback_resistance) + "," + num(ctf) + "," + num(b) + "\n");
      }
    } else if (*cmrr) {
      const double db = noise::cmrr_from_imbalance(cm_a, cm_b, cm_mismatch);
      if (cm.format == "json") {
        emit(cm, dump({{"split_a", cm_a}, {"split_b", cm_b}, {"mismatch", cm_mismatch}, {"cmrr_db", db}}));
      } else {
        emit(cm, "split_a,split_b,mismatch,cmrr_db\n" + num(cm_a) + "," + num(cm_b) + "," + num(cm_mismatch) + "," +
                     num(db) + "\n");
      }
    } else if (*sweep) {
      const auto cfg = resolve_profile(sw).detector;
      const auto ranked = noise::sweep_feedback(cfg, sw_rf, sw_ctf, sw_min_bw);
      Json rows = Json::array();
      std::string text = "feedback_resistance_ohm,feedback_capacitance_f,bandwidth_hz,qcnr_db\n";
      for (const auto& c : ranked) {
        text += num(c.feedback_resistance) + "," + num(c.total_feedback_capacitance) + "," + num(c.bandwidth_hz) +
                "," + num(c.qcnr_db) + "\n";
        rows.push_back({{"feedback_resistance_ohm", c.feedback_resistance},
                        {"feedback_capacitance_f", c.total_feedback_capacitance},
                        {"bandwidth_hz", c.bandwidth_hz},
                        {"qcnr_db", c.qcnr_db}});
      }
      emit(sw, sw.format == "json" ? dump(rows) : text);
    } else if (*hmin) {
      const auto p = resolve_profile(hm);
      auto model = p.trace.model;
      auto adc = p.trace.adc;
      auto integration = p.integration;
      if (!std::isnan(hm_sq)) model.sigma_q = hm_sq;
      if (!std::isnan(hm_se)) model.sigma_e = hm_se;
      if (!std::isnan(hm_range)) adc.range = hm_range;
      if (hm_bits) adc.bits = *hm_bits;
      if (!hm_conv.empty()) adc.bin_convention = entropy::bin_convention_from_string(hm_conv);
      if (hm_nodes) integration.node_count = *hm_nodes;
      const auto est = entropy::average_min_entropy(model, adc, integration);
      const std::string conv(entropy::to_string(adc.bin_convention));
      if (hm.format == "json") {
        emit(hm, dump({{"hmin_bits", est.hmin},
                       {"quadrature_error_bits", est.quadrature_error},
                       {"sigma_q", model.sigma_q},
                       {"sigma_e", model.sigma_e},
                       {"range", adc.range},
                       {"bits", adc.bits},
                       {"convention", conv}}));
      } else {
        emit(hm, "hmin_bits,quadrature_error_bits,sigma_q,sigma_e,range,bits,convention\n" + num(est.hmin) + "," +
                     num(est.quadrature_error) + "," + num(model.sigma_q) + "," + num(model.sigma_e) + "," +
                     num(adc.range) + "," + std::to_string(adc.bits) + "," + conv + "\n");
      }
    } else if (*curve) {
      if (!(cv_step > 0.0 && cv_hi >= cv_lo && cv_lo > 0.0)) {
        throw ParameterError("ratio-step", "need 0 < ratio-min <= ratio-max and step > 0");
      }
      std::vector<double> grid;
      for (int k = 0;; ++k) {
        const double r = cv_lo + k * cv_step;
        if (r > cv_hi + 1e-9 * cv_step) break;
        grid.push_back(r);
      }
      const auto conv = entropy::bin_convention_from_string(cv_conv);
      const auto points = entropy::hmin_curve(cv_qcnr, grid, cv_bits, conv, {}, cv_workers);
      if (cv.format == "json") {
        Json pts = Json::array();
        for (const auto& p : points) pts.push_back({{"ratio", p.ratio}, {"hmin_bits", p.hmin}});
        emit(cv, dump({{"qcnr_db", cv_qcnr},
                       {"bits", cv_bits},
                       {"convention", std::string(entropy::to_string(conv))},
                       {"peak_ratio", entropy::peak_ratio(points)},
                       {"points", pts}}));
      } else {
        std::string text = "ratio,hmin_bits\n";
        for (const auto& p : points) text += num(p.ratio) + "," + num(p.hmin) + "\n";
        emit(cv, text);
      }
    } else if (*simulate) {
      auto tc = resolve_profile(sm).trace;
      if (sm_samples) tc.sample_count = *sm_samples;
      if (!sm_seed.empty()) tc.rng_seed = config::seed_from_hex(sm_seed);
      if (!sm.out || sm.out->empty() || *sm.out == "-") {
        if (sm.out && sm.out->empty()) throw IoError("empty output path");
        throw ParameterError("out", "simulate needs an output file");
      }
      const auto t = trace::generate_gaussian_trace(tc);
      if (sm_codes == "csv") {
        trace::write_codes_csv(t.codes, *sm.out);
      } else {
        trace::save_trace(t, *sm.out);
      }
      Json j = config::to_json(tc);
      j["path"] = *sm.out;
      j["encoding"] = sm_codes;
      std::cout << dump(j);
    } else if (*extract) {
      trace::SampleTrace t;
      if (ex_csv_bits != 0) {
        t.codes = trace::read_codes_csv(ex_in, ex_csv_bits);
        t.config.adc.bits = ex_csv_bits;
        t.config.sample_count = t.codes.size();
        if (std::isnan(ex_hmin)) throw ParameterError("hmin", "required with --csv-bits (no metadata to derive it)");
      } else {
        t = trace::load_trace(ex_in);
      }
      const int bits = t.config.adc.bits;
      const double h = std::isnan(ex_hmin) ? entropy::average_min_entropy(t.config.model, t.config.adc).hmin : ex_hmin;
      const std::size_t n = ex_spb * static_cast<std::size_t>(bits);
      const std::size_t m = extractor::output_length(ex_spb, bits, h, ex_sec);
      if (!ex_seed.empty() && !ex_seed_file.empty()) throw ParameterError("seed", "give --seed or --seed-file, not both");
      BitVector seed;
      if (!ex_seed.empty()) {
        seed = extractor::expand_seed(n + m - 1, config::seed_from_hex(ex_seed));
      } else if (!ex_seed_file.empty()) {
        seed = extractor::generate_seed(n + m - 1, {.fixed = BitVector::from_bytes(to_u8(io::read_file(ex_seed_file)))});
      } else {
        seed = extractor::generate_seed(n + m - 1);
      }
      const extractor::ToeplitzExtractor ext({.input_bits = n, .output_bits = m, .security_log2 = ex_sec, .seed = seed});
      extractor::SpanCodeSource src(t.codes);
      extractor::VectorByteSink sink;
      const auto r = extractor::stream_extract(src, bits, ext, sink, {.workers = ex_workers});
      const bool to_stdout = !ex.out || *ex.out == "-";
      if (to_stdout) {
        std::cout.write(reinterpret_cast<const char*>(sink.data.data()), static_cast<std::streamsize>(sink.data.size()));
        std::cout.flush();
      } else {
        io::write_file_atomic(*ex.out, std::as_bytes(std::span<const std::uint8_t>(sink.data)));
      }
      if (!ex_ascii.empty()) randtest::export_ascii_bits(BitVector::from_bytes(sink.data, r.output_bits), ex_ascii);
      const Json report = {{"n", r.n},
                           {"m", r.m},
                           {"security_log2", r.security_log2},
                           {"blocks", r.blocks},
                           {"discarded_bits", r.discarded_bits},
                           {"seconds", r.seconds},
                           {"bits_per_second", r.bits_per_second},
                           {"hmin_bits", h},
                           {"output_bits", r.output_bits},
                           {"padding_bits", r.padding_bits}};
      if (!ex_report.empty()) {
        io::write_file_atomic(ex_report, dump(report));
      } else {
        (to_stdout ? std::cerr : std::cout) << dump(report);
      }
    } else if (*test) {
      BitVector bits = ts_ascii ? randtest::import_ascii_bits(ts_in)
                                : BitVector::from_bytes(to_u8(io::read_file(ts_in)));
      if (ts_bits) {
        if (*ts_bits > bits.size()) throw ParameterError("bits", "exceeds the " + std::to_string(bits.size()) + " bits in the input");
        bits = bits.slice(0, *ts_bits);
      }
      const auto report = randtest::run_battery(bits, {.alpha = ts_alpha, .block_len = ts_block, .serial_m = ts_serial});
      if (ts.format == "json") {
        emit(ts, Json::parse(report.to_json()).dump(2) + "\n");
      } else {
        std::string text = "name,statistic,p_value,pass\n";
        for (const auto& r : report.results) {
          text += r.name + "," + num(r.statistic) + "," + num(r.p_value) + "," + (r.pass ? "true" : "false") + "\n";
        }
        emit(ts, text);
      }
    } else if (*pipeline) {
      auto p = resolve_profile(pl);
      if (pl_samples) p.trace.sample_count = *pl_samples;
      if (!pl_trace_seed.empty()) p.trace.rng_seed = config::seed_from_hex(pl_trace_seed);
      PipelineOptions opts;
      if (!pl_seed.empty()) opts.extractor_seed_value = config::seed_from_hex(pl_seed);
      opts.workers = pl_workers;
      if (pl.out && pl.out->empty()) throw IoError("empty output path");
      extractor::VectorByteSink sink;
      const auto report = run_pipeline(p, opts, pl_bytes.empty() ? nullptr : &sink);
      if (!pl_bytes.empty()) io::write_file_atomic(pl_bytes, std::as_bytes(std::span<const std::uint8_t>(sink.data)));
      Json j = report.to_json();
      j["profile"] = p.name;
      j["sample_rate_hz"] = p.trace.sample_rate;
      j["sample_count"] = p.trace.sample_count;
      if (pl.format == "json") {
        emit(pl, dump(j));
      } else {
        emit(pl, "profile,hmin_bits,extractable_bits_per_second,n,m,blocks,output_bits,all_pass\n" + p.name + "," +
                     num(report.entropy.hmin) + "," + num(report.extractable_bits_per_second) + "," +
                     std::to_string(report.input_bits) + "," + std::to_string(report.output_bits) + "," +
                     std::to_string(report.stream.blocks) + "," + std::to_string(report.stream.output_bits) + "," +
                     (report.tests ? (report.tests->all_pass() ? "true" : "false") : "") + "\n");
      }
    } else if (*profiles) {
      std::cout << "search path:\n";
      for (const auto& d : profile_search_path()) std::cout << "  " << d.string() << "\n";
      std::cout << "profiles:\n";
      for (const auto& n : available_profiles()) std::cout << "  " << n << "\n";
    }
  } catch (const ParameterError& e) {
    std::cerr << "qrng: invalid " << e.field() << ": " << e.what() << "\n";
    return kExitParameter;
  } catch (const IoError& e) {
    std::cerr << "qrng: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ComputationError& e) {
    std::cerr << "qrng: computation failed: " << e.what() << "\n";
    return kExitComputation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "qrng: invalid JSON: " << e.what() << "\n";
    return kExitParameter;
  } catch (const Error& e) {
    std::cerr << "qrng: " << e.what() << "\n";
    return kExitComputation;
  }
  return 0;
}
