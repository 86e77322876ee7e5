#include "qrng/config_json.hpp"

#include <charconv>
#include <cstdio>
#include <initializer_list>
#include <string>

#include "qrng/error.hpp"

namespace qrng::config {
namespace {

void reject_unknown(const Json& j, const char* what, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ParameterError(what, "expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParameterError(std::string(what) + "." + key, "unknown field");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ParameterError(key, "expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ParameterError(key, "expected an integer");
    } else {
      if (!it->is_string()) throw ParameterError(key, "expected a string");
    }
    out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(key, e.what());
  }
}

}  // namespace

std::string seed_to_hex(std::uint64_t seed) {
  char buf[2 + 16 + 1];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

std::uint64_t seed_from_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParameterError("seed", "expected a hexadecimal 64-bit value");
  }
  return value;
}

Json to_json(const noise::PhotodiodeModel& pd) {
  return {{"shunt_resistance", pd.shunt_resistance},
          {"junction_capacitance", pd.junction_capacitance},
          {"dark_current", pd.dark_current},
          {"label", pd.label}};
}

Json to_json(const noise::FrontEndModel& fe) {
  return {{"feedback_resistance", fe.feedback_resistance},
          {"feedback_capacitance", fe.feedback_capacitance},
          {"feedback_parasitic", fe.feedback_parasitic},
          {"amp_input_capacitance", fe.amp_input_capacitance},
          {"input_parasitic", fe.input_parasitic},
          {"gain_bandwidth", fe.gain_bandwidth},
          {"voltage_noise_white", fe.voltage_noise_white},
          {"flicker_coefficient", fe.flicker_coefficient},
          {"current_noise", fe.current_noise}};
}

Json to_json(const noise::DetectorConfig& cfg) {
  return {{"photodiode", to_json(cfg.photodiode)},
          {"frontend", to_json(cfg.frontend)},
          {"temperature", cfg.temperature},
          {"photocurrent", cfg.photocurrent},
          {"hpf_cutoff", cfg.hpf_cutoff},
          {"hpf_order", static_cast<int>(cfg.hpf_order)},
          {"second_stage_gain", cfg.second_stage_gain},
          {"load_resistance", cfg.load_resistance}};
}

Json to_json(const entropy::GaussianNoiseModel& model) {
  return {{"sigma_q", model.sigma_q}, {"sigma_e", model.sigma_e}};
}

Json to_json(const entropy::AdcModel& adc) {
  return {{"range", adc.range},
          {"bits", adc.bits},
          {"bin_convention", std::string(entropy::to_string(adc.bin_convention))}};
}

Json to_json(const trace::TraceConfig& cfg) {
  return {{"model", to_json(cfg.model)},
          {"adc", to_json(cfg.adc)},
          {"sample_rate", cfg.sample_rate},
          {"sample_count", cfg.sample_count},
          {"rng_seed", seed_to_hex(cfg.rng_seed)}};
}

noise::PhotodiodeModel photodiode_from_json(const Json& j) {
  reject_unknown(j, "photodiode", {"shunt_resistance", "junction_capacitance", "dark_current", "label"});
  noise::PhotodiodeModel pd;
  read(j, "shunt_resistance", pd.shunt_resistance);
  read(j, "junction_capacitance", pd.junction_capacitance);
  read(j, "dark_current", pd.dark_current);
  read(j, "label", pd.label);
  pd.validate();
  return pd;
}

noise::FrontEndModel frontend_from_json(const Json& j) {
  reject_unknown(j, "frontend",
                 {"feedback_resistance", "feedback_capacitance", "feedback_parasitic",
                  "amp_input_capacitance", "input_parasitic", "gain_bandwidth",
                  "voltage_noise_white", "flicker_coefficient", "current_noise"});
  noise::FrontEndModel fe;
  read(j, "feedback_resistance", fe.feedback_resistance);
  read(j, "feedback_capacitance", fe.feedback_capacitance);
  read(j, "feedback_parasitic", fe.feedback_parasitic);
  read(j, "amp_input_capacitance", fe.amp_input_capacitance);
  read(j, "input_parasitic", fe.input_parasitic);
  read(j, "gain_bandwidth", fe.gain_bandwidth);
  read(j, "voltage_noise_white", fe.voltage_noise_white);
  read(j, "flicker_coefficient", fe.flicker_coefficient);
  read(j, "current_noise", fe.current_noise);
  fe.validate();
  return fe;
}

noise::DetectorConfig detector_from_json(const Json& j) {
  reject_unknown(j, "detector",
                 {"photodiode", "frontend", "temperature", "photocurrent", "hpf_cutoff",
                  "hpf_order", "second_stage_gain", "load_resistance"});
  noise::DetectorConfig cfg;
  if (j.contains("photodiode")) cfg.photodiode = photodiode_from_json(j.at("photodiode"));
  if (j.contains("frontend")) cfg.frontend = frontend_from_json(j.at("frontend"));
  read(j, "temperature", cfg.temperature);
  read(j, "photocurrent", cfg.photocurrent);
  read(j, "hpf_cutoff", cfg.hpf_cutoff);
  int order = 1;
  read(j, "hpf_order", order);
  if (order != 1) throw ParameterError("hpf_order", "only first-order high-pass is supported");
  read(j, "second_stage_gain", cfg.second_stage_gain);
  read(j, "load_resistance", cfg.load_resistance);
  cfg.validate();
  return cfg;
}

entropy::GaussianNoiseModel noise_model_from_json(const Json& j) {
  reject_unknown(j, "model", {"sigma_q", "sigma_e"});
  entropy::GaussianNoiseModel m;
  read(j, "sigma_q", m.sigma_q);
  read(j, "sigma_e", m.sigma_e);
  m.validate();
  return m;
}

entropy::AdcModel adc_from_json(const Json& j) {
  reject_unknown(j, "adc", {"range", "bits", "bin_convention"});
  entropy::AdcModel adc;
  read(j, "range", adc.range);
  read(j, "bits", adc.bits);
  std::string conv(entropy::to_string(adc.bin_convention));
  read(j, "bin_convention", conv);
  adc.bin_convention = entropy::bin_convention_from_string(conv);
  adc.validate();
  return adc;
}

trace::TraceConfig trace_config_from_json(const Json& j) {
  reject_unknown(j, "trace", {"model", "adc", "sample_rate", "sample_count", "rng_seed"});
  trace::TraceConfig cfg;
  if (j.contains("model")) cfg.model = noise_model_from_json(j.at("model"));
  if (j.contains("adc")) cfg.adc = adc_from_json(j.at("adc"));
  read(j, "sample_rate", cfg.sample_rate);
  read(j, "sample_count", cfg.sample_count);
  std::string seed = seed_to_hex(cfg.rng_seed);
  read(j, "rng_seed", seed);
  cfg.rng_seed = seed_from_hex(seed);
  cfg.validate();
  return cfg;
}

}  // namespace qrng::config
