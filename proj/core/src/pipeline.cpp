#include "qrng/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <string_view>

#include "qrng/error.hpp"
#include "qrng/io.hpp"

#ifndef QRNG_INSTALLED_PROFILE_DIR
#define QRNG_INSTALLED_PROFILE_DIR ""
#endif
#ifndef QRNG_SOURCE_PROFILE_DIR
#define QRNG_SOURCE_PROFILE_DIR ""
#endif

namespace qrng {
namespace {

class TeeSink final : public extractor::ByteSink {
 public:
  explicit TeeSink(extractor::ByteSink* next) : next_(next) {}
  void write(std::span<const std::uint8_t> bytes) override {
    data.insert(data.end(), bytes.begin(), bytes.end());
    if (next_ != nullptr) next_->write(bytes);
  }
  std::vector<std::uint8_t> data;

 private:
  extractor::ByteSink* next_;
};

config::Json parse_json_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  try {
    return config::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(e.byte > 0 ? e.byte - 1 : 0, path.string() + ": " + e.what());
  }
}

}  // namespace

Profile profile_from_json(const config::Json& j) {
  if (!j.is_object()) throw ParameterError("profile", "expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    static constexpr std::string_view known[] = {"name",  "description", "detector",
                                                 "trace", "extractor",   "integration"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ParameterError("profile." + key, "unknown field");
    }
  }

  Profile p;
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  if (j.contains("description")) p.description = j.at("description").get<std::string>();
  if (j.contains("detector")) p.detector = config::detector_from_json(j.at("detector"));
  if (j.contains("trace")) p.trace = config::trace_config_from_json(j.at("trace"));
  if (j.contains("extractor")) {
    const auto& e = j.at("extractor");
    for (const auto& [key, _] : e.items()) {
      if (key != "samples_per_block" && key != "security_log2") {
        throw ParameterError("extractor." + key, "unknown field");
      }
    }
    if (e.contains("samples_per_block")) {
      if (!e.at("samples_per_block").is_number_unsigned()) {
        throw ParameterError("samples_per_block", "expected a positive integer");
      }
      p.extractor.samples_per_block = e.at("samples_per_block").get<std::size_t>();
    }
    if (e.contains("security_log2")) {
      if (!e.at("security_log2").is_number_integer()) {
        throw ParameterError("security_log2", "expected an integer");
      }
      p.extractor.security_log2 = e.at("security_log2").get<int>();
    }
  }
  if (j.contains("integration")) {
    const auto& in = j.at("integration");
    if (in.contains("half_width_sigmas")) p.integration.half_width_sigmas = in.at("half_width_sigmas").get<double>();
    if (in.contains("node_count")) p.integration.node_count = in.at("node_count").get<int>();
  }
  if (p.extractor.samples_per_block == 0) throw ParameterError("samples_per_block", "must be > 0");
  if (p.extractor.security_log2 < 0) throw ParameterError("security_log2", "must be >= 0");
  return p;
}

config::Json to_json(const Profile& p) {
  return {{"name", p.name},
          {"description", p.description},
          {"detector", config::to_json(p.detector)},
          {"trace", config::to_json(p.trace)},
          {"extractor",
           {{"samples_per_block", p.extractor.samples_per_block},
            {"security_log2", p.extractor.security_log2}}},
          {"integration",
           {{"half_width_sigmas", p.integration.half_width_sigmas},
            {"node_count", p.integration.node_count}}}};
}

Profile load_config_file(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  const bool is_profile = j.is_object() && (j.contains("detector") || j.contains("trace") ||
                                            j.contains("extractor") || j.contains("name"));
  if (is_profile) return profile_from_json(j);
  Profile p;
  p.name = path.stem().string();
  p.detector = config::detector_from_json(j);
  return p;
}

std::vector<std::filesystem::path> profile_search_path() {
  if (const char* dir = std::getenv(kProfileDirEnv); dir != nullptr && *dir != '\0') {
    return {dir};
  }
  std::vector<std::filesystem::path> dirs;
  for (const char* d : {QRNG_INSTALLED_PROFILE_DIR, QRNG_SOURCE_PROFILE_DIR}) {
    if (*d != '\0') dirs.emplace_back(d);
  }
  return dirs;
}

Profile load_profile(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos) {
    throw ParameterError("profile", "invalid profile name '" + name + "'");
  }
  for (const auto& dir : profile_search_path()) {
    const auto path = dir / (name + ".json");
    if (std::filesystem::exists(path)) {
      Profile p = load_config_file(path);
      if (p.name.empty()) p.name = name;
      return p;
    }
  }
  throw ParameterError("profile", "no profile named '" + name + "' in the profile search path");
}

std::vector<std::string> available_profiles() {
  std::vector<std::string> names;
  for (const auto& dir : profile_search_path()) {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

config::Json PipelineReport::to_json() const {
  config::Json j = {
      {"hmin_bits", entropy.hmin},
      {"quadrature_error_bits", entropy.quadrature_error},
      {"sigma_q", entropy.model.sigma_q},
      {"sigma_e", entropy.model.sigma_e},
      {"range", entropy.adc.range},
      {"bits", entropy.adc.bits},
      {"convention", std::string(entropy::to_string(entropy.adc.bin_convention))},
      {"extractable_bits_per_second", extractable_bits_per_second},
      {"block_output_bits_per_second", block_output_bits_per_second},
      {"extractor",
       {{"n", stream.n},
        {"m", stream.m},
        {"security_log2", stream.security_log2},
        {"blocks", stream.blocks},
        {"discarded_bits", stream.discarded_bits},
        {"output_bits", stream.output_bits},
        {"seconds", stream.seconds},
        {"bits_per_second", stream.bits_per_second}}},
  };
  if (tests) {
    j["randomness"] = config::Json::parse(tests->to_json());
  } else {
    j["randomness"] = nullptr;
  }
  return j;
}

PipelineReport run_pipeline(const Profile& profile, const PipelineOptions& options,
                            extractor::ByteSink* sink) {
  const auto& tc = profile.trace;
  tc.validate();

  PipelineReport report;
  report.entropy = entropy::average_min_entropy(tc.model, tc.adc, profile.integration);
  const std::size_t spb = profile.extractor.samples_per_block;
  report.input_bits = spb * static_cast<std::size_t>(tc.adc.bits);
  report.output_bits = extractor::output_length(spb, tc.adc.bits, report.entropy.hmin,
                                                profile.extractor.security_log2);
  report.extractable_bits_per_second = entropy::extractable_rate(report.entropy.hmin, tc.sample_rate);
  report.block_output_bits_per_second =
      static_cast<double>(report.output_bits) / static_cast<double>(spb) * tc.sample_rate;

  const std::size_t seed_len = report.input_bits + report.output_bits - 1;
  BitVector seed = options.extractor_seed
                       ? extractor::generate_seed(seed_len, {.fixed = *options.extractor_seed})
                       : extractor::expand_seed(seed_len, options.extractor_seed_value);
  const extractor::ToeplitzExtractor ext({.input_bits = report.input_bits,
                                          .output_bits = report.output_bits,
                                          .security_log2 = profile.extractor.security_log2,
                                          .seed = std::move(seed)});

  const auto trace = trace::generate_gaussian_trace(tc);
  extractor::SpanCodeSource source(trace.codes);
  TeeSink tee(sink);
  report.stream = extractor::stream_extract(source, tc.adc.bits, ext, tee, {.workers = options.workers});

  if (report.stream.output_bits >= randtest::kMinLongestRunBits) {
    const auto bits = BitVector::from_bytes(tee.data, report.stream.output_bits);
    report.tests = randtest::run_battery(bits, options.battery);
  }
  return report;
}

}  // namespace qrng
