#include "qrng/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qrng/config_json.hpp"
#include "qrng/error.hpp"
#include "qrng/io.hpp"

namespace qrng {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  return fs::temp_directory_path() / ("qrng_pipeline_" + std::to_string(rng()) + "_" + name);
}

std::string field_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(ConfigJson, DetectorRoundTrip) {
  noise::DetectorConfig cfg;
  cfg.photodiode = noise::PhotodiodeModel::ingaas();
  cfg.temperature = 300.0;
  cfg.second_stage_gain = 20.0;
  const auto back = config::detector_from_json(config::to_json(cfg));
  EXPECT_EQ(back.photodiode.shunt_resistance, cfg.photodiode.shunt_resistance);
  EXPECT_EQ(back.photodiode.dark_current, cfg.photodiode.dark_current);
  EXPECT_EQ(back.photodiode.label, cfg.photodiode.label);
  EXPECT_EQ(back.temperature, 300.0);
  EXPECT_EQ(back.second_stage_gain, 20.0);
  EXPECT_EQ(back.frontend.gain_bandwidth, cfg.frontend.gain_bandwidth);
}

TEST(ConfigJson, ErrorsNameTheField) {
  EXPECT_EQ(field_of([] { config::detector_from_json(config::Json::parse(R"({"temprature": 3})")); }),
            "detector.temprature");
  EXPECT_EQ(field_of([] { config::detector_from_json(config::Json::parse(R"({"temperature": "hot"})")); }),
            "temperature");
  EXPECT_EQ(field_of([] { config::detector_from_json(config::Json::parse(R"({"hpf_order": 2})")); }),
            "hpf_order");
  EXPECT_EQ(field_of([] {
              config::adc_from_json(config::Json::parse(R"({"bin_convention": "THIRD"})"));
            }),
            "bin_convention");
}

TEST(ConfigJson, TraceConfigRoundTripKeepsAllSeedBits) {
  trace::TraceConfig cfg;
  cfg.rng_seed = 0xfedcba9876543210ull;
  cfg.adc.bin_convention = entropy::BinConvention::kFullSpan;
  const auto back = config::trace_config_from_json(config::to_json(cfg));
  EXPECT_EQ(back.rng_seed, cfg.rng_seed);
  EXPECT_EQ(back.adc.bin_convention, cfg.adc.bin_convention);
  EXPECT_EQ(config::seed_from_hex("0x5EED"), 0x5eedu);
  EXPECT_EQ(config::seed_to_hex(0x5eed), "0x0000000000005eed");
  EXPECT_THROW(config::seed_from_hex("0xZZ"), ParameterError);
  EXPECT_THROW(config::seed_from_hex(""), ParameterError);
}

TEST(Profiles, BundledProfilesLoad) {
  const auto names = available_profiles();
  for (const char* n : {"gesi-paper", "gesi-paper-dark5e-8", "ingaas-paper", "fig8-qcnr20"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    EXPECT_NO_THROW(load_profile(n)) << n;
  }
  const auto p = load_profile("gesi-paper");
  EXPECT_EQ(p.trace.model.sigma_q, 0.2685);
  EXPECT_EQ(p.trace.adc.bin_convention, entropy::BinConvention::kHalfSpan);
  EXPECT_EQ(p.extractor.samples_per_block, 4096u);
  EXPECT_EQ(load_profile("gesi-paper-dark5e-8").detector.photodiode.dark_current, 5e-8);
  EXPECT_EQ(load_profile("ingaas-paper").detector.photodiode.shunt_resistance, 1e11);
}

TEST(Profiles, DarkCurrentVariantsBothNearNineDb) {
  for (const char* n : {"gesi-paper", "gesi-paper-dark5e-8"}) {
    const double q = noise::qcnr(load_profile(n).detector, 1e5);
    EXPECT_GE(q, 8.2) << n;
    EXPECT_LE(q, 9.8) << n;
  }
}

TEST(Profiles, UnknownNameAndBadNames) {
  EXPECT_THROW(load_profile("no-such-profile"), ParameterError);
  EXPECT_THROW(load_profile("../etc/passwd"), ParameterError);
}

TEST(Profiles, EnvironmentOverride) {
  const auto dir = temp_path("profiles");
  fs::create_directories(dir);
  io::write_file_atomic(dir / "custom.json", std::string(R"({"temperature": 77.0})"));
  const char* prev = std::getenv(kProfileDirEnv);
  const std::string saved = prev != nullptr ? prev : "";
  ::setenv(kProfileDirEnv, dir.c_str(), 1);
  const auto p = load_profile("custom");
  EXPECT_EQ(p.detector.temperature, 77.0);
  EXPECT_THROW(load_profile("gesi-paper"), ParameterError);
  if (prev != nullptr) {
    ::setenv(kProfileDirEnv, saved.c_str(), 1);
  } else {
    ::unsetenv(kProfileDirEnv);
  }
  fs::remove_all(dir);
}

TEST(Profiles, JsonRoundTrip) {
  const auto p = load_profile("fig8-qcnr20");
  const auto back = profile_from_json(to_json(p));
  EXPECT_EQ(back.name, p.name);
  EXPECT_EQ(back.trace.adc.range, p.trace.adc.range);
  EXPECT_EQ(back.trace.model.sigma_e, p.trace.model.sigma_e);
  EXPECT_EQ(back.integration.node_count, p.integration.node_count);
  EXPECT_THROW(profile_from_json(config::Json::parse(R"({"extra": 1})")), ParameterError);
}

TEST(Pipeline, SmallRunIsDeterministicAndConsistent) {
  auto profile = load_profile("gesi-paper");
  profile.trace.sample_count = 4096 * 6 + 100;
  const auto a = run_pipeline(profile);
  const auto b = run_pipeline(profile);
  EXPECT_NEAR(a.entropy.hmin, 5.117, 0.05);
  EXPECT_EQ(a.input_bits, 32768u);
  EXPECT_EQ(a.output_bits, extractor::output_length(4096, 8, a.entropy.hmin, 50));
  EXPECT_EQ(a.stream.blocks, 6u);
  EXPECT_EQ(a.stream.discarded_bits, 800u);
  EXPECT_EQ(a.stream.output_bits, 6 * a.output_bits);
  EXPECT_NEAR(a.extractable_bits_per_second, a.entropy.hmin * 200e3, 1e-6);
  ASSERT_TRUE(a.tests.has_value());
  EXPECT_EQ(a.tests->to_json(), b.tests->to_json());

  extractor::VectorByteSink sa, sb;
  run_pipeline(profile, {}, &sa);
  run_pipeline(profile, {}, &sb);
  EXPECT_EQ(sa.data, sb.data);
  EXPECT_EQ(sa.data.size(), (a.stream.output_bits + 7) / 8);

  const auto j = a.to_json();
  for (const char* key : {"hmin_bits", "extractable_bits_per_second", "extractor", "randomness"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Pipeline, BlockTooSmallIsComputationError) {
  auto profile = load_profile("gesi-paper");
  profile.extractor.samples_per_block = 10;
  profile.trace.sample_count = 100;
  EXPECT_THROW(run_pipeline(profile), ComputationError);
}

TEST(Io, EmptyPathAndMissingFile) {
  EXPECT_THROW(io::write_file_atomic("", std::string("x")), IoError);
  EXPECT_THROW(io::read_file(temp_path("missing")), IoError);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  const auto path = temp_path("atomic.txt");
  io::write_file_atomic(path, std::string("hello"));
  EXPECT_TRUE(fs::exists(path));
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  fs::remove(path);
  EXPECT_THROW(io::write_file_atomic(temp_path("nodir") / "x.txt", std::string("y")), IoError);
}

}  // namespace
}  // namespace qrng
