#pragma once

// Parameter profiles and the end-to-end simulate -> entropy -> extract ->
// test pipeline.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qrng/config_json.hpp"
#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/randtest.hpp"
#include "qrng/trace.hpp"

namespace qrng {

// Environment variable that overrides the profile search path.
inline constexpr const char* kProfileDirEnv = "QRNG_PROFILE_DIR";

struct ExtractorSettings {
  std::size_t samples_per_block = extractor::kDefaultSamplesPerBlock;
  int security_log2 = extractor::kDefaultSecurityLog2;
};

struct Profile {
  std::string name;
  std::string description;
  noise::DetectorConfig detector;
  trace::TraceConfig trace;
  ExtractorSettings extractor;
  entropy::IntegrationOptions integration;
};

Profile profile_from_json(const config::Json& j);
config::Json to_json(const Profile& p);

// Accepts a full profile document or a bare detector config object.
Profile load_config_file(const std::filesystem::path& path);

// Directories searched for `<name>.json`: $QRNG_PROFILE_DIR when set, else the
// installed data directory and the source-tree profiles/ directory.
std::vector<std::filesystem::path> profile_search_path();
Profile load_profile(const std::string& name);
std::vector<std::string> available_profiles();

struct PipelineOptions {
  // Extractor seed. When unset the seed is expanded deterministically from
  // extractor_seed_value.
  std::optional<BitVector> extractor_seed;
  std::uint64_t extractor_seed_value = 0x7e0b11c2u;
  randtest::BatteryConfig battery;
  unsigned workers = 1;
};

struct PipelineReport {
  entropy::EntropyEstimate entropy;
  std::size_t input_bits = 0;   // n
  std::size_t output_bits = 0;  // m
  // hmin x sample rate: what the sampled stream supports.
  double extractable_bits_per_second = 0.0;
  // m / samples_per_block x sample rate: what the chosen block geometry emits.
  double block_output_bits_per_second = 0.0;
  extractor::StreamReport stream;
  std::optional<randtest::TestReport> tests;  // absent when output < 128 bits
  config::Json to_json() const;
};

// Simulates profile.trace, estimates min-entropy, sizes and runs the
// extractor, and tests the output. Extracted bytes go to `sink` when given.
PipelineReport run_pipeline(const Profile& profile, const PipelineOptions& options = {},
                            extractor::ByteSink* sink = nullptr);

}  // namespace qrng
