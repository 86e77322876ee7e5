#pragma once

// Simulated ADC traces of the homodyne output and their on-disk formats.
//
// Binary trace layout (all integers little-endian):
//   [0, 8)    magic "QRNGTRC\0"
//   [8, 12)   u32 format version (1)
//   [12, 16)  u32 metadata length L
//   [16, 16+L) UTF-8 JSON metadata
//   then sample_count codes, each code_width(bits) bytes wide:
//   1 byte for bits <= 8, 2 bytes for bits <= 16, 4 bytes otherwise.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qrng/entropy.hpp"

namespace qrng::trace {

inline constexpr std::uint32_t kTraceFormatVersion = 1;
inline constexpr std::size_t kTraceHeaderSize = 16;

struct TraceConfig {
  entropy::GaussianNoiseModel model;
  entropy::AdcModel adc;
  double sample_rate = 200e3;
  std::uint64_t sample_count = 1'000'000;
  std::uint64_t rng_seed = 0x5eed;

  void validate() const;
};

struct SampleTrace {
  TraceConfig config;
  std::vector<std::uint32_t> codes;
  // Free-form creation info carried in the metadata block.
  std::string creator = "qrng";
  std::string generator = "mt19937_64+normal_distribution";
};

// Quantizer step. Always 2R / 2^n; independent of the entropy model's bin
// convention.
double code_width(const entropy::AdcModel& adc);
std::size_t code_bytes(int bits);

std::uint32_t quantize(double volts, const entropy::AdcModel& adc);
std::vector<std::uint32_t> quantize(std::span<const double> volts, const entropy::AdcModel& adc);
// Bin-centre voltage of a code.
double dequantize(std::uint32_t code, const entropy::AdcModel& adc);

// m = q + e with q ~ N(0, sigma_q), e ~ N(0, sigma_e) drawn in that order per
// sample from mt19937_64 seeded with rng_seed.
SampleTrace generate_gaussian_trace(const TraceConfig& cfg);

std::vector<std::byte> serialize_trace(const SampleTrace& trace);
SampleTrace parse_trace(std::span<const std::byte> bytes);

// Writes to a sibling temporary file and renames, so a failed save leaves no
// partial file behind.
void save_trace(const SampleTrace& trace, const std::filesystem::path& path);
SampleTrace load_trace(const std::filesystem::path& path);

void write_codes_csv(std::span<const std::uint32_t> codes, const std::filesystem::path& path);
std::vector<std::uint32_t> read_codes_csv(const std::filesystem::path& path, int bits);

}  // namespace qrng::trace
