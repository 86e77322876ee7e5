#pragma once

// Seeded Toeplitz hashing over GF(2).
//
// For an n-bit input block x and a seed s of n + m - 1 bits, output bit i is
//   y[i] = XOR_j  s[i - j + n - 1] & x[j],   0 <= i < m, 0 <= j < n.
//
// ADC codes are serialized least significant bit first, `adc_bits` bits per
// code, and concatenated across samples. Output bits are packed into bytes
// least significant bit first (see BitVector::to_bytes).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/bits.hpp"

namespace qrng::extractor {

struct ExtractorParams {
  std::size_t input_bits = 0;   // n
  std::size_t output_bits = 0;  // m
  int security_log2 = 50;       // epsilon = 2^-security_log2
  BitVector seed;               // n + m - 1 bits

  void validate() const;
};

inline constexpr std::size_t kDefaultSamplesPerBlock = 4096;
inline constexpr int kDefaultSecurityLog2 = 50;

// m = floor(samples * hmin) - 2 * security_log2, clamped to samples * bits.
// Throws ComputationError naming the smallest viable block when m <= 0.
std::size_t output_length(std::size_t samples_per_block, int bits_per_sample,
                          double hmin_per_sample, int security_log2);

class ToeplitzExtractor {
 public:
  explicit ToeplitzExtractor(ExtractorParams params);

  const ExtractorParams& params() const noexcept { return params_; }

  BitVector extract_block(const BitVector& input) const;
  // Word-level entry point: `input` holds exactly ceil(n / 64) words with
  // unused high bits zero; `output` receives ceil(m / 64) words.
  void extract_block(std::span<const std::uint64_t> input, std::span<std::uint64_t> output) const;

 private:
  ExtractorParams params_;
  std::size_t out_words_ = 0;
  // shifted_[r][w] = bits 64w + r .. 64w + r + 63 of the seed.
  std::vector<std::vector<std::uint64_t>> shifted_;
};

// Abstract sample source for streaming. read() fills up to codes.size()
// values and returns the count; 0 signals end of stream.
class CodeSource {
 public:
  virtual ~CodeSource() = default;
  virtual std::size_t read(std::span<std::uint32_t> codes) = 0;
};

class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
};

class SpanCodeSource final : public CodeSource {
 public:
  explicit SpanCodeSource(std::span<const std::uint32_t> codes) : codes_(codes) {}
  std::size_t read(std::span<std::uint32_t> out) override;

 private:
  std::span<const std::uint32_t> codes_;
  std::size_t pos_ = 0;
};

class VectorByteSink final : public ByteSink {
 public:
  void write(std::span<const std::uint8_t> bytes) override {
    data.insert(data.end(), bytes.begin(), bytes.end());
  }
  std::vector<std::uint8_t> data;
};

struct StreamReport {
  std::size_t n = 0;
  std::size_t m = 0;
  int security_log2 = 0;
  std::size_t blocks = 0;
  std::size_t discarded_bits = 0;  // trailing partial input block
  std::size_t output_bits = 0;
  std::size_t output_bytes = 0;
  std::size_t padding_bits = 0;  // zero bits filling the final output byte
  double seconds = 0.0;
  double bits_per_second = 0.0;  // output bits / wall time
};

struct StreamOptions {
  unsigned workers = 1;  // 0 = hardware concurrency
  std::size_t blocks_per_batch = 8;
};

StreamReport stream_extract(CodeSource& source, int adc_bits, const ToeplitzExtractor& extractor,
                            ByteSink& sink, const StreamOptions& options = {});

// Same pipeline, collecting output as bits (no byte padding).
BitVector extract_codes(std::span<const std::uint32_t> codes, int adc_bits,
                        const ToeplitzExtractor& extractor, StreamReport* report = nullptr);

// Serialize codes to bits, least significant bit of each code first.
BitVector serialize_codes(std::span<const std::uint32_t> codes, int adc_bits);

struct EntropySource {
  // Caller-provided bits for reproducible runs; used verbatim (truncated or
  // rejected if too short). When absent, the platform source is read.
  std::optional<BitVector> fixed;
  std::string device = "/dev/urandom";
};

BitVector generate_seed(std::size_t length, const EntropySource& source = {});

// Deterministic seed expansion from a 64-bit value, for reproducible test and
// pipeline runs only. Not a cryptographic seed.
BitVector expand_seed(std::size_t length, std::uint64_t value);

}  // namespace qrng::extractor
