#include "qrng/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include "qrng/config_json.hpp"
#include "qrng/error.hpp"
#include "qrng/io.hpp"

namespace qrng::trace {
namespace {

constexpr char kMagic[8] = {'Q', 'R', 'N', 'G', 'T', 'R', 'C', '\0'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_le(std::span<const std::byte> bytes, std::size_t offset, std::size_t width) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

}  // namespace

void TraceConfig::validate() const {
  model.validate();
  adc.validate();
  if (!(std::isfinite(sample_rate) && sample_rate > 0.0)) {
    throw ParameterError("sample_rate", "must be > 0");
  }
  if (sample_count == 0) throw ParameterError("sample_count", "must be > 0");
}

double code_width(const entropy::AdcModel& adc) {
  return 2.0 * adc.range / static_cast<double>(adc.bin_count());
}

std::size_t code_bytes(int bits) {
  if (bits <= 8) return 1;
  if (bits <= 16) return 2;
  return 4;
}

std::uint32_t quantize(double volts, const entropy::AdcModel& adc) {
  if (!std::isfinite(volts)) throw ParameterError("sample", "must be finite");
  const double max_code = static_cast<double>(adc.bin_count() - 1);
  const double code = std::floor((volts + adc.range) / code_width(adc));
  return static_cast<std::uint32_t>(std::clamp(code, 0.0, max_code));
}

std::vector<std::uint32_t> quantize(std::span<const double> volts, const entropy::AdcModel& adc) {
  adc.validate();
  std::vector<std::uint32_t> codes;
  codes.reserve(volts.size());
  for (double v : volts) codes.push_back(quantize(v, adc));
  return codes;
}

double dequantize(std::uint32_t code, const entropy::AdcModel& adc) {
  return -adc.range + (static_cast<double>(code) + 0.5) * code_width(adc);
}

SampleTrace generate_gaussian_trace(const TraceConfig& cfg) {
  cfg.validate();
  SampleTrace trace;
  trace.config = cfg;
  trace.codes.reserve(cfg.sample_count);

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t i = 0; i < cfg.sample_count; ++i) {
    const double q = cfg.model.sigma_q * unit(rng);
    const double e = cfg.model.sigma_e * unit(rng);
    trace.codes.push_back(quantize(q + e, cfg.adc));
  }
  return trace;
}

std::vector<std::byte> serialize_trace(const SampleTrace& trace) {
  trace.config.validate();
  if (trace.codes.size() != trace.config.sample_count) {
    throw ParameterError("sample_count", "does not match the number of codes");
  }
  config::Json meta = config::to_json(trace.config);
  meta["creator"] = trace.creator;
  meta["generator"] = trace.generator;
  const std::string text = meta.dump();

  const std::size_t width = code_bytes(trace.config.adc.bits);
  const auto max_code = static_cast<std::uint32_t>(trace.config.adc.bin_count() - 1);

  std::vector<std::byte> out;
  out.reserve(kTraceHeaderSize + text.size() + width * trace.codes.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, kTraceFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  for (std::uint32_t code : trace.codes) {
    if (code > max_code) throw ParameterError("codes", "code exceeds 2^bits - 1");
    for (std::size_t i = 0; i < width; ++i) out.push_back(static_cast<std::byte>((code >> (8 * i)) & 0xFF));
  }
  return out;
}

SampleTrace parse_trace(std::span<const std::byte> bytes) {
  if (bytes.size() < kTraceHeaderSize) {
    throw FormatError(bytes.size(), "truncated header: expected " + std::to_string(kTraceHeaderSize) +
                                        " bytes, found " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(0, "bad magic, not a trace file");
  }
  const std::uint32_t version = get_le(bytes, 8, 4);
  if (version != kTraceFormatVersion) {
    throw FormatError(8, "unsupported trace format version " + std::to_string(version));
  }
  const std::size_t meta_len = get_le(bytes, 12, 4);
  if (bytes.size() - kTraceHeaderSize < meta_len) {
    throw FormatError(12, "metadata length " + std::to_string(meta_len) + " exceeds file size");
  }

  const std::string_view text(reinterpret_cast<const char*>(bytes.data()) + kTraceHeaderSize, meta_len);
  config::Json meta;
  try {
    meta = config::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(kTraceHeaderSize + (e.byte > 0 ? e.byte - 1 : 0),
                      std::string("malformed metadata: ") + e.what());
  }

  SampleTrace trace;
  try {
    if (!meta.is_object()) throw ParameterError("metadata", "expected a JSON object");
    if (meta.contains("creator")) trace.creator = meta.at("creator").get<std::string>();
    if (meta.contains("generator")) trace.generator = meta.at("generator").get<std::string>();
    meta.erase("creator");
    meta.erase("generator");
    trace.config = config::trace_config_from_json(meta);
  } catch (const Error& e) {
    throw FormatError(kTraceHeaderSize, std::string("invalid metadata: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(kTraceHeaderSize, std::string("invalid metadata: ") + e.what());
  }

  const std::size_t payload_start = kTraceHeaderSize + meta_len;
  const std::size_t width = code_bytes(trace.config.adc.bits);
  const std::size_t count = trace.config.sample_count;
  const std::size_t expected = count * width;
  const std::size_t actual = bytes.size() - payload_start;
  if (actual != expected) {
    throw FormatError(payload_start + std::min(actual, expected),
                      "payload length mismatch: expected " + std::to_string(expected) +
                          " bytes of codes, found " + std::to_string(actual));
  }

  const auto max_code = static_cast<std::uint32_t>(trace.config.adc.bin_count() - 1);
  trace.codes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = payload_start + i * width;
    const std::uint32_t code = get_le(bytes, at, width);
    if (code > max_code) {
      throw FormatError(at, "code " + std::to_string(code) + " out of range for " +
                                std::to_string(trace.config.adc.bits) + "-bit ADC");
    }
    trace.codes[i] = code;
  }
  return trace;
}

void save_trace(const SampleTrace& trace, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_trace(trace));
}

SampleTrace load_trace(const std::filesystem::path& path) {
  return parse_trace(io::read_file(path));
}

void write_codes_csv(std::span<const std::uint32_t> codes, const std::filesystem::path& path) {
  std::string text = "index,code\n";
  text.reserve(text.size() + codes.size() * 12);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    text += std::to_string(i);
    text += ',';
    text += std::to_string(codes[i]);
    text += '\n';
  }
  io::write_file_atomic(path, text);
}

std::vector<std::uint32_t> read_codes_csv(const std::filesystem::path& path, int bits) {
  if (bits < 1 || bits > 24) throw ParameterError("bits", "must be in [1, 24]");
  const auto bytes = io::read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const std::uint32_t max_code = (std::uint32_t{1} << bits) - 1;

  std::vector<std::uint32_t> codes;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    const std::size_t line_start = pos;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "index,code") throw FormatError(line_start, "expected header 'index,code'");
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw FormatError(line_start, "expected 'index,code'");
    std::uint64_t index = 0, code = 0;
    const auto idx = line.substr(0, comma);
    const auto val = line.substr(comma + 1);
    auto r1 = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    auto r2 = std::from_chars(val.data(), val.data() + val.size(), code);
    if (r1.ec != std::errc{} || r1.ptr != idx.data() + idx.size() || r2.ec != std::errc{} ||
        r2.ptr != val.data() + val.size()) {
      throw FormatError(line_start, "malformed row");
    }
    if (index != codes.size()) throw FormatError(line_start, "index out of sequence");
    if (code > max_code) throw FormatError(line_start + comma + 1, "code out of range");
    codes.push_back(static_cast<std::uint32_t>(code));
  }
  if (header) throw FormatError(0, "empty file, expected header 'index,code'");
  return codes;
}

}  // namespace qrng::trace
