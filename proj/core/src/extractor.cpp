#include "qrng/extractor.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <thread>

#include "qrng/error.hpp"

namespace qrng::extractor {
namespace {

constexpr std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// Splits a stream of codes into n-bit blocks and hands completed batches to
// `emit_batch` in source order.
template <typename EmitBatch>
std::size_t assemble_blocks(CodeSource& source, int adc_bits, std::size_t n,
                            std::size_t batch_size, EmitBatch&& emit_batch) {
  const auto bits = static_cast<unsigned>(adc_bits);
  std::vector<BitVector> batch;
  BitVector current;
  std::vector<std::uint32_t> chunk(1 << 14);
  std::size_t blocks_done = 0;

  for (;;) {
    std::size_t got = 0;
    try {
      got = source.read(chunk);
    } catch (const std::exception& e) {
      throw IoError("source error at block " + std::to_string(blocks_done + batch.size()) + ": " +
                    e.what());
    }
    if (got == 0) break;
    for (std::size_t k = 0; k < got; ++k) {
      const std::uint64_t code = chunk[k];
      const std::size_t space = n - current.size();
      if (bits <= space) {
        current.append_bits(code, bits);
      } else {
        current.append_bits(code, static_cast<unsigned>(space));
        batch.push_back(std::move(current));
        current = BitVector();
        current.append_bits(code >> space, bits - static_cast<unsigned>(space));
      }
      if (current.size() == n) {
        batch.push_back(std::move(current));
        current = BitVector();
      }
      if (batch.size() >= batch_size) {
        emit_batch(batch, blocks_done);
        blocks_done += batch.size();
        batch.clear();
      }
    }
  }
  if (!batch.empty()) {
    emit_batch(batch, blocks_done);
    blocks_done += batch.size();
  }
  return current.size();
}

std::vector<BitVector> hash_batch(const ToeplitzExtractor& extractor,
                                  const std::vector<BitVector>& batch, unsigned workers) {
  std::vector<BitVector> out(batch.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < batch.size(); i += stride) out[i] = extractor.extract_block(batch[i]);
  };
  if (workers <= 1 || batch.size() <= 1) {
    work(0, 1);
  } else {
    const auto count = std::min<std::size_t>(workers, batch.size());
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work, w, count);
  }
  return out;
}

unsigned resolve_workers(unsigned workers) {
  return workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
}

}  // namespace

void ExtractorParams::validate() const {
  if (input_bits == 0) throw ParameterError("input_bits", "must be >= 1");
  if (output_bits == 0 || output_bits > input_bits) {
    throw ParameterError("output_bits", "must satisfy 1 <= m <= n");
  }
  if (security_log2 < 0) throw ParameterError("security_log2", "must be >= 0");
  if (seed.size() != input_bits + output_bits - 1) {
    throw ParameterError("seed", "length must be n + m - 1 = " +
                                     std::to_string(input_bits + output_bits - 1) + ", got " +
                                     std::to_string(seed.size()));
  }
}

std::size_t output_length(std::size_t samples_per_block, int bits_per_sample,
                          double hmin_per_sample, int security_log2) {
  if (samples_per_block == 0) throw ParameterError("samples_per_block", "must be > 0");
  if (bits_per_sample < 1) throw ParameterError("bits_per_sample", "must be >= 1");
  if (!(hmin_per_sample >= 0.0 && hmin_per_sample <= bits_per_sample)) {
    throw ParameterError("hmin_per_sample", "must lie in [0, bits_per_sample]");
  }
  if (security_log2 < 0) throw ParameterError("security_log2", "must be >= 0");

  const double entropy = std::floor(static_cast<double>(samples_per_block) * hmin_per_sample);
  const double penalty = 2.0 * security_log2;
  const double capacity = static_cast<double>(samples_per_block) * bits_per_sample;
  const double m = std::min(entropy - penalty, capacity);
  if (m <= 0.0) {
    std::string hint = "no block size is viable with zero min-entropy";
    if (hmin_per_sample > 0.0) {
      const double minimum = std::ceil((penalty + 1.0) / hmin_per_sample);
      hint = "need at least " + std::to_string(static_cast<std::uint64_t>(minimum)) + " samples per block";
    }
    throw ComputationError("block too small: " + std::to_string(samples_per_block) +
                           " samples yield no output after the 2*" + std::to_string(security_log2) +
                           "-bit security penalty; " + hint);
  }
  return static_cast<std::size_t>(m);
}

ToeplitzExtractor::ToeplitzExtractor(ExtractorParams params) : params_(std::move(params)) {
  params_.validate();
  out_words_ = words_for(params_.output_bits);

  // Two spare zero words let every window read past the seed end.
  std::vector<std::uint64_t> base(params_.seed.words().begin(), params_.seed.words().end());
  base.resize(base.size() + 2, 0);
  const std::size_t len = base.size() - 1;
  shifted_.assign(64, std::vector<std::uint64_t>(len));
  for (unsigned r = 0; r < 64; ++r) {
    for (std::size_t w = 0; w < len; ++w) {
      shifted_[r][w] = r == 0 ? base[w] : (base[w] >> r) | (base[w + 1] << (64 - r));
    }
  }
}

void ToeplitzExtractor::extract_block(std::span<const std::uint64_t> input,
                                      std::span<std::uint64_t> output) const {
  const std::size_t n = params_.input_bits;
  if (input.size() != words_for(n)) throw ParameterError("input", "word count does not match n");
  if (output.size() != out_words_) throw ParameterError("output", "word count does not match m");

  std::fill(output.begin(), output.end(), 0);
  std::uint64_t* out = output.data();
  const std::size_t mw = out_words_;
  for (std::size_t k = 0; k < input.size(); ++k) {
    std::uint64_t word = input[k];
    while (word != 0) {
      const std::size_t j = 64 * k + static_cast<std::size_t>(std::countr_zero(word));
      word &= word - 1;
      if (j >= n) break;
      // Row i reads seed[i + (n - 1 - j)]: a window of the seed starting at s.
      const std::size_t s = n - 1 - j;
      const std::uint64_t* window = shifted_[s & 63].data() + (s >> 6);
      for (std::size_t w = 0; w < mw; ++w) out[w] ^= window[w];
    }
  }
  if (const std::size_t rest = params_.output_bits & 63) out[mw - 1] &= (std::uint64_t{1} << rest) - 1;
}

BitVector ToeplitzExtractor::extract_block(const BitVector& input) const {
  if (input.size() != params_.input_bits) {
    throw ParameterError("input", "block has " + std::to_string(input.size()) + " bits, expected " +
                                      std::to_string(params_.input_bits));
  }
  BitVector out(params_.output_bits);
  extract_block(input.words(), out.words());
  return out;
}

std::size_t SpanCodeSource::read(std::span<std::uint32_t> out) {
  const std::size_t n = std::min(out.size(), codes_.size() - pos_);
  std::copy_n(codes_.begin() + static_cast<std::ptrdiff_t>(pos_), n, out.begin());
  pos_ += n;
  return n;
}

BitVector serialize_codes(std::span<const std::uint32_t> codes, int adc_bits) {
  if (adc_bits < 1 || adc_bits > 32) throw ParameterError("adc_bits", "must be in [1, 32]");
  BitVector bits;
  for (std::uint32_t c : codes) bits.append_bits(c, static_cast<unsigned>(adc_bits));
  return bits;
}

StreamReport stream_extract(CodeSource& source, int adc_bits, const ToeplitzExtractor& extractor,
                            ByteSink& sink, const StreamOptions& options) {
  if (adc_bits < 1 || adc_bits > 32) throw ParameterError("adc_bits", "must be in [1, 32]");
  const auto& p = extractor.params();
  StreamReport report{.n = p.input_bits, .m = p.output_bits, .security_log2 = p.security_log2};
  const unsigned workers = resolve_workers(options.workers);
  const auto start = std::chrono::steady_clock::now();

  BitVector pending;  // < 8 output bits awaiting a full byte
  auto emit = [&](const std::vector<BitVector>& batch, std::size_t first_block) {
    const auto outputs = hash_batch(extractor, batch, workers);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      pending.append(outputs[i]);
      report.output_bits += outputs[i].size();
      const std::size_t whole = pending.size() / 8;
      if (whole == 0) continue;
      auto bytes = pending.to_bytes();
      bytes.resize(whole);
      try {
        sink.write(bytes);
      } catch (const std::exception& e) {
        throw IoError("sink error at block " + std::to_string(first_block + i) + ": " + e.what());
      }
      report.output_bytes += whole;
      pending = pending.slice(whole * 8, pending.size() - whole * 8);
    }
    report.blocks += batch.size();
  };

  report.discarded_bits =
      assemble_blocks(source, adc_bits, p.input_bits, std::max<std::size_t>(1, options.blocks_per_batch), emit);

  if (!pending.empty()) {
    report.padding_bits = 8 - pending.size();
    const auto bytes = pending.to_bytes();
    try {
      sink.write(bytes);
    } catch (const std::exception& e) {
      throw IoError("sink error at block " + std::to_string(report.blocks) + ": " + e.what());
    }
    report.output_bytes += bytes.size();
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.bits_per_second = report.seconds > 0.0 ? static_cast<double>(report.output_bits) / report.seconds : 0.0;
  return report;
}

BitVector extract_codes(std::span<const std::uint32_t> codes, int adc_bits,
                        const ToeplitzExtractor& extractor, StreamReport* report) {
  if (adc_bits < 1 || adc_bits > 32) throw ParameterError("adc_bits", "must be in [1, 32]");
  const auto& p = extractor.params();
  StreamReport r{.n = p.input_bits, .m = p.output_bits, .security_log2 = p.security_log2};
  const auto start = std::chrono::steady_clock::now();

  BitVector out;
  SpanCodeSource source(codes);
  r.discarded_bits = assemble_blocks(source, adc_bits, p.input_bits, 1,
                                     [&](const std::vector<BitVector>& batch, std::size_t) {
                                       for (const auto& block : batch) out.append(extractor.extract_block(block));
                                       r.blocks += batch.size();
                                     });
  r.output_bits = out.size();
  r.output_bytes = (out.size() + 7) / 8;
  r.padding_bits = r.output_bytes * 8 - out.size();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.bits_per_second = r.seconds > 0.0 ? static_cast<double>(r.output_bits) / r.seconds : 0.0;
  if (report != nullptr) *report = r;
  return out;
}

BitVector generate_seed(std::size_t length, const EntropySource& source) {
  if (length == 0) throw ParameterError("seed_length", "must be > 0");
  if (source.fixed) {
    if (source.fixed->size() < length) {
      throw ParameterError("seed", "fixed seed has " + std::to_string(source.fixed->size()) +
                                       " bits, need " + std::to_string(length));
    }
    return source.fixed->size() == length ? *source.fixed : source.fixed->slice(0, length);
  }

  std::ifstream in(source.device, std::ios::binary);
  if (!in) throw IoError("entropy source unavailable: cannot open " + source.device);
  std::vector<std::uint8_t> bytes((length + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError("entropy source unavailable: short read from " + source.device);
  }
  return BitVector::from_bytes(bytes, length);
}

BitVector expand_seed(std::size_t length, std::uint64_t value) {
  if (length == 0) throw ParameterError("seed_length", "must be > 0");
  std::mt19937_64 rng(value);
  BitVector bits;
  while (bits.size() < length) bits.append_bits(rng(), 64);
  bits.resize(length);
  return bits;
}

}  // namespace qrng::extractor
