#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qrng {

// Packed bit sequence. Bit i lives in word i / 64 at position i % 64
// (LSB-first). Bits past size() in the last word are kept zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

  static BitVector from_bytes(std::span<const std::uint8_t> bytes);
  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count);
  // Accepts '0' / '1'; every other character throws ParameterError.
  static BitVector from_string(std::string_view text);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool operator[](std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    words_[i >> 6] = value ? (words_[i >> 6] | mask) : (words_[i >> 6] & ~mask);
  }
  void push_back(bool value);
  // Appends the low `count` bits of `value`, least significant first.
  void append_bits(std::uint64_t value, unsigned count);
  void append(const BitVector& other);
  void clear() noexcept {
    words_.clear();
    size_ = 0;
  }
  void resize(std::size_t size);

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  std::size_t count_ones() const noexcept;
  BitVector operator^(const BitVector& other) const;
  BitVector operator~() const;
  // Bits [begin, begin + length).
  BitVector slice(std::size_t begin, std::size_t length) const;

  // Byte k holds bits 8k..8k+7, bit 8k in the least significant position.
  // A trailing partial byte is zero-padded.
  std::vector<std::uint8_t> to_bytes() const;
  std::string to_string() const;

  bool operator==(const BitVector& other) const = default;

 private:
  void clear_tail() noexcept;

  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

}  // namespace qrng
