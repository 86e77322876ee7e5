#include "qrng/bits.hpp"

#include <bit>
#include <stdexcept>

#include "qrng/error.hpp"

namespace qrng {

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes) {
  return from_bytes(bytes, bytes.size() * 8);
}

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  if (bit_count > bytes.size() * 8) throw ParameterError("bit_count", "exceeds available bytes");
  BitVector v(bit_count);
  for (std::size_t k = 0; k < (bit_count + 7) / 8; ++k) {
    v.words_[k / 8] |= static_cast<std::uint64_t>(bytes[k]) << (8 * (k % 8));
  }
  v.clear_tail();
  return v;
}

BitVector BitVector::from_string(std::string_view text) {
  BitVector v(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      v.set(i, true);
    } else if (text[i] != '0') {
      throw ParameterError("bits", "expected only '0' and '1' characters");
    }
  }
  return v;
}

void BitVector::push_back(bool value) {
  if ((size_ & 63) == 0) words_.push_back(0);
  if (value) words_[size_ >> 6] |= std::uint64_t{1} << (size_ & 63);
  ++size_;
}

void BitVector::append_bits(std::uint64_t value, unsigned count) {
  if (count == 0) return;
  if (count < 64) value &= (std::uint64_t{1} << count) - 1;
  const unsigned offset = size_ & 63;
  if (offset == 0) {
    words_.push_back(value);
  } else {
    words_.back() |= value << offset;
    if (offset + count > 64) words_.push_back(value >> (64 - offset));
  }
  size_ += count;
}

void BitVector::append(const BitVector& other) {
  const std::size_t full = other.size_ / 64;
  for (std::size_t w = 0; w < full; ++w) append_bits(other.words_[w], 64);
  if (const unsigned rest = other.size_ & 63) append_bits(other.words_[full], rest);
}

void BitVector::resize(std::size_t size) {
  words_.resize((size + 63) / 64, 0);
  size_ = size;
  clear_tail();
}

std::size_t BitVector::count_ones() const noexcept {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

BitVector BitVector::operator^(const BitVector& other) const {
  if (other.size_ != size_) throw ParameterError("bits", "length mismatch in xor");
  BitVector out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] ^= other.words_[w];
  return out;
}

BitVector BitVector::operator~() const {
  BitVector out(*this);
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

BitVector BitVector::slice(std::size_t begin, std::size_t length) const {
  if (begin > size_ || length > size_ - begin) throw ParameterError("slice", "out of range");
  BitVector out(length);
  for (std::size_t i = 0; i < length; ++i) {
    if ((*this)[begin + i]) out.set(i, true);
  }
  return out;
}

std::vector<std::uint8_t> BitVector::to_bytes() const {
  std::vector<std::uint8_t> bytes((size_ + 7) / 8);
  for (std::size_t k = 0; k < bytes.size(); ++k) {
    bytes[k] = static_cast<std::uint8_t>(words_[k / 8] >> (8 * (k % 8)));
  }
  return bytes;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)[i]) s[i] = '1';
  }
  return s;
}

void BitVector::clear_tail() noexcept {
  if (const unsigned rest = size_ & 63; rest != 0 && !words_.empty()) {
    words_.back() &= (std::uint64_t{1} << rest) - 1;
  }
}

}  // namespace qrng
