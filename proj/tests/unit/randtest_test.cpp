#include "qrng/randtest.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qrng/error.hpp"
#include "qrng/io.hpp"

namespace qrng::randtest {
namespace {

// First 100 binary digits of the expansion of pi used by the published
// worked examples.
constexpr const char* kPiBits =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";
constexpr const char* kLongestRunExample =
    "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111"
    "001100111001101101100010110010";

BitVector bits(const char* s) { return BitVector::from_string(s); }

BitVector random_bits(std::size_t n, std::mt19937_64& rng) {
  BitVector v(n);
  for (auto& w : v.words()) w = rng();
  v.resize(n);
  return v;
}

BitVector alternating(std::size_t n) {
  BitVector v(n);
  for (std::size_t i = 1; i < n; i += 2) v.set(i, true);
  return v;
}

TEST(WorkedExamples, ShortSequences) {
  EXPECT_NEAR(detail::monobit(bits("1011010101")).p_value, 0.527089, 1e-6);
  EXPECT_NEAR(detail::block_frequency(bits("0110011010"), 3).p_value, 0.801252, 1e-6);
  EXPECT_NEAR(detail::runs(bits("1001101011")).p_value, 0.147232, 1e-6);
  EXPECT_NEAR(detail::cumulative_sums(bits("1011010111"), Direction::kForward).p_value, 0.4116588, 1e-4);
  const auto s = detail::serial(bits("0011011101"), 3);
  EXPECT_NEAR(s.p.p1, 0.808792, 1e-6);
  EXPECT_NEAR(s.p.p2, 0.670320, 1e-6);
  EXPECT_NEAR(s.del1, 1.6, 1e-12);
  EXPECT_NEAR(s.del2, 0.8, 1e-12);
}

TEST(WorkedExamples, HundredBitSequence) {
  const auto pi = bits(kPiBits);
  ASSERT_EQ(pi.size(), 100u);
  EXPECT_NEAR(monobit(pi), 0.109599, 1e-6);
  EXPECT_NEAR(block_frequency(pi, 10), 0.706438, 1e-6);
  EXPECT_NEAR(runs(pi), 0.500798, 1e-6);
  EXPECT_NEAR(cumulative_sums(pi, Direction::kForward), 0.219194, 1e-6);
  EXPECT_NEAR(cumulative_sums(pi, Direction::kBackward), 0.114866, 1e-6);
}

TEST(WorkedExamples, LongestRun) {
  const auto v = bits(kLongestRunExample);
  ASSERT_EQ(v.size(), 128u);
  const auto r = detail::longest_run_of_ones(v);
  EXPECT_NEAR(r.statistic, 4.882605, 1e-5);
  EXPECT_NEAR(r.p_value, 0.180609, 2e-5);
}

TEST(Igamc, ReferenceValues) {
  EXPECT_NEAR(detail::igamc(1.5, 0.5), 0.80125195690120, 1e-12);
  EXPECT_NEAR(detail::igamc(5.0, 4.0), 0.62883693517987, 1e-12);
  EXPECT_DOUBLE_EQ(detail::igamc(2.0, 0.0), 1.0);
}

TEST(Monobit, Extremes) {
  EXPECT_EQ(monobit(alternating(1000)), 1.0);
  BitVector ones(1000);
  for (std::size_t i = 0; i < 1000; ++i) ones.set(i, true);
  EXPECT_LT(monobit(ones), 1e-10);
}

TEST(Runs, AlternatingHasTooManyRuns) {
  EXPECT_LT(runs(alternating(1000)), 1e-10);
}

TEST(Runs, FrequencyPrerequisiteFailureGivesZero) {
  BitVector v(1000);
  for (std::size_t i = 0; i < 900; ++i) v.set(i, true);
  EXPECT_EQ(runs(v), 0.0);
}

TEST(MinimumLengths, Enforced) {
  const BitVector short99(99);
  EXPECT_THROW(monobit(short99), ParameterError);
  EXPECT_THROW(block_frequency(short99, 10), ParameterError);
  EXPECT_THROW(runs(short99), ParameterError);
  EXPECT_THROW(cumulative_sums(short99), ParameterError);
  EXPECT_THROW(longest_run_of_ones(BitVector(127)), ParameterError);
  EXPECT_THROW(serial(BitVector(15), 2), ParameterError);
}

TEST(Parameters, Validated) {
  std::mt19937_64 rng(1);
  const auto v = random_bits(1000, rng);
  EXPECT_THROW(block_frequency(v, 1), ParameterError);
  EXPECT_THROW(block_frequency(v, 1001), ParameterError);
  EXPECT_THROW(serial(v, 1), ParameterError);
  EXPECT_THROW(serial(v, 7), ParameterError);  // floor(log2 1000) - 2 = 7
  EXPECT_NO_THROW(serial(v, 6));
}

TEST(Properties, ComplementSymmetryOfMonobit) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto v = random_bits(100 + rng() % 5000, rng);
    EXPECT_EQ(monobit(v), monobit(~v));
  }
}

TEST(Properties, PValuesStayInUnitIntervalUnderFuzz) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 128 + rng() % 20000;
    BitVector v;
    switch (k % 4) {
      case 0: v = random_bits(n, rng); break;
      case 1: v = BitVector(n); break;
      case 2: v = ~BitVector(n); break;
      default: {
        // Heavily biased content.
        std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        for (std::size_t i = 0; i < n; ++i) v.push_back(coin(rng));
      }
    }
    const auto report = run_battery(v);
    ASSERT_EQ(report.results.size(), 6u);
    for (const auto& r : report.results) {
      for (double p : r.p_values) {
        ASSERT_TRUE(std::isfinite(p)) << r.name << " n=" << n;
        ASSERT_GE(p, 0.0) << r.name;
        ASSERT_LE(p, 1.0) << r.name;
      }
      ASSERT_EQ(r.pass, r.p_value >= report.alpha);
    }
  }
}

TEST(Battery, SixEntriesAndDeterministic) {
  std::mt19937_64 rng(4);
  const auto v = random_bits(20000, rng);
  const auto a = run_battery(v);
  const auto b = run_battery(v);
  EXPECT_EQ(a.alpha, 0.01);
  EXPECT_EQ(a.bit_count, 20000u);
  ASSERT_EQ(a.results.size(), 6u);
  const char* names[] = {"monobit", "block_frequency", "runs", "longest_run_of_ones",
                         "cumulative_sums_forward", "serial"};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.results[i].name, names[i]);
    EXPECT_EQ(a.results[i].p_values, b.results[i].p_values);
  }
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_NE(a.to_table().find("serial"), std::string::npos);
  EXPECT_EQ(a.results[5].p_values.size(), 2u);
}

TEST(Battery, RandomMillionBitsPass) {
  std::mt19937_64 rng(20240501);
  const auto report = run_battery(random_bits(1'000'000, rng));
  for (const auto& r : report.results) EXPECT_TRUE(r.pass) << r.name << " p=" << r.p_value;
}

TEST(AsciiExport, RoundTripAndLayout) {
  std::mt19937_64 rng(5);
  const auto v = random_bits(200, rng);
  const auto path = std::filesystem::temp_directory_path() /
                    ("qrng_bits_" + std::to_string(rng()) + ".txt");
  export_ascii_bits(v, path);
  const auto raw = io::read_file(path);
  const std::string text(reinterpret_cast<const char*>(raw.data()), raw.size());
  EXPECT_EQ(text.size(), 200u + 4u);  // three full lines plus a partial one
  EXPECT_EQ(text[64], '\n');
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(import_ascii_bits(path), v);

  io::write_file_atomic(path, std::string("0101x\n"));
  EXPECT_THROW(import_ascii_bits(path), FormatError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace qrng::randtest
