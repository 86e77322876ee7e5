#pragma once

// Six tests from the NIST SP 800-22 statistical suite: frequency (monobit),
// frequency within a block, runs, longest run of ones in a block, cumulative
// sums, and serial. p-values follow the published formulas.

#include <filesystem>
#include <string>
#include <vector>

#include "qrng/bits.hpp"

namespace qrng::randtest {

inline constexpr double kDefaultAlpha = 0.01;

// Minimum sequence lengths enforced by each test.
inline constexpr std::size_t kMinMonobitBits = 100;
inline constexpr std::size_t kMinBlockFrequencyBits = 100;
inline constexpr std::size_t kMinRunsBits = 100;
inline constexpr std::size_t kMinLongestRunBits = 128;
inline constexpr std::size_t kMinCusumBits = 100;

enum class Direction { kForward, kBackward };

double monobit(const BitVector& bits);
double block_frequency(const BitVector& bits, std::size_t block_len);
double runs(const BitVector& bits);
double longest_run_of_ones(const BitVector& bits);
double cumulative_sums(const BitVector& bits, Direction direction = Direction::kForward);

struct SerialResult {
  double p1 = 0.0;  // from the first difference of psi^2
  double p2 = 0.0;  // from the second difference
};
// Requires 2 <= m < floor(log2 n) - 2.
SerialResult serial(const BitVector& bits, int m);

// Statistic-and-p-value kernels without length checks, exposed so the
// published worked examples (some shorter than the enforced minimums) can be
// reproduced.
namespace detail {
struct Outcome {
  double statistic = 0.0;
  double p_value = 0.0;
};
Outcome monobit(const BitVector& bits);
Outcome block_frequency(const BitVector& bits, std::size_t block_len);
Outcome runs(const BitVector& bits);
Outcome longest_run_of_ones(const BitVector& bits);
Outcome cumulative_sums(const BitVector& bits, Direction direction);
struct SerialOutcome {
  double del1 = 0.0, del2 = 0.0;
  SerialResult p;
};
SerialOutcome serial(const BitVector& bits, int m);
double igamc(double a, double x);
}  // namespace detail

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;            // smallest of p_values
  std::vector<double> p_values;    // two for serial, one otherwise
  bool pass = false;               // p_value >= alpha
};

struct BatteryConfig {
  double alpha = kDefaultAlpha;
  // 0 selects max(20, ceil(n / 99)), which keeps block count below 100 and
  // block length above 1% of n.
  std::size_t block_len = 0;
  // 0 selects min(16, floor(log2 n) - 3).
  int serial_m = 0;
  Direction cusum_direction = Direction::kForward;
};

struct TestReport {
  double alpha = kDefaultAlpha;
  std::size_t bit_count = 0;
  std::vector<TestResult> results;

  bool all_pass() const;
  std::string to_json() const;
  std::string to_table() const;
};

TestReport run_battery(const BitVector& bits, const BatteryConfig& config = {});

// One '0'/'1' character per bit, a newline after every 64 characters and
// after a final partial line.
void export_ascii_bits(const BitVector& bits, const std::filesystem::path& path);
BitVector import_ascii_bits(const std::filesystem::path& path);

}  // namespace qrng::randtest
