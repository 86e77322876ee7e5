#include "qrng/randtest.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "qrng/error.hpp"
#include "qrng/io.hpp"

namespace qrng::randtest {
namespace {

double clamp_p(double p) {
  if (std::isnan(p)) return 0.0;
  return std::clamp(p, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_length(const BitVector& bits, std::size_t minimum, const char* test) {
  if (bits.size() < minimum) {
    throw ParameterError(test, "needs at least " + std::to_string(minimum) + " bits, got " +
                                   std::to_string(bits.size()));
  }
}

std::size_t ones_in_range(const BitVector& bits, std::size_t begin, std::size_t len) {
  std::size_t ones = 0;
  for (std::size_t i = begin; i < begin + len; ++i) ones += bits[i];
  return ones;
}

double psi_squared(const BitVector& bits, int m) {
  if (m <= 0) return 0.0;
  const std::size_t n = bits.size();
  const std::size_t patterns = std::size_t{1} << m;
  const std::uint32_t mask = static_cast<std::uint32_t>(patterns - 1);
  std::vector<std::uint32_t> counts(patterns, 0);

  // Overlapping windows with wrap-around: prime with the first m - 1 bits.
  std::uint32_t v = 0;
  for (int k = 0; k < m - 1; ++k) v = (v << 1) | bits[static_cast<std::size_t>(k)];
  for (std::size_t i = 0; i < n; ++i) {
    v = ((v << 1) | bits[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    ++counts[v];
  }
  double sum = 0.0;
  for (std::uint32_t c : counts) sum += static_cast<double>(c) * c;
  return sum * static_cast<double>(patterns) / static_cast<double>(n) - static_cast<double>(n);
}

struct LongestRunTable {
  std::size_t block;
  int low;   // first category: runs <= low
  std::vector<double> pi;
};

const LongestRunTable& longest_run_table(std::size_t n) {
  static const LongestRunTable small{8, 1, {0.2148, 0.3672, 0.2305, 0.1875}};
  static const LongestRunTable medium{128, 4, {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124}};
  static const LongestRunTable large{10000, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
  if (n < 6272) return small;
  if (n < 750000) return medium;
  return large;
}

}  // namespace

namespace detail {

double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

Outcome monobit(const BitVector& bits) {
  const double n = static_cast<double>(bits.size());
  const double sum = 2.0 * static_cast<double>(bits.count_ones()) - n;
  const double s_obs = std::abs(sum) / std::sqrt(n);
  return {s_obs, clamp_p(std::erfc(s_obs / std::numbers::sqrt2))};
}

Outcome block_frequency(const BitVector& bits, std::size_t block_len) {
  const std::size_t blocks = bits.size() / block_len;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double pi = static_cast<double>(ones_in_range(bits, b * block_len, block_len)) /
                      static_cast<double>(block_len);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(block_len);
  return {chi2, clamp_p(igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0))};
}

Outcome runs(const BitVector& bits) {
  const std::size_t n = bits.size();
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(bits.count_ones()) / nd;
  // Frequency prerequisite: the test is not applicable and reports p = 0.
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return {0.0, 0.0};

  std::size_t v_obs = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) v_obs += bits[k] != bits[k + 1];
  const double v = static_cast<double>(v_obs);
  const double num = std::abs(v - 2.0 * nd * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nd) * pi * (1.0 - pi);
  return {v, clamp_p(std::erfc(num / den))};
}

Outcome longest_run_of_ones(const BitVector& bits) {
  const auto& table = longest_run_table(bits.size());
  const std::size_t blocks = bits.size() / table.block;
  const std::size_t categories = table.pi.size();
  std::vector<double> counts(categories, 0.0);

  for (std::size_t b = 0; b < blocks; ++b) {
    int longest = 0, run = 0;
    for (std::size_t i = b * table.block; i < (b + 1) * table.block; ++i) {
      run = bits[i] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const int idx = std::clamp(longest - table.low, 0, static_cast<int>(categories) - 1);
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }

  double chi2 = 0.0;
  const double nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i < categories; ++i) {
    const double expected = nb * table.pi[i];
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  const double k = static_cast<double>(categories - 1);
  return {chi2, clamp_p(igamc(k / 2.0, chi2 / 2.0))};
}

Outcome cumulative_sums(const BitVector& bits, Direction direction) {
  const auto n = static_cast<long long>(bits.size());
  long long s = 0, z = 0;
  for (long long k = 0; k < n; ++k) {
    const std::size_t i = static_cast<std::size_t>(direction == Direction::kForward ? k : n - 1 - k);
    s += bits[i] ? 1 : -1;
    z = std::max(z, s < 0 ? -s : s);
  }
  const double nd = static_cast<double>(n);
  const double zd = static_cast<double>(z);
  const double root_n = std::sqrt(nd);

  // Summation bounds use truncating integer division, as in the reference code.
  double sum1 = 0.0;
  for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
    sum1 += normal_cdf((4.0 * k + 1.0) * zd / root_n) - normal_cdf((4.0 * k - 1.0) * zd / root_n);
  }
  double sum2 = 0.0;
  for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
    sum2 += normal_cdf((4.0 * k + 3.0) * zd / root_n) - normal_cdf((4.0 * k + 1.0) * zd / root_n);
  }
  return {zd, clamp_p(1.0 - sum1 + sum2)};
}

SerialOutcome serial(const BitVector& bits, int m) {
  const double psi_m = psi_squared(bits, m);
  const double psi_m1 = psi_squared(bits, m - 1);
  const double psi_m2 = psi_squared(bits, m - 2);
  SerialOutcome out;
  out.del1 = psi_m - psi_m1;
  out.del2 = psi_m - 2.0 * psi_m1 + psi_m2;
  out.p.p1 = clamp_p(igamc(std::pow(2.0, m - 2), out.del1 / 2.0));
  out.p.p2 = clamp_p(igamc(std::pow(2.0, m - 3), out.del2 / 2.0));
  return out;
}

}  // namespace detail

double monobit(const BitVector& bits) {
  require_length(bits, kMinMonobitBits, "monobit");
  return detail::monobit(bits).p_value;
}

double block_frequency(const BitVector& bits, std::size_t block_len) {
  require_length(bits, kMinBlockFrequencyBits, "block_frequency");
  if (block_len < 2 || block_len > bits.size()) {
    throw ParameterError("block_len", "must be in [2, bit count]");
  }
  return detail::block_frequency(bits, block_len).p_value;
}

double runs(const BitVector& bits) {
  require_length(bits, kMinRunsBits, "runs");
  return detail::runs(bits).p_value;
}

double longest_run_of_ones(const BitVector& bits) {
  require_length(bits, kMinLongestRunBits, "longest_run_of_ones");
  return detail::longest_run_of_ones(bits).p_value;
}

double cumulative_sums(const BitVector& bits, Direction direction) {
  require_length(bits, kMinCusumBits, "cumulative_sums");
  return detail::cumulative_sums(bits, direction).p_value;
}

SerialResult serial(const BitVector& bits, int m) {
  const auto log2n = static_cast<int>(std::floor(std::log2(std::max<std::size_t>(bits.size(), 1))));
  if (m < 2 || m >= log2n - 2 || m > 24) {
    throw ParameterError("serial_m", "must satisfy 2 <= m < floor(log2 n) - 2 (n = " +
                                         std::to_string(bits.size()) + ")");
  }
  return detail::serial(bits, m).p;
}

bool TestReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

std::string TestReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"alpha\":" << alpha << ",\"bit_count\":" << bit_count << ",\"tests\":[";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    os << (i ? "," : "") << "{\"name\":\"" << r.name << "\",\"statistic\":" << r.statistic
       << ",\"p_value\":" << r.p_value << ",\"p_values\":[";
    for (std::size_t k = 0; k < r.p_values.size(); ++k) os << (k ? "," : "") << r.p_values[k];
    os << "],\"pass\":" << (r.pass ? "true" : "false") << "}";
  }
  os << "],\"all_pass\":" << (all_pass() ? "true" : "false") << "}";
  return os.str();
}

std::string TestReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "bits: %zu  alpha: %.4g\n", bit_count, alpha);
  out += line;
  std::snprintf(line, sizeof line, "%-22s %14s %12s  %s\n", "test", "statistic", "p-value", "result");
  out += line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-22s %14.6g %12.6f  %s\n", r.name.c_str(), r.statistic,
                  r.p_value, r.pass ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

TestReport run_battery(const BitVector& bits, const BatteryConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ParameterError("alpha", "must lie in (0, 1)");
  const std::size_t n = bits.size();
  require_length(bits, kMinLongestRunBits, "run_battery");

  std::size_t block_len = config.block_len;
  if (block_len == 0) block_len = std::max<std::size_t>(20, (n + 98) / 99);
  int serial_m = config.serial_m;
  if (serial_m == 0) {
    serial_m = std::min(16, static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 3);
  }

  TestReport report{.alpha = config.alpha, .bit_count = n, .results = {}};
  auto add = [&](std::string name, double statistic, std::vector<double> ps) {
    const double p = *std::min_element(ps.begin(), ps.end());
    report.results.push_back({std::move(name), statistic, p, std::move(ps), p >= config.alpha});
  };

  monobit(bits);  // length checks
  const auto mono = detail::monobit(bits);
  add("monobit", mono.statistic, {mono.p_value});

  block_frequency(bits, block_len);
  const auto blk = detail::block_frequency(bits, block_len);
  add("block_frequency", blk.statistic, {blk.p_value});

  const auto run = detail::runs(bits);
  add("runs", run.statistic, {run.p_value});

  const auto longest = detail::longest_run_of_ones(bits);
  add("longest_run_of_ones", longest.statistic, {longest.p_value});

  const auto cusum = detail::cumulative_sums(bits, config.cusum_direction);
  add(config.cusum_direction == Direction::kForward ? "cumulative_sums_forward"
                                                    : "cumulative_sums_backward",
      cusum.statistic, {cusum.p_value});

  serial(bits, serial_m);
  const auto ser = detail::serial(bits, serial_m);
  add("serial", ser.del1, {ser.p.p1, ser.p.p2});
  return report;
}

void export_ascii_bits(const BitVector& bits, const std::filesystem::path& path) {
  std::string text;
  text.reserve(bits.size() + bits.size() / 64 + 1);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    text += bits[i] ? '1' : '0';
    if ((i + 1) % 64 == 0) text += '\n';
  }
  if (bits.size() % 64 != 0) text += '\n';
  io::write_file_atomic(path, text);
}

BitVector import_ascii_bits(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  BitVector bits;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const char c = static_cast<char>(bytes[i]);
    if (c == '0' || c == '1') {
      bits.push_back(c == '1');
    } else if (c != '\n' && c != '\r') {
      throw FormatError(i, "unexpected character in ASCII bit file");
    }
  }
  return bits;
}

}  // namespace qrng::randtest
