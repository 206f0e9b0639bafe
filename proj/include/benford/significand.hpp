#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "benford/errors.hpp"

namespace benford {

/// Digit counts above this are treated as continuous ("full precision").
inline constexpr int kDefaultMaxDigits = 6;

/// Number of significant digits written for an observation, or FULL when it
/// carries more than the configured cap K.
class DigitCount {
 public:
  constexpr DigitCount() = default;

  static constexpr DigitCount full() { return DigitCount{}; }
  static constexpr DigitCount of(int k) {
    if (k < 1) throw DomainError("digit count must be positive");
    DigitCount c;
    c.k_ = k;
    return c;
  }

  constexpr bool is_full() const { return k_ == 0; }
  /// Finite digit count; undefined for FULL.
  constexpr int value() const { return k_; }

  friend constexpr bool operator==(DigitCount, DigitCount) = default;
  friend constexpr auto operator<=>(DigitCount a, DigitCount b) {
    // FULL sorts after every finite count.
    const int ka = a.is_full() ? std::numeric_limits<int>::max() : a.k_;
    const int kb = b.is_full() ? std::numeric_limits<int>::max() : b.k_;
    return ka <=> kb;
  }

 private:
  int k_ = 0;
};

namespace detail {

inline constexpr std::array<double, 23> kPow10 = {
    1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
    1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};

// Exact for |e| <= 22.
inline double pow10(int e) {
  if (e >= 0 && e < static_cast<int>(kPow10.size())) return kPow10[e];
  return std::pow(10.0, e);
}

inline constexpr double kBoundaryTolerance = 1e-12;

}  // namespace detail

/// Significand S(x) in [1, 10): |x| with the decimal point shifted.
///
/// Scales |x| by an exact power of ten instead of evaluating
/// 10^frac(log10|x|), then repairs the decade when log10 landed on the wrong
/// side of an integer. Results within 1e-12 (relative) of 10 fold to 1.
inline double significand(double x) {
  if (x == 0.0 || !std::isfinite(x)) {
    throw ZeroOrNonFiniteError("significand: value must be finite and non-zero");
  }
  const double a = std::fabs(x);
  const int e = static_cast<int>(std::floor(std::log10(a)));
  double s;
  if (e >= 0) {
    s = e <= 22 ? a / detail::kPow10[e] : a / std::pow(10.0, e);
  } else if (-e <= 22) {
    s = a * detail::kPow10[-e];
  } else {
    // Split the scaling so neither factor under/overflows.
    s = (a * 1e22) * std::pow(10.0, -e - 22);
  }
  if (s >= 10.0) s /= 10.0;
  if (s < 1.0) s *= 10.0;
  if (s >= 10.0 * (1.0 - detail::kBoundaryTolerance)) s = 1.0;
  return s;
}

/// First significant digit D(x) in {1..9}.
inline int first_digit(double x) {
  const int d = static_cast<int>(significand(x));
  return std::clamp(d, 1, 9);
}

/// Fractional significand <S(x)> = S(x) - D(x), in [0, 1).
inline double fractional_significand(double x) {
  const double s = significand(x);
  return s - std::clamp(std::floor(s), 1.0, 9.0);
}

/// One observation reduced to its significand.
struct SignificandRecord {
  double significand = 1.0;  // in [1, 10)
  int first_digit = 1;       // floor(significand)
  double frac = 0.0;         // significand - first_digit
  DigitCount digits;         // written significant digits, or FULL
  std::string raw;           // input text, empty when built from a number

  /// Builds a record from a value already in [1, 10).
  static SignificandRecord from_significand(double s,
                                            DigitCount digits = DigitCount::full(),
                                            std::string raw = {}) {
    if (!(s >= 1.0 && s < 10.0)) {
      throw DomainError("significand must lie in [1, 10)");
    }
    SignificandRecord r;
    r.significand = s;
    r.first_digit = std::clamp(static_cast<int>(s), 1, 9);
    r.frac = s - r.first_digit;
    r.digits = digits;
    r.raw = std::move(raw);
    return r;
  }

  static SignificandRecord from_value(double x) {
    return from_significand(benford::significand(x));
  }
};

/// Parses a decimal string, keeping the number of significant digits as
/// written. Trailing zeros of the mantissa count ("3.140" has four digits);
/// leading zeros do not. Counts above `max_digits` become FULL.
inline SignificandRecord parse_decimal(std::string_view text,
                                       int max_digits = kDefaultMaxDigits) {
  if (max_digits < 1) throw DomainError("max_digits must be positive");
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw ParseError("empty number");

  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;

  std::string mantissa;  // mantissa digits in order, point removed
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c >= '0' && c <= '9') {
      mantissa.push_back(c);
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (mantissa.empty()) throw ParseError("no digits in '" + std::string(text) + "'");

  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') {
      throw ParseError("unexpected character in '" + std::string(text) + "'");
    }
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    const std::size_t exp_start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == exp_start || i != s.size()) {
      throw ParseError("malformed exponent in '" + std::string(text) + "'");
    }
  }

  const std::size_t first_nonzero = mantissa.find_first_not_of('0');
  if (first_nonzero == std::string::npos) {
    throw ZeroValueError("value is zero: '" + std::string(text) + "'");
  }
  const std::string significant = mantissa.substr(first_nonzero);

  // "d.ddd" parses directly to the correctly rounded significand.
  std::string normalized;
  normalized.reserve(significant.size() + 1);
  normalized.push_back(significant[0]);
  if (significant.size() > 1) {
    normalized.push_back('.');
    normalized.append(significant, 1, std::string::npos);
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(normalized.data(), normalized.data() + normalized.size(), value);
  if (ec != std::errc{} || ptr != normalized.data() + normalized.size()) {
    throw ParseError("cannot parse '" + std::string(text) + "'");
  }
  if (value >= 10.0) value = 1.0;  // only reachable via rounding of 9.999...

  const int count = static_cast<int>(std::min<std::size_t>(significant.size(), 1u << 20));
  const DigitCount digits = count > max_digits ? DigitCount::full() : DigitCount::of(count);
  return SignificandRecord::from_significand(value, digits, std::string(s));
}

/// Counts n_k of observations with k significant digits, k = 1..K.
struct TruncationProfile {
  int max_digits = kDefaultMaxDigits;  // K
  std::vector<std::size_t> counts;     // counts[k-1] = n_k
  std::size_t n_full = 0;
  std::size_t n = 0;
  // Digit count attached to the i-th smallest observed significand. Empty
  // when the profile was built from counts alone.
  std::vector<DigitCount> ranked;

  bool any_discretized() const { return n_full < n; }
  bool has_ranks() const { return !ranked.empty(); }

  std::size_t count(int k) const {
    if (k < 1 || k > max_digits) throw DomainError("digit count outside 1..K");
    return counts[static_cast<std::size_t>(k - 1)];
  }

  /// Invariant n_full + sum_k n_k == n.
  bool consistent() const {
    std::size_t total = n_full;
    for (const auto c : counts) total += c;
    return total == n && static_cast<int>(counts.size()) == max_digits &&
           (ranked.empty() || ranked.size() == n);
  }

  static TruncationProfile from_counts(std::vector<std::size_t> counts, std::size_t n_full,
                                       int max_digits = kDefaultMaxDigits) {
    if (max_digits < 1) throw DomainError("K must be positive");
    if (static_cast<int>(counts.size()) > max_digits) {
      throw DomainError("more digit counts than K");
    }
    counts.resize(static_cast<std::size_t>(max_digits), 0);
    TruncationProfile p;
    p.max_digits = max_digits;
    p.counts = std::move(counts);
    p.n_full = n_full;
    p.n = n_full;
    for (const auto c : p.counts) p.n += c;
    return p;
  }

  /// Every observation carries exactly k digits.
  static TruncationProfile uniform(int k, std::size_t n, int max_digits = kDefaultMaxDigits) {
    if (k < 1 || k > max_digits) throw DomainError("digit count outside 1..K");
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_digits), 0);
    counts[static_cast<std::size_t>(k - 1)] = n;
    return from_counts(std::move(counts), 0, max_digits);
  }

  static TruncationProfile all_full(std::size_t n, int max_digits = kDefaultMaxDigits) {
    return from_counts({}, n, max_digits);
  }

  /// Profile of an observed sample, including the digit count of each order
  /// statistic (ties broken by digit count).
  static TruncationProfile from_sample(std::span<const SignificandRecord> sample,
                                       int max_digits = kDefaultMaxDigits) {
    std::vector<std::pair<double, DigitCount>> keyed;
    keyed.reserve(sample.size());
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_digits), 0);
    std::size_t n_full = 0;
    for (const auto& r : sample) {
      DigitCount d = r.digits;
      if (!d.is_full() && d.value() > max_digits) d = DigitCount::full();
      if (d.is_full()) {
        ++n_full;
      } else {
        ++counts[static_cast<std::size_t>(d.value() - 1)];
      }
      keyed.emplace_back(r.significand, d);
    }
    std::sort(keyed.begin(), keyed.end());
    auto p = from_counts(std::move(counts), n_full, max_digits);
    p.ranked.reserve(keyed.size());
    for (const auto& [s, d] : keyed) p.ranked.push_back(d);
    return p;
  }

  /// Stable text form used for cache keys and report echoes.
  std::string canonical() const {
    std::string out = "K=" + std::to_string(max_digits) + ";n=" + std::to_string(n) +
                      ";full=" + std::to_string(n_full) + ";counts=";
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(counts[k]);
    }
    if (has_ranks()) {
      out += ";ranked=";
      for (const auto d : ranked) out += d.is_full() ? 'F' : static_cast<char>('0' + d.value());
    }
    return out;
  }
};

/// Reads the line format: one decimal per line, blank lines and lines whose
/// first non-blank character is '#' are skipped. Errors carry line numbers.
inline std::vector<SignificandRecord> read_significands(std::istream& in,
                                                        int max_digits = kDefaultMaxDigits) {
  std::vector<SignificandRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    if (v.empty() || v.front() == '#') continue;
    try {
      out.push_back(parse_decimal(v, max_digits));
    } catch (const ZeroValueError& e) {
      throw ZeroValueError(e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

inline std::vector<SignificandRecord> read_significand_file(const std::string& path,
                                                            int max_digits = kDefaultMaxDigits) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_significands(in, max_digits);
}

inline std::vector<double> significands_of(std::span<const SignificandRecord> sample) {
  std::vector<double> s;
  s.reserve(sample.size());
  for (const auto& r : sample) s.push_back(r.significand);
  return s;
}

}  // namespace benford
