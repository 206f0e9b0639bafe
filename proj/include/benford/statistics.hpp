#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <bitset>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benford/distributions.hpp"
#include "benford/errors.hpp"
#include "benford/significand.hpp"

namespace benford {

/// Every statistic the library can compute. The first eight are functions of
/// one sample; G_KS and G_KU are min-p combinations that need a null pool.
enum class Statistic { q1, q2, q12, ks1, ku1, ks2, ku2, q_delta, g_ks, g_ku };

inline constexpr std::size_t kStatisticCount = 10;
inline constexpr std::size_t kSampleStatisticCount = 8;

inline constexpr std::array<Statistic, kStatisticCount> kAllStatistics = {
    Statistic::q1,  Statistic::q2,  Statistic::q12,     Statistic::ks1,  Statistic::ku1,
    Statistic::ks2, Statistic::ku2, Statistic::q_delta, Statistic::g_ks, Statistic::g_ku};

inline constexpr std::size_t index_of(Statistic s) { return static_cast<std::size_t>(s); }

inline constexpr bool is_combined(Statistic s) {
  return s == Statistic::g_ks || s == Statistic::g_ku;
}

inline std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::q1: return "Q1";
    case Statistic::q2: return "Q2";
    case Statistic::q12: return "Q12";
    case Statistic::ks1: return "KS1";
    case Statistic::ku1: return "KU1";
    case Statistic::ks2: return "KS2";
    case Statistic::ku2: return "KU2";
    case Statistic::q_delta: return "QDELTA";
    case Statistic::g_ks: return "G_KS";
    case Statistic::g_ku: return "G_KU";
  }
  return "?";
}

inline Statistic statistic_from_string(std::string name) {
  for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (name == "Q_DELTA" || name == "QD" || name == "Q_D") return Statistic::q_delta;
  if (name == "GKS") return Statistic::g_ks;
  if (name == "GKU") return Statistic::g_ku;
  for (const auto s : kAllStatistics) {
    if (to_string(s) == name) return s;
  }
  throw DomainError("unknown statistic '" + name + "'");
}

/// The fractional-significand component of a combined statistic.
inline Statistic combined_component(Statistic s) {
  if (s == Statistic::g_ks) return Statistic::ks2;
  if (s == Statistic::g_ku) return Statistic::ku2;
  throw DomainError(to_string(s) + " is not a combined statistic");
}

/// Sample means of the digit indicators (Z1) and of S 1(D = d) (Z2).
struct DigitVectorStats {
  std::array<double, 8> zbar1{};
  std::array<double, 9> zbar2{};
  std::array<std::size_t, 9> counts{};
  std::size_t n = 0;

  double frequency(int d) const { return static_cast<double>(counts[d - 1]) / n; }
};

namespace detail {

inline int digit_of(double s) { return std::clamp(static_cast<int>(s), 1, 9); }

inline DigitVectorStats finish_digit_stats(const std::array<std::size_t, 9>& counts,
                                           const std::array<double, 9>& sums, std::size_t n) {
  DigitVectorStats st;
  st.n = n;
  st.counts = counts;
  const double inv = 1.0 / static_cast<double>(n);
  for (int d = 0; d < 9; ++d) {
    if (d < 8) st.zbar1[d] = counts[d] * inv;
    st.zbar2[d] = sums[d] * inv;
  }
  return st;
}

}  // namespace detail

inline DigitVectorStats digit_stats(std::span<const double> significands) {
  if (significands.empty()) throw EmptySampleError();
  std::array<std::size_t, 9> counts{};
  std::array<double, 9> sums{};
  for (const double s : significands) {
    const int d = detail::digit_of(s) - 1;
    ++counts[d];
    sums[d] += s;
  }
  return detail::finish_digit_stats(counts, sums, significands.size());
}

inline DigitVectorStats digit_stats(std::span<const SignificandRecord> sample) {
  if (sample.empty()) throw EmptySampleError();
  std::array<std::size_t, 9> counts{};
  std::array<double, 9> sums{};
  for (const auto& r : sample) {
    ++counts[r.first_digit - 1];
    sums[r.first_digit - 1] += r.significand;
  }
  return detail::finish_digit_stats(counts, sums, sample.size());
}

/// First-digit Pearson chi-square, in its 9-cell form.
inline double q1(const DigitVectorStats& st) {
  const auto& p = first_digit_probabilities();
  const double n = static_cast<double>(st.n);
  double q = 0.0;
  for (int d = 0; d < 9; ++d) {
    const double expected = n * p[d];
    const double diff = static_cast<double>(st.counts[d]) - expected;
    q += diff * diff / expected;
  }
  return q;
}

/// Q1 as the quadratic form n (Z1 - mu1)' Sigma1^{-1} (Z1 - mu1).
inline double q1_quadratic(const DigitVectorStats& st) {
  const auto& m = benford_moments();
  BenfordMoments::Vector8 diff;
  for (int i = 0; i < 8; ++i) diff(i) = st.zbar1[i] - m.mu1(i);
  return static_cast<double>(st.n) * diff.dot(m.sigma1_inv * diff);
}

/// Hotelling statistic on the sum-invariance means.
inline double q2(const DigitVectorStats& st) {
  const auto& m = benford_moments();
  std::array<double, 9> diff;
  for (int i = 0; i < 9; ++i) diff[i] = st.zbar2[i] - m.C;
  double q = 0.0;
  for (int i = 0; i < 9; ++i) {
    double row = 0.0;
    for (int j = 0; j < 9; ++j) row += m.sigma2_inv(i, j) * diff[j];
    q += diff[i] * row;
  }
  return std::max(0.0, static_cast<double>(st.n) * q);
}

/// Q_Delta = Q2 - Q1; may be negative.
inline double q_delta(const DigitVectorStats& st) { return q2(st) - q1(st); }

/// Benford probability of first two digits (d1, d2).
inline double first_two_digits_pmf(int d1, int d2) {
  if (d1 < 1 || d1 > 9 || d2 < 0 || d2 > 9) throw DomainError("digits out of range");
  return std::log10(1.0 + 1.0 / (10 * d1 + d2));
}

/// Cell 0..89 of the first two digits of a significand. A value carrying one
/// digit (e.g. 3.0) reads as second digit 0.
inline int two_digit_cell(double s) {
  // The relative nudge absorbs products like 3.1 * 10 = 30.999...
  const int v = static_cast<int>(std::floor(s * 10.0 * (1.0 + 1e-12)));
  return std::clamp(v, 10, 99) - 10;
}

/// Two-digit Pearson statistic over the 90 (d1, d2) cells.
inline double q12(std::span<const double> significands) {
  if (significands.empty()) throw EmptySampleError();
  std::array<std::size_t, 90> counts{};
  for (const double s : significands) ++counts[two_digit_cell(s)];
  const double n = static_cast<double>(significands.size());
  double q = 0.0;
  for (int c = 0; c < 90; ++c) {
    const double expected = n * std::log10(1.0 + 1.0 / (10 + c));
    const double diff = static_cast<double>(counts[c]) - expected;
    q += diff * diff / expected;
  }
  return q;
}

/// Records carrying a single significant digit; their second digit is read
/// as 0 by q12.
inline std::size_t single_digit_records(std::span<const SignificandRecord> sample) {
  return static_cast<std::size_t>(std::count_if(sample.begin(), sample.end(), [](const auto& r) {
    return !r.digits.is_full() && r.digits.value() == 1;
  }));
}

/// Right-continuous ECDF distances from the uniform law for values already
/// transformed by the hypothesized CDF and sorted ascending:
/// A = max(i/n - F_(i)), B = max(F_(i) - (i-1)/n).
struct EcdfDistance {
  double a = 0.0;
  double b = 0.0;
  double ks() const { return std::max(a, b); }
  double kuiper() const { return a + b; }
};

inline EcdfDistance ecdf_distance_sorted(std::span<const double> transformed) {
  const double n = static_cast<double>(transformed.size());
  double a = -1.0;
  double b = -1.0;
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    const double f = transformed[i];
    a = std::max(a, (static_cast<double>(i) + 1.0) / n - f);
    b = std::max(b, f - static_cast<double>(i) / n);
  }
  return {a, b};
}

namespace detail {

inline EcdfDistance significand_distance(std::span<const double> significands) {
  if (significands.empty()) throw EmptySampleError();
  std::vector<double> t(significands.size());
  std::transform(significands.begin(), significands.end(), t.begin(),
                 [](double s) { return std::log10(s); });
  std::sort(t.begin(), t.end());
  return ecdf_distance_sorted(t);
}

inline EcdfDistance fraction_distance(std::span<const double> significands) {
  if (significands.empty()) throw EmptySampleError();
  std::vector<double> t(significands.size());
  std::transform(significands.begin(), significands.end(), t.begin(),
                 [](double s) { return s - detail::digit_of(s); });
  std::sort(t.begin(), t.end());
  for (auto& v : t) v = frac_cdf_unchecked(v);
  return ecdf_distance_sorted(t);
}

}  // namespace detail

inline double ks1(std::span<const double> s) { return detail::significand_distance(s).ks(); }
inline double ku1(std::span<const double> s) { return detail::significand_distance(s).kuiper(); }
inline double ks2(std::span<const double> s) { return detail::fraction_distance(s).ks(); }
inline double ku2(std::span<const double> s) { return detail::fraction_distance(s).kuiper(); }

/// Set of sample statistics to evaluate together.
using StatisticMask = std::bitset<kSampleStatisticCount>;

inline StatisticMask mask_of(std::span<const Statistic> stats) {
  StatisticMask m;
  for (const auto s : stats) {
    if (is_combined(s)) {
      m.set(index_of(combined_component(s)));
      m.set(index_of(Statistic::q_delta));
    } else {
      m.set(index_of(s));
    }
  }
  return m;
}

using StatisticValues = std::array<double, kSampleStatisticCount>;

/// Evaluates several statistics on one sample, sharing the digit pass and
/// sorting work. Keeps scratch buffers between calls; one instance per
/// thread.
class StatisticEvaluator {
 public:
  explicit StatisticEvaluator(StatisticMask mask) : mask_(mask) {}

  StatisticMask mask() const { return mask_; }

  StatisticValues operator()(std::span<const double> significands) {
    if (significands.empty()) throw EmptySampleError();
    StatisticValues out;
    out.fill(0.0);
    const bool need_digits = wants(Statistic::q1) || wants(Statistic::q2) ||
                             wants(Statistic::q_delta);
    if (need_digits) {
      const auto st = digit_stats(significands);
      const double v1 = q1(st);
      const double v2 = (wants(Statistic::q2) || wants(Statistic::q_delta)) ? q2(st) : 0.0;
      out[index_of(Statistic::q1)] = v1;
      out[index_of(Statistic::q2)] = v2;
      out[index_of(Statistic::q_delta)] = v2 - v1;
    }
    if (wants(Statistic::q12)) out[index_of(Statistic::q12)] = q12(significands);
    if (wants(Statistic::ks1) || wants(Statistic::ku1)) {
      scratch_.resize(significands.size());
      std::transform(significands.begin(), significands.end(), scratch_.begin(),
                     [](double s) { return std::log10(s); });
      std::sort(scratch_.begin(), scratch_.end());
      const auto d = ecdf_distance_sorted(scratch_);
      out[index_of(Statistic::ks1)] = d.ks();
      out[index_of(Statistic::ku1)] = d.kuiper();
    }
    if (wants(Statistic::ks2) || wants(Statistic::ku2)) {
      scratch_.resize(significands.size());
      std::transform(significands.begin(), significands.end(), scratch_.begin(),
                     [](double s) { return s - detail::digit_of(s); });
      std::sort(scratch_.begin(), scratch_.end());
      for (auto& v : scratch_) v = frac_cdf_unchecked(v);
      const auto d = ecdf_distance_sorted(scratch_);
      out[index_of(Statistic::ks2)] = d.ks();
      out[index_of(Statistic::ku2)] = d.kuiper();
    }
    return out;
  }

 private:
  bool wants(Statistic s) const { return mask_.test(index_of(s)); }

  StatisticMask mask_;
  std::vector<double> scratch_;
};

/// Value of one sample statistic.
inline double compute_statistic(Statistic s, std::span<const double> significands) {
  if (is_combined(s)) throw DomainError(to_string(s) + " needs a null pool");
  StatisticMask m;
  m.set(index_of(s));
  return StatisticEvaluator(m)(significands)[index_of(s)];
}

}  // namespace benford
