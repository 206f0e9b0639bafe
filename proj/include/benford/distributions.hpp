#pragma once

// Closed-form laws under the Benford hypothesis and the Generalized Benford
// family: significand, first digit, fractional significand, their joint and
// conditional laws, and mixed moments of (D, <S>).

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "benford/errors.hpp"

namespace benford {

/// C = log10(e); also E[S 1(D = d)] for every d under the Benford law.
inline constexpr double kLog10e = std::numbers::log10e;

inline constexpr int kDigits = 9;

namespace detail {

inline void require_unit_interval(double u, const char* fn) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError(std::string(fn) + ": u must lie in [0, 1)");
}

inline void require_significand(double u, const char* fn) {
  if (!(u >= 1.0 && u < 10.0)) throw DomainError(std::string(fn) + ": u must lie in [1, 10)");
}

inline void require_digit(int d, const char* fn) {
  if (d < 1 || d > 9) throw DomainError(std::string(fn) + ": digit must lie in 1..9");
}

// 9! = prod_{d=1..9} d.
inline constexpr double kFactorial9 = 362880.0;

}  // namespace detail

/// P(S <= u) = log10(u).
inline double benford_cdf(double u) {
  detail::require_significand(u, "benford_cdf");
  return std::log10(u);
}

/// P(D = d) = log10((d + 1) / d).
inline double first_digit_pmf(int d) {
  detail::require_digit(d, "first_digit_pmf");
  return std::log10(1.0 + 1.0 / d);
}

inline const std::array<double, kDigits>& first_digit_probabilities() {
  static const std::array<double, kDigits> p = [] {
    std::array<double, kDigits> out{};
    for (int d = 1; d <= kDigits; ++d) out[d - 1] = std::log10(1.0 + 1.0 / d);
    return out;
  }();
  return p;
}

/// CDF of <S>: sum_d log10((d + u) / d), evaluated as one log of the product.
inline double frac_cdf(double u) {
  detail::require_unit_interval(u, "frac_cdf");
  double prod = 1.0;
  for (int d = 1; d <= kDigits; ++d) prod *= d + u;
  return std::log10(prod / detail::kFactorial9);
}

/// Same as frac_cdf but without the domain check; inner loop of KS2/KU2.
inline double frac_cdf_unchecked(double u) noexcept {
  const double prod = (1.0 + u) * (2.0 + u) * (3.0 + u) * (4.0 + u) * (5.0 + u) *
                      (6.0 + u) * (7.0 + u) * (8.0 + u) * (9.0 + u);
  return std::log10(prod / detail::kFactorial9);
}

/// Density of <S>: sum_d C / (d + u).
inline double frac_pdf(double u) {
  detail::require_unit_interval(u, "frac_pdf");
  double sum = 0.0;
  for (int d = 1; d <= kDigits; ++d) sum += 1.0 / (d + u);
  return kLog10e * sum;
}

/// Joint CDF of (D, <S>) at (v, u): sum_{j <= floor(v)} log10((j + u) / j).
inline double joint_cdf(double v, double u) {
  detail::require_significand(v, "joint_cdf");
  detail::require_unit_interval(u, "joint_cdf");
  const int top = static_cast<int>(std::floor(v));
  double sum = 0.0;
  for (int j = 1; j <= top; ++j) sum += std::log10((j + u) / j);
  return sum;
}

/// CDF of <S> given D = d.
inline double conditional_frac_cdf(double u, int d) {
  detail::require_unit_interval(u, "conditional_frac_cdf");
  detail::require_digit(d, "conditional_frac_cdf");
  return std::log10((d + u) / d) / first_digit_pmf(d);
}

inline double conditional_frac_pdf(double u, int d) {
  detail::require_unit_interval(u, "conditional_frac_pdf");
  detail::require_digit(d, "conditional_frac_pdf");
  return kLog10e / (first_digit_pmf(d) * (d + u));
}

/// E[<S> | D = d] = C / p_d - d.
inline double conditional_frac_mean(int d) {
  detail::require_digit(d, "conditional_frac_mean");
  return kLog10e / first_digit_pmf(d) - d;
}

inline constexpr int kMaxMomentOrder = 8;

/// E[D^r <S>^s] in closed form. Orders are capped at 8; the inner alternating
/// binomial sum loses accuracy beyond that.
inline double mixed_moment(int r, int s) {
  if (r < 0 || s < 0 || r > kMaxMomentOrder || s > kMaxMomentOrder) {
    throw DomainError("mixed_moment: orders must lie in 0..8");
  }
  const auto& p = first_digit_probabilities();
  double leading = 0.0;
  double tail = 0.0;
  for (int d = 1; d <= kDigits; ++d) {
    const double w = std::pow(static_cast<double>(d), r + s);
    leading += w * p[d - 1];
    double inner = 0.0;
    double binom = 1.0;
    for (int j = 1; j <= s; ++j) {
      binom = binom * (s - j + 1) / j;
      const double sign = ((s - j) % 2 == 0) ? 1.0 : -1.0;
      inner += binom * sign * std::expm1(j * std::log1p(1.0 / d)) / j;
    }
    tail += w * inner;
  }
  const double sign_s = (s % 2 == 0) ? 1.0 : -1.0;
  return sign_s * leading + kLog10e * tail;
}

/// cor[D, <S>] under the Benford law (about 0.05636).
inline double digit_frac_correlation() {
  const double c = kLog10e;
  const double ed = mixed_moment(1, 0);
  const double var_d = mixed_moment(2, 0) - ed * ed;
  const double num = 45.0 * c - var_d - 9.0 * c * ed;
  const double den = std::sqrt(var_d * (var_d + 18.0 * c * ed - 81.0 * c * (c + 0.5)));
  return num / den;
}

/// |alpha| below this is treated as the Benford member of the family.
inline constexpr double kGeneralizedBenfordZero = 1e-8;

/// Significand CDF under Generalized Benford(alpha).
inline double gb_cdf(double u, double alpha) {
  detail::require_significand(u, "gb_cdf");
  if (std::fabs(alpha) < kGeneralizedBenfordZero) return std::log10(u);
  return std::expm1(alpha * std::log(u)) / std::expm1(alpha * std::numbers::ln10);
}

/// CDF of <S> under Generalized Benford(alpha).
inline double gb_frac_cdf(double u, double alpha) {
  detail::require_unit_interval(u, "gb_frac_cdf");
  if (std::fabs(alpha) < kGeneralizedBenfordZero) return frac_cdf(u);
  double sum = 0.0;
  for (int d = 1; d <= kDigits; ++d) {
    sum += std::pow(static_cast<double>(d), alpha) * std::expm1(alpha * std::log1p(u / d));
  }
  return sum / std::expm1(alpha * std::numbers::ln10);
}

/// Null moments of the digit indicator vector Z1 (d = 1..8) and of the
/// sum-invariance vector Z2 (d = 1..9), with their cross covariance.
struct BenfordMoments {
  using Vector8 = Eigen::Matrix<double, 8, 1>;
  using Vector9 = Eigen::Matrix<double, 9, 1>;
  using Matrix8 = Eigen::Matrix<double, 8, 8>;
  using Matrix9 = Eigen::Matrix<double, 9, 9>;
  using Matrix89 = Eigen::Matrix<double, 8, 9>;

  std::array<double, kDigits> p{};
  double C = kLog10e;
  Vector8 mu1;
  Vector9 mu2;
  Matrix8 sigma1;
  Matrix9 sigma2;
  Matrix89 sigma12;
  Matrix8 sigma1_inv;
  Matrix9 sigma2_inv;
};

/// Built once; immutable afterwards.
inline const BenfordMoments& benford_moments() {
  static const BenfordMoments m = [] {
    BenfordMoments out;
    out.p = first_digit_probabilities();
    const double c = out.C;
    for (int i = 0; i < 8; ++i) {
      out.mu1(i) = out.p[i];
      for (int j = 0; j < 8; ++j) {
        out.sigma1(i, j) = (i == j ? out.p[i] : 0.0) - out.p[i] * out.p[j];
      }
      for (int j = 0; j < 9; ++j) {
        out.sigma12(i, j) = (i == j ? c : 0.0) - c * out.p[i];
      }
    }
    for (int i = 0; i < 9; ++i) {
      out.mu2(i) = c;
      for (int j = 0; j < 9; ++j) {
        out.sigma2(i, j) = (i == j ? c * (i + 1 + 0.5) : 0.0) - c * c;
      }
    }
    out.sigma1_inv = out.sigma1.llt().solve(BenfordMoments::Matrix8::Identity());
    out.sigma2_inv = out.sigma2.llt().solve(BenfordMoments::Matrix9::Identity());
    return out;
  }();
  return m;
}

}  // namespace benford
