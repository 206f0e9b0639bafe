#pragma once

// Regularized incomplete gamma and chi-square helpers shared by the
// asymptotic p-values and the density of the simplified joint law.

#include <cmath>
#include <limits>

#include "benford/errors.hpp"

namespace benford::special {

namespace detail {

inline constexpr int kMaxIterations = 1000;
inline constexpr double kEps = 1e-16;
inline constexpr double kTiny = 1e-300;

// Series for P(a, x), converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), used for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
    throw DomainError("gamma_p: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly in the tail so small probabilities keep full relative accuracy.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
    throw DomainError("gamma_q: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Upper-tail probability of the chi-square law with `dof` degrees of
/// freedom. Returns 1 for x <= 0.
inline double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

inline double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi2_cdf: dof must be positive");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

inline double chi2_pdf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi2_pdf: dof must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (dof < 2.0) return std::numeric_limits<double>::infinity();
    return dof == 2.0 ? 0.5 : 0.0;
  }
  const double k = 0.5 * dof;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) -
                  std::lgamma(k));
}

}  // namespace benford::special
