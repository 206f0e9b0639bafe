#pragma once

// Samplers for the Benford null, the manipulated-Benford model (Benford first
// digit glued to the fractional significand of an arbitrary law) and the
// classical mixture contamination model, plus digit discretization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "benford/distributions.hpp"
#include "benford/errors.hpp"
#include "benford/random.hpp"
#include "benford/significand.hpp"

namespace benford {

enum class Family { benford, lognormal, weibull, uniform, generalized_benford };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::benford: return "benford";
    case Family::lognormal: return "lognormal";
    case Family::weibull: return "weibull";
    case Family::uniform: return "uniform";
    case Family::generalized_benford: return "gb";
  }
  return "?";
}

inline Family family_from_string(const std::string& name) {
  if (name == "benford") return Family::benford;
  if (name == "lognormal") return Family::lognormal;
  if (name == "weibull") return Family::weibull;
  if (name == "uniform") return Family::uniform;
  if (name == "gb" || name == "generalized_benford") return Family::generalized_benford;
  throw ModelError("unknown family '" + name + "'");
}

/// Law of the contaminating variable X_B (or X_C in the mixture model).
///
/// Lognormal(alpha): log-scale standard deviation alpha, median 1.
/// Weibull(alpha): shape alpha, scale 1.
/// Uniform(alpha): uniform on [0, alpha).
/// GeneralizedBenford(alpha): significand CDF (u^alpha - 1)/(10^alpha - 1).
struct ManipulationModel {
  Family family = Family::benford;
  double alpha = 0.0;

  void validate() const {
    if (!std::isfinite(alpha)) throw ModelError("alpha must be finite");
    const bool needs_positive = family == Family::lognormal || family == Family::weibull ||
                                family == Family::uniform;
    if (needs_positive && !(alpha > 0.0)) {
      throw ModelError(to_string(family) + " requires alpha > 0");
    }
  }

  std::string describe() const {
    if (family == Family::benford) return "benford";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%g)", to_string(family).c_str(), alpha);
    return buf;
  }
};

/// 10^U clipped below 10.
inline double benford_significand(RandomStream& rng) {
  const double s = std::pow(10.0, rng.uniform());
  return s < 10.0 ? s : std::nextafter(10.0, 1.0);
}

inline std::vector<double> sample_benford(std::size_t n, RandomStream& rng) {
  std::vector<double> out(n);
  for (auto& s : out) s = benford_significand(rng);
  return out;
}

inline std::vector<double> sample_benford(std::size_t n, StreamKey key) {
  RandomStream rng(key, Lane::significand);
  return sample_benford(n, rng);
}

/// Inverse-CDF draw from Generalized Benford(alpha).
inline double sample_gb(double alpha, RandomStream& rng) {
  const double u = rng.uniform();
  if (std::fabs(alpha) < kGeneralizedBenfordZero) {
    const double s = std::pow(10.0, u);
    return s < 10.0 ? s : std::nextafter(10.0, 1.0);
  }
  // (1 + (10^a - 1) u)^(1/a) without cancellation near alpha = 0.
  const double s = std::exp(std::log1p(std::expm1(alpha * std::numbers::ln10) * u) / alpha);
  return std::clamp(s, 1.0, std::nextafter(10.0, 1.0));
}

/// One draw of the contaminating variable, returned as a raw value (not a
/// significand) except for the two significand-level families.
inline double draw_family_value(const ManipulationModel& model, RandomStream& rng) {
  switch (model.family) {
    case Family::benford:
      return benford_significand(rng);
    case Family::generalized_benford:
      return sample_gb(model.alpha, rng);
    case Family::lognormal:
      return std::exp(model.alpha * rng.normal());
    case Family::weibull:
      for (;;) {
        const double x = std::pow(-std::log1p(-rng.uniform()), 1.0 / model.alpha);
        if (x > 0.0 && std::isfinite(x)) return x;
      }
    case Family::uniform:
      for (;;) {
        const double x = model.alpha * rng.uniform();
        if (x > 0.0) return x;
      }
  }
  throw ModelError("unknown family");
}

inline double draw_family_significand(const ManipulationModel& model, RandomStream& rng) {
  return significand(draw_family_value(model, rng));
}

namespace detail {

inline const std::array<double, kDigits>& first_digit_cumulative() {
  static const std::array<double, kDigits> cum = [] {
    std::array<double, kDigits> c{};
    double acc = 0.0;
    for (int d = 1; d <= kDigits; ++d) {
      acc += first_digit_probabilities()[d - 1];
      c[d - 1] = acc;
    }
    c[kDigits - 1] = 1.0;
    return c;
  }();
  return cum;
}

}  // namespace detail

/// Categorical inverse CDF on the first-digit law.
inline int sample_first_digit(RandomStream& rng) {
  const double u = rng.uniform();
  const auto& cum = detail::first_digit_cumulative();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cum.begin(), kDigits - 1)) + 1;
}

/// D(X_A) + <S(X_B)> with X_A Benford and X_B from `model`. Digits and
/// fractions use separate streams.
inline std::vector<double> sample_manipulated(std::size_t n, const ManipulationModel& model,
                                              RandomStream& digit_rng, RandomStream& frac_rng) {
  model.validate();
  std::vector<double> out(n);
  for (auto& s : out) {
    const int d = sample_first_digit(digit_rng);
    const double sb = draw_family_significand(model, frac_rng);
    s = d + (sb - std::floor(sb));
  }
  return out;
}

inline std::vector<double> sample_manipulated(std::size_t n, const ManipulationModel& model,
                                              StreamKey key) {
  RandomStream digit_rng(key, Lane::digit);
  RandomStream frac_rng(key, Lane::fraction);
  return sample_manipulated(n, model, digit_rng, frac_rng);
}

/// Mixture (1 - lambda) Benford + lambda contaminant, observation by
/// observation. With lambda = 0 the output equals sample_benford(n, key).
inline std::vector<double> sample_contaminated(std::size_t n, double lambda,
                                               const ManipulationModel& contaminant,
                                               StreamKey key) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ModelError("lambda must lie in [0, 1]");
  contaminant.validate();
  RandomStream benford_rng(key, Lane::significand);
  RandomStream choice_rng(key, Lane::mixture);
  RandomStream contaminant_rng(key, Lane::contaminant);
  std::vector<double> out(n);
  for (auto& s : out) {
    const bool contaminated = lambda > 0.0 && choice_rng.uniform() < lambda;
    s = contaminated ? draw_family_significand(contaminant, contaminant_rng)
                     : benford_significand(benford_rng);
  }
  return out;
}

enum class DiscretizeMode { truncate, round };

inline std::string to_string(DiscretizeMode m) {
  return m == DiscretizeMode::truncate ? "truncate" : "round";
}

/// Reduces a significand to k significant digits. Truncation floors; rounding
/// is half away from zero, and a result that would reach 10 is clamped to the
/// largest k-digit significand (9.9...9).
inline double discretize(double s, int k, DiscretizeMode mode) {
  if (k < 1 || k > 17) throw DomainError("discretize: k must lie in 1..17");
  if (!(s >= 1.0 && s < 10.0)) throw DomainError("discretize: significand must lie in [1, 10)");
  const double scale = detail::pow10(k - 1);
  const double top = 10.0 * scale - 1.0;
  double m;
  if (mode == DiscretizeMode::truncate) {
    m = std::floor(s * scale);
    // The product may round across an integer; settle on the largest m with
    // m / scale <= s in double arithmetic.
    if ((m + 1.0) / scale <= s) m += 1.0;
    if (m / scale > s) m -= 1.0;
  } else {
    m = std::floor(s * scale + 0.5);
  }
  m = std::clamp(m, scale, top);
  return m / scale;
}

}  // namespace benford
