#pragma once

// Joint null asymptotics of (Q1, Q2): canonical correlations between the
// standardized digit and sum-invariance vectors, the Laplace transform and
// Gaussian construction of the limit pair V = (V1, V2), the density of the
// degenerate limit T, and the chi-square tail of Q_Delta.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "benford/distributions.hpp"
#include "benford/errors.hpp"
#include "benford/random.hpp"
#include "benford/special_functions.hpp"

namespace benford {

struct CanonicalStructure {
  using Vector8 = Eigen::Matrix<double, 8, 1>;
  using Matrix17 = Eigen::Matrix<double, 17, 17>;

  Vector8 rho;  // descending
  double cor_V = 0.0;
  Matrix17 Sigma;  // covariance of (Z1, Z2), digit block first
};

namespace detail {

inline constexpr double kEigenFloor = 1e-14;

/// Symmetric inverse square root through an eigendecomposition.
template <int N>
Eigen::Matrix<double, N, N> inverse_sqrt(const Eigen::Matrix<double, N, N>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(m);
  Eigen::Matrix<double, N, 1> d = es.eigenvalues();
  for (int i = 0; i < N; ++i) d(i) = 1.0 / std::sqrt(std::max(d(i), kEigenFloor));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::Matrix<double, 8, 9> whitened_cross_covariance() {
  const auto& m = benford_moments();
  return inverse_sqrt<8>(m.sigma1) * m.sigma12 * inverse_sqrt<9>(m.sigma2);
}

}  // namespace detail

/// Singular values of Sigma1^{-1/2} Sigma12 Sigma2^{-1/2}, descending.
inline Eigen::Matrix<double, 8, 1> canonical_correlations() {
  const Eigen::Matrix<double, 8, 9> k = detail::whitened_cross_covariance();
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(k);
  return svd.singularValues();
}

/// Same quantities as square roots of the eigenvalues of K K^T.
inline Eigen::Matrix<double, 8, 1> canonical_correlations_by_eigen() {
  const Eigen::Matrix<double, 8, 9> k = detail::whitened_cross_covariance();
  const Eigen::Matrix<double, 8, 8> kkt = k * k.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(kkt);
  Eigen::Matrix<double, 8, 1> out;
  for (int i = 0; i < 8; ++i) out(i) = std::sqrt(std::max(es.eigenvalues()(7 - i), 0.0));
  return out;
}

inline const CanonicalStructure& canonical_structure() {
  static const CanonicalStructure cs = [] {
    CanonicalStructure out;
    out.rho = canonical_correlations();
    out.cor_V = std::numbers::sqrt2 / 12.0 * out.rho.squaredNorm();
    const auto& m = benford_moments();
    out.Sigma.setZero();
    out.Sigma.topLeftCorner<8, 8>() = m.sigma1;
    out.Sigma.topRightCorner<8, 9>() = m.sigma12;
    out.Sigma.bottomLeftCorner<9, 8>() = m.sigma12.transpose();
    out.Sigma.bottomRightCorner<9, 9>() = m.sigma2;
    return out;
  }();
  return cs;
}

/// E[V1 V2] = r1 r2 + 2 sum rho_j^2.
inline double expected_v1v2() {
  return 72.0 + 2.0 * canonical_structure().rho.squaredNorm();
}

/// L_V(t1, t2) = E[exp(-t1 V1 - t2 V2)].
inline double laplace_V(double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw DomainError("laplace_V: arguments must be >= 0");
  const auto& rho = canonical_structure().rho;
  double log_l = -0.5 * std::log1p(2.0 * t2);
  for (int j = 0; j < 8; ++j) {
    const double r2 = rho(j) * rho(j);
    log_l -= 0.5 * std::log1p(2.0 * t1 + 2.0 * t2 + 4.0 * (1.0 - r2) * t1 * t2);
  }
  return std::exp(log_l);
}

/// B draws of (V1, V2) from the Gaussian construction; draw b uses
/// substream b of `seed`.
inline std::vector<std::pair<double, double>> sample_V(std::size_t B, std::uint64_t seed) {
  if (B == 0) throw DomainError("sample_V: B must be at least 1");
  const auto& rho = canonical_structure().rho;
  std::array<double, 8> tilt{};
  for (int j = 0; j < 8; ++j) tilt[j] = std::sqrt(std::max(0.0, 1.0 - rho(j) * rho(j)));
  std::vector<std::pair<double, double>> out(B);
  for (std::size_t b = 0; b < B; ++b) {
    RandomStream rng(seed, b, Lane::gaussian);
    double v1 = 0.0;
    double v2 = 0.0;
    for (int j = 0; j < 8; ++j) {
      const double z1 = rng.normal();
      const double z2 = rho(j) * z1 + tilt[j] * rng.normal();
      v1 += z1 * z1;
      v2 += z2 * z2;
    }
    const double extra = rng.normal();
    v2 += extra * extra;
    out[b] = {v1, v2};
  }
  return out;
}

/// f_T(x1, x2) = x1^3 exp(-x2 / 2) / (96 sqrt(2 pi) sqrt(x2 - x1)), 0 < x1 < x2.
inline double density_T(double x1, double x2) {
  if (!(x1 > 0.0) || !(x2 > x1) || !std::isfinite(x2)) {
    throw DomainError("density_T: requires 0 < x1 < x2");
  }
  return x1 * x1 * x1 * std::exp(-0.5 * x2) /
         (96.0 * std::sqrt(2.0 * std::numbers::pi) * std::sqrt(x2 - x1));
}

/// cor(T1, T2) = sqrt(8 / 9) for T2 - T1 independent of T1 ~ chi2_8, with
/// T2 - T1 ~ chi2_1.
inline double implied_t_correlation() { return std::sqrt(8.0 / 9.0); }

/// chi2_1 upper tail, used for Q_Delta; 1 for t <= 0.
inline double qdelta_tail_p(double t) { return special::chi2_sf(t, 1); }

}  // namespace benford
