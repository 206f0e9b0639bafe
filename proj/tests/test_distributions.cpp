#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include "benford/distributions.hpp"

using namespace benford;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Benford density of S on [1, 10).
double benford_pdf(double s) { return kLog10e / s; }

template <class F>
double integrate(F f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// E[D^r <S>^s] by quadrature of the joint density C / (d + u).
double moment_by_quadrature(int r, int s) {
  double total = 0.0;
  for (int d = 1; d <= 9; ++d) {
    total += integrate(
        [&](double u) { return std::pow(d, r) * std::pow(u, s) * kLog10e / (d + u); }, 0.0,
        1.0);
  }
  return total;
}

}  // namespace

TEST(FirstDigit, LawSumsToOne) {
  double sum = 0.0;
  for (int d = 1; d <= 9; ++d) sum += first_digit_pmf(d);
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_NEAR(first_digit_pmf(1), 0.30103, 5e-6);
  EXPECT_THROW(first_digit_pmf(0), DomainError);
  EXPECT_THROW(first_digit_pmf(10), DomainError);
}

TEST(FracLaw, PdfIntegratesToOne) {
  EXPECT_NEAR(integrate([](double u) { return frac_pdf(u); }, 0.0, 1.0 - 1e-300), 1.0, 1e-10);
}

TEST(FracLaw, CdfMatchesSumOfLogs) {
  for (int i = 0; i < 1000; ++i) {
    const double u = i / 1000.0;
    double direct = 0.0;
    for (int d = 1; d <= 9; ++d) direct += std::log10((d + u) / d);
    EXPECT_NEAR(frac_cdf(u), direct, 1e-14);
    EXPECT_EQ(frac_cdf_unchecked(u), frac_cdf(u));
  }
  EXPECT_EQ(frac_cdf(0.0), 0.0);
  EXPECT_NEAR(frac_cdf(std::nextafter(1.0, 0.0)), 1.0, 1e-15);
}

TEST(FracLaw, CdfDerivativeIsPdf) {
  const double h = 1e-6;
  for (double u = 0.05; u < 0.95; u += 0.1) {
    EXPECT_NEAR((frac_cdf(u + h) - frac_cdf(u - h)) / (2 * h), frac_pdf(u), 1e-8);
  }
  EXPECT_NEAR(frac_pdf(0.0), 1.2286053, 5e-8);
}

TEST(FracLaw, DomainChecks) {
  EXPECT_THROW(frac_cdf(1.0), DomainError);
  EXPECT_THROW(frac_cdf(-0.1), DomainError);
  EXPECT_THROW(frac_pdf(1.0), DomainError);
  EXPECT_THROW(benford_cdf(0.5), DomainError);
  EXPECT_THROW(joint_cdf(10.0, 0.1), DomainError);
}

TEST(JointLaw, MarginalsAndConditionals) {
  EXPECT_NEAR(joint_cdf(9.5, 0.3), frac_cdf(0.3), 1e-15);
  EXPECT_NEAR(joint_cdf(3.2, 0.0), 0.0, 1e-15);
  for (int d = 1; d <= 9; ++d) {
    EXPECT_NEAR(conditional_frac_cdf(std::nextafter(1.0, 0.0), d), 1.0, 1e-12);
    const double mean = integrate([&](double u) { return u * conditional_frac_pdf(u, d); }, 0, 1);
    EXPECT_NEAR(conditional_frac_mean(d), mean, 1e-12);
    const double mass = integrate([&](double u) { return conditional_frac_pdf(u, d); }, 0, 1);
    EXPECT_NEAR(mass, 1.0, 1e-12);
  }
  EXPECT_NEAR(kLog10e / first_digit_pmf(1) - 1.0, 0.4426950, 5e-8);
}

TEST(SumInvariance, EachDigitCarriesC) {
  for (int d = 1; d <= 9; ++d) {
    const double e = integrate([](double s) { return s * benford_pdf(s); }, d, d + 1.0);
    EXPECT_NEAR(e, kLog10e, 1e-12) << "d=" << d;
  }
}

TEST(MixedMoments, MatchQuadrature) {
  for (int r = 0; r <= 4; ++r) {
    for (int s = 0; s <= 4; ++s) {
      EXPECT_NEAR(mixed_moment(r, s), moment_by_quadrature(r, s), 1e-10 * (1 + std::pow(9, r)))
          << "r=" << r << " s=" << s;
    }
  }
  EXPECT_NEAR(mixed_moment(0, 0), 1.0, 1e-14);
  EXPECT_THROW(mixed_moment(9, 0), DomainError);
}

TEST(MixedMoments, CorrelationAgreesWithMomentDefinition) {
  const double ed = moment_by_quadrature(1, 0);
  const double es = moment_by_quadrature(0, 1);
  const double vd = moment_by_quadrature(2, 0) - ed * ed;
  const double vs = moment_by_quadrature(0, 2) - es * es;
  const double cov = moment_by_quadrature(1, 1) - ed * es;
  EXPECT_NEAR(digit_frac_correlation(), cov / std::sqrt(vd * vs), 1e-12);
}

TEST(GeneralizedBenford, LimitsAndSpecialCases) {
  for (double u = 1.0; u < 10.0; u += 0.37) {
    EXPECT_NEAR(gb_cdf(u, 0.0), std::log10(u), 1e-15);
    EXPECT_NEAR(gb_cdf(u, 1e-6), std::log10(u), 1e-5);
    EXPECT_NEAR(gb_cdf(u, 1.0), (u - 1.0) / 9.0, 1e-14);  // uniform significand
    EXPECT_NEAR(gb_cdf(u, -1.0), (1.0 - 1.0 / u) / 0.9, 1e-14);
  }
  for (double u = 0.0; u < 1.0; u += 0.09) {
    EXPECT_NEAR(gb_frac_cdf(u, 0.0), frac_cdf(u), 1e-15);
    EXPECT_NEAR(gb_frac_cdf(u, 1.0), u, 1e-14);
    EXPECT_NEAR(gb_frac_cdf(u, 1e-7), frac_cdf(u), 1e-6);
    double via_cdf = 0.0;
    for (int d = 1; d <= 9; ++d) {
      via_cdf += gb_cdf(std::min(d + u, std::nextafter(10.0, 0.0)), 2.5) - gb_cdf(d, 2.5);
    }
    EXPECT_NEAR(gb_frac_cdf(u, 2.5), via_cdf, 1e-13);
  }
}

TEST(BenfordMoments, CovariancesMatchQuadrature) {
  const auto& m = benford_moments();
  for (int d = 1; d <= 9; ++d) {
    const double e2 = integrate([](double s) { return s * s * benford_pdf(s); }, d, d + 1.0);
    EXPECT_NEAR(m.sigma2(d - 1, d - 1), e2 - kLog10e * kLog10e, 1e-12);
  }
  EXPECT_NEAR((m.sigma1 * m.sigma1_inv - BenfordMoments::Matrix8::Identity()).norm(), 0.0, 1e-10);
  EXPECT_NEAR((m.sigma2 * m.sigma2_inv - BenfordMoments::Matrix9::Identity()).norm(), 0.0, 1e-10);
  Eigen::SelfAdjointEigenSolver<BenfordMoments::Matrix8> e1(m.sigma1);
  Eigen::SelfAdjointEigenSolver<BenfordMoments::Matrix9> e2(m.sigma2);
  const double cond1 = e1.eigenvalues().maxCoeff() / e1.eigenvalues().minCoeff();
  const double cond2 = e2.eigenvalues().maxCoeff() / e2.eigenvalues().minCoeff();
  EXPECT_NEAR(cond1, 46.3, 0.5);
  EXPECT_NEAR(cond2, 220.0, 5.0);
  EXPECT_GT(e1.eigenvalues().minCoeff(), 0.0);
}
