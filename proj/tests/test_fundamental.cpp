#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helmbranch/fundamental.hpp"

using namespace helmbranch;
constexpr double pi = std::numbers::pi;

namespace {

// psi_r(lambda) from the general Bessel form, evaluated with libstdc++ special functions
double psi_reference(double lambda, double r, int dim) {
  if (lambda == 0.0) return 1.0;
  const double nu = 0.5 * (dim - 2);
  const double s = std::sqrt(std::abs(lambda)) * r;
  if (lambda < 0.0) return 2.0 / std::tgamma(nu) * std::pow(0.5 * s, nu) * std::cyl_bessel_k(nu, s);
  return -pi / std::tgamma(nu) * std::pow(0.5 * s, nu) * std::cyl_neumann(nu, s);
}

}  // namespace

TEST(Fundamental, PsiRatioExamples) {
  EXPECT_NEAR(psi_ratio(-4.0, 0.5, 3), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(psi_ratio(-4.0, 0.5, 3), 0.3678794, 1e-7);
  EXPECT_DOUBLE_EQ(psi_ratio(0.0, 2.7, 5), 1.0);
  EXPECT_NEAR(psi_ratio(4.0, pi / 4, 3), 0.0, 1e-15);
  EXPECT_THROW(psi_ratio(1.0, 0.0, 3), Error);
  EXPECT_THROW(psi_ratio(1.0, -1.0, 3), Error);
}

TEST(Fundamental, PsiLambdaExamples) {
  EXPECT_NEAR(psi_lambda(1.0, 0.0, 3), 1.0 / (4 * pi), 1e-15);
  EXPECT_NEAR(psi_lambda(1.0, 0.0, 3), 0.0795775, 1e-7);
  EXPECT_NEAR(psi_lambda(pi, 1.0, 3), -1.0 / (4 * pi * pi), 1e-15);
  EXPECT_NEAR(psi_lambda(pi, 1.0, 3), -0.0253303, 1e-7);
  EXPECT_NEAR(psi_lambda(0.5, -4.0, 3), std::exp(-1.0) / (2 * pi), 1e-15);
  EXPECT_NEAR(psi_lambda(0.5, -4.0, 3), 0.0585498, 1e-7);
  try {
    psi_lambda(0.0, 1.0, 3);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(Fundamental, MatchesGeneralBesselForm) {
  for (int dim : {3, 4, 5}) {
    for (double lambda : {-50.0, -3.0, -0.01, 0.01, 0.7, 5.0, 80.0}) {
      for (double r : {1e-4, 0.05, 0.3, 1.0, 2.5, 7.0}) {
        const double want = psi_reference(lambda, r, dim);
        EXPECT_NEAR(psi_ratio(lambda, r, dim), want, 1e-11 * std::max(1.0, std::abs(want)))
            << dim << " " << lambda << " " << r;
      }
    }
  }
}

TEST(Fundamental, NewtonKernelNormalisation) {
  // |S^{N-1}| Gamma(nu)/(4 pi^{N/2}) (N-2) = 1, the flux of Psi_0 through a sphere
  for (int dim : {3, 4, 5}) {
    EXPECT_NEAR(sphere_area(dim) * newton_coefficient(dim) * (dim - 2), 1.0, 1e-14);
  }
  EXPECT_NEAR(newton_coefficient(4), 1.0 / (4 * pi * pi), 1e-16);
}

TEST(Fundamental, Constants) {
  EXPECT_DOUBLE_EQ(gamma_const(3), 1.0);
  EXPECT_NEAR(gamma_const(4), 1.23437914888464932484, 1e-10);
  EXPECT_NEAR(gamma_const(5), pi / 2, 1e-10);
  EXPECT_NEAR(y_first_zero(3), pi / 2, 1e-12);
  EXPECT_NEAR(lambda_q(3, 2.0), 0.6168502750680849, 1e-12);
  EXPECT_NEAR(lambda_q(3, pi / 2), 1.0, 1e-12);
  EXPECT_NEAR(lambda_q(4, 1.0), 4.82743000655333589547, 1e-9);
  EXPECT_THROW(lambda_q(3, 0.0), Error);
  EXPECT_THROW(gamma_const(6), Error);
}

TEST(Fundamental, Epsilon0) {
  EXPECT_NEAR(epsilon0(1.0, 0.5, 1.0, 3), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(epsilon0(1e-14, 1e-14, 3.0, 3), 1.0, 1e-6);
  EXPECT_NEAR(epsilon0(4.0, 0.25, 0.5, 3), std::exp(-1.0), 1e-15);
  try {
    epsilon0(1.0, 4.0, 1.0, 3);  // sqrt(4) * 1 > pi/2
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::threshold);
    EXPECT_NE(std::string(e.what()).find("lambda_Q"), std::string::npos);
  }
}

TEST(Fundamental, Zeta) {
  EXPECT_EQ(zeta_estimate(3), 0.0);
  EXPECT_GT(zeta_estimate(4), 0.0);
  EXPECT_GT(zeta_estimate(5), 0.0);
}

// Kernel inequality suites on 10^4 samples per dimension
class KernelInequalities : public ::testing::TestWithParam<int> {};

TEST_P(KernelInequalities, NonpositiveLambdaBelowNewtonKernel) {
  const int dim = GetParam();
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ul(-100.0, 0.0), ur(0.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = ul(gen);
    const double r = std::max(ur(gen), 1e-6);
    const double v = psi_lambda(r, lambda, dim);
    const double s = std::sqrt(-lambda) * r;
    if (s < 700.0) {
      ASSERT_GT(v, 0.0) << lambda << " " << r;
    }
    ASSERT_LE(v, psi0(r, dim) * (1 + 1e-14));
  }
}

TEST_P(KernelInequalities, PositiveLambdaInsideFirstZero) {
  const int dim = GetParam();
  const double y = y_first_zero(dim), g = gamma_const(dim);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> ul(1e-6, 100.0), uf(1e-6, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = ul(gen);
    const double r = uf(gen) * y / std::sqrt(lambda) * (1 - 1e-9);
    const double v = psi_lambda(r, lambda, dim);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, g * psi0(r, dim) * (1 + 1e-12));
  }
}

TEST_P(KernelInequalities, UniformLowerBound) {
  const int dim = GetParam();
  const double lm = 4.0, lp = 0.5, r0 = 1.0;
  const double eps = epsilon0(lm, lp, r0, dim);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ul(-lm, lp), ur(1e-6, r0);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = ul(gen), r = ur(gen);
    ASSERT_GE(psi_lambda(r, lambda, dim), eps * psi0(r, dim) * (1 - 1e-12));
  }
}

TEST_P(KernelInequalities, FarFieldBound) {
  const int dim = GetParam();
  const double g = gamma_const(dim), z = zeta_estimate(dim);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> ul(1e-6, 100.0), ur(1e-6, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = ul(gen), r = ur(gen);
    const double bound = g * psi0(r, dim) + z * std::pow(lambda, (dim - 3) / 4.0) * std::pow(r, (1.0 - dim) / 2);
    ASSERT_LE(std::abs(psi_lambda(r, lambda, dim)), bound * (1 + 1e-12)) << lambda << " " << r;
  }
}

TEST_P(KernelInequalities, ContinuousAcrossZero) {
  const int dim = GetParam();
  for (double r : {0.01, 0.5, 1.0, 3.0, 10.0}) {
    for (int i = 0; i <= 200; ++i) {
      const double lambda = -10.0 + 0.1 * i;
      const double jump = std::abs(psi_lambda(r, lambda + 1e-6, dim) - psi_lambda(r, lambda, dim));
      ASSERT_LT(jump, 1e-6) << lambda << " " << r;
    }
  }
}

TEST_P(KernelInequalities, SigmaDerivativeMatchesDifferences) {
  const int dim = GetParam();
  for (double sigma : {-3.0, -0.7, -0.05, 0.05, 0.4, 1.3}) {
    for (double r : {0.1, 0.9, 2.0}) {
      const double e = 1e-6;
      const double fd = (psi_ratio(lambda_of_sigma(sigma + e), r, dim) - psi_ratio(lambda_of_sigma(sigma - e), r, dim)) / (2 * e);
      EXPECT_NEAR(dpsi_ratio_dsigma(sigma, r, dim), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
  // right-sided derivative at sigma = 0
  const double e = 1e-7;
  const double right = (psi_ratio(lambda_of_sigma(e), 0.8, dim) - 1.0) / e;
  EXPECT_NEAR(dpsi_ratio_dsigma(0.0, 0.8, dim), right, 1e-5);
}

TEST_P(KernelInequalities, RadialDerivativeMatchesDifferences) {
  const int dim = GetParam();
  for (double lambda : {-2.0, 0.0, 0.6}) {
    for (double r : {0.2, 1.0, 2.9}) {
      const double e = 1e-6 * r;
      const double fd = (psi_lambda(r + e, lambda, dim) - psi_lambda(r - e, lambda, dim)) / (2 * e);
      EXPECT_NEAR(psi_lambda_dr(r, lambda, dim), fd, 1e-7 * std::abs(fd));
    }
  }
}

TEST_P(KernelInequalities, RegularSolutionSolvesOde) {
  const int dim = GetParam();
  for (double lambda : {-2.0, 0.0, 0.6}) {
    for (double r : {0.3, 1.9, 2.5, 6.0}) {
      // u'' + (N-1)/r u' + lambda u = 0 by second differences
      const double e = 1e-4;
      const double um = regular_solution(r - e, lambda, dim).value;
      const auto u0 = regular_solution(r, lambda, dim);
      const double upl = regular_solution(r + e, lambda, dim).value;
      const double d2 = (upl - 2 * u0.value + um) / (e * e);
      const double d1 = (upl - um) / (2 * e);
      EXPECT_NEAR(d1, u0.derivative, 1e-7 * std::max(1.0, std::abs(d1)));
      EXPECT_NEAR(d2 + (dim - 1) / r * u0.derivative + lambda * u0.value, 0.0, 1e-6 * std::max(1.0, std::abs(u0.value)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, KernelInequalities, ::testing::Values(3, 4, 5));

TEST(Fundamental, RegularSolutionClosedFormN3) {
  for (double r : {0.1, 1.0, 2.0, 5.0}) {
    EXPECT_NEAR(regular_solution(r, 1.0, 3).value, std::sin(r) / r, 1e-13);
    EXPECT_NEAR(regular_solution(r, -1.0, 3).value, std::sinh(r) / r, 1e-13 * std::sinh(r) / r);
  }
}
