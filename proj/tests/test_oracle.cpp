#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helmbranch/oracle.hpp"

using namespace helmbranch;

namespace {

RadialProfile empty_profile(double lambda, int dim = 3) {
  RadialProfile prof;
  prof.q = [](double) { return 0.0; };
  prof.R = 1.0;
  prof.N = dim;
  prof.lambda = lambda;
  return prof;
}

RadialProfile ball_profile(double lambda, int dim = 3) {
  if (dim == 3) return RadialProfile::from(WeightProfile<3>::ball(1.0), 4.0, lambda);
  if (dim == 4) return RadialProfile::from(WeightProfile<4>::ball(1.0), 3.0, lambda);
  return RadialProfile::from(WeightProfile<5>::ball(1.0), 3.0, lambda);
}

// centre values u(0) for N = 3, Q = 1_{B_1}, p = 4, computed offline with an independent
// collocation solver and frozen here
constexpr double kCentreMinusOne = 4.585178411766893;
constexpr double kCentreZero = 2.162132772221937;
constexpr double kCentreHalfQ = 2.5053422610397353;

}  // namespace

TEST(RadialIntegrate, HomogeneousClosedForms) {
  for (double r_out : {0.5, 2.0, 4.0}) {
    auto prof = empty_profile(-1.0);
    prof.r_out = r_out;
    auto s = radial_integrate(prof, 1.0);
    EXPECT_NEAR(s.u, std::sinh(r_out) / r_out, 1e-9 * std::sinh(r_out) / r_out);
    prof = empty_profile(1.0);
    prof.r_out = r_out;
    s = radial_integrate(prof, 2.0);
    EXPECT_NEAR(s.u, 2.0 * std::sin(r_out) / r_out, 1e-9);
    EXPECT_NEAR(s.du, 2.0 * (std::cos(r_out) / r_out - std::sin(r_out) / (r_out * r_out)), 1e-9);
    prof = empty_profile(0.0);
    prof.r_out = r_out;
    s = radial_integrate(prof, 1.5);
    EXPECT_NEAR(s.u, 1.5, 1e-12);
    EXPECT_LE(std::abs(s.du), 1e-12);
  }
}

TEST(RadialIntegrate, DivergenceFlag) {
  // the regular solution grows like e^{10 r} / r and passes the blow-up cap
  auto prof = empty_profile(-100.0);
  prof.r_out = 4.0;
  EXPECT_TRUE(radial_integrate(prof, 1.0).diverged);
  EXPECT_TRUE(std::isnan(matching_defect(prof, 1.0)));
  EXPECT_THROW(radial_integrate(prof, -1.0), Error);
}

TEST(MatchingDefect, HomogeneousBasis) {
  // for Q = 0 the state is a phi, whose defect is W(Psi, a phi) = a
  for (int dim : {3, 4, 5}) {
    for (double lambda : {-1.0, 0.0, 1.0}) {
      for (double a : {0.5, 2.0}) {
        EXPECT_NEAR(matching_defect(empty_profile(lambda, dim), a), a, 1e-8 * a) << dim << " " << lambda;
      }
    }
  }
  // the decaying profile itself carries no defect
  const auto prof = empty_profile(-1.0);
  const double r = 3.0;
  RadialState s{r, std::exp(-r) / r, -std::exp(-r) * (1 + r) / (r * r), 0.0, false};
  EXPECT_NEAR(defect_of_state(prof, s), 0.0, 1e-15);
}

TEST(RadialShoot, GoldenCentreValues) {
  EXPECT_NEAR(radial_shoot(ball_profile(-1.0)).a_star, kCentreMinusOne, 1e-8);
  EXPECT_NEAR(radial_shoot(ball_profile(0.0)).a_star, kCentreZero, 1e-8);
  const double half = 0.5 * lambda_q(3, 2.0);
  EXPECT_NEAR(half, 0.30842513753404244, 1e-15);
  EXPECT_NEAR(radial_shoot(ball_profile(half)).a_star, kCentreHalfQ, 1e-8);
}

TEST(RadialShoot, ConvergedDefectIsSmall) {
  for (double lambda : {-1.0, 0.0, 0.3}) {
    const auto res = radial_shoot(ball_profile(lambda));
    EXPECT_LE(std::abs(res.defect), 1e-9 * res.a_star) << lambda;
    EXPECT_GT(res.far_coefficient, 0.0);
  }
}

TEST(RadialShoot, PositiveAndDecreasingForNonpositiveLambda) {
  for (double lambda : {-1.0, -0.2, 0.0}) {
    const auto res = radial_shoot(ball_profile(lambda));
    const auto& tr = res.trajectory;
    for (std::size_t i = 0; i < tr.u.size(); ++i) ASSERT_GT(tr.u[i], 0.0);
    for (std::size_t i = 1; i < tr.u.size(); ++i) ASSERT_LT(tr.u[i], tr.u[i - 1]) << tr.r[i];
  }
}

TEST(RadialShoot, SignChangeOutsideSupportForPositiveLambda) {
  const double lambda = 0.5 * lambda_q(3, 2.0);
  auto prof = ball_profile(lambda);
  prof.r_out = 1.0 + std::numbers::pi / std::sqrt(lambda) + 1.0;
  const auto res = radial_shoot(prof);
  const auto& tr = res.trajectory;
  double first = -1.0;
  for (std::size_t i = 1; i < tr.u.size(); ++i) {
    if (tr.u[i - 1] > 0.0 && tr.u[i] <= 0.0) {
      first = tr.r[i];
      break;
    }
  }
  ASSERT_GT(first, 1.0);
  EXPECT_NEAR(first, res.sign_change_radius, 2 * prof.outer() / 2000);
  EXPECT_LE(first, 2.0 + std::numbers::pi / std::sqrt(lambda));
  // N = 3 exterior: u = alpha cos(k r) / (4 pi r), first zero at pi / (2k)
  EXPECT_NEAR(res.sign_change_radius, std::numbers::pi / (2 * std::sqrt(lambda)), 1e-12);
}

TEST(RadialShoot, ExteriorRepresentationConsistency) {
  for (int dim : {3, 4, 5}) {
    for (double lambda : {-1.0, 0.0, 0.4}) {
      const auto prof = ball_profile(lambda, dim);
      const auto res = radial_shoot(prof);
      for (int k = 1; k <= 10; ++k) {
        const double r = 1.0 + 0.2 * k - 0.05;
        const double ode = res.trajectory(r);
        const double rep = exterior_representation(prof, res, r);
        EXPECT_NEAR(rep, ode, 1e-6 * std::abs(ode) + 1e-12) << dim << " " << lambda << " " << r;
      }
    }
  }
}

TEST(RadialShoot, DefectMonotoneNearRoot) {
  for (double lambda : {-1.0, 0.0, 0.3}) {
    const auto prof = ball_profile(lambda);
    const double a = radial_shoot(prof).a_star;
    const double lo = matching_defect(prof, a * (1 - 1e-3));
    const double mid = matching_defect(prof, a);
    const double hi = matching_defect(prof, a * (1 + 1e-3));
    EXPECT_TRUE((lo < mid && mid < hi) || (lo > mid && mid > hi));
    EXPECT_LT(std::abs(mid), 1e-3 * std::abs(hi - lo));
  }
}

TEST(RadialShoot, SmoothWeightAndOtherDimensions) {
  const auto res = radial_shoot(RadialProfile::from(WeightProfile<3>::dist(1.0, 2.0, 3.0), 4.0, -0.5));
  EXPECT_GT(res.a_star, 0.0);
  EXPECT_LE(std::abs(res.defect), 1e-9 * res.a_star);
  for (int dim : {4, 5}) {
    const auto r = radial_shoot(ball_profile(0.0, dim));
    EXPECT_GT(r.a_star, 0.0);
    EXPECT_LE(std::abs(r.defect), 1e-9 * r.a_star);
  }
}

TEST(RadialShoot, Errors) {
  try {
    radial_shoot(ball_profile(lambda_q(3, 2.0)));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::threshold);
  }
  try {
    ShootOptions opts;
    opts.a_min = 1e-3;
    opts.a_max = 1e-1;
    radial_shoot(ball_profile(0.0), opts);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_NE(std::string(e.what()).find("trace"), std::string::npos);
  }
  auto prof = ball_profile(0.0);
  prof.p = 2.0;
  EXPECT_THROW(radial_shoot(prof), Error);
}

TEST(KernelSignChange, ClosedForms) {
  EXPECT_NEAR(kernel_sign_change_radius(1.0, 1.0, 3), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(kernel_sign_change_radius(4.0, 1.0, 3), 3 * std::numbers::pi / 4, 1e-12);  // cos(2r) turns positive
  EXPECT_NEAR(kernel_sign_change_radius(1.0, 1.0, 4), y_first_zero(4), 1e-10);
  EXPECT_TRUE(std::isnan(kernel_sign_change_radius(-1.0, 1.0, 3)));
}
