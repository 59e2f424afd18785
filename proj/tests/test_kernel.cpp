#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "helmbranch/extension.hpp"
#include "helmbranch/io.hpp"

using namespace helmbranch;
constexpr double pi = std::numbers::pi;

TEST(Weight, EvalExamples) {
  const auto ball = WeightProfile<3>::ball(1.0, 1.0);
  EXPECT_EQ(ball({0.5, 0.0, 0.0}), 1.0);
  EXPECT_EQ(ball({0.0, -1.5, 0.0}), 0.0);
  const auto d = WeightProfile<3>::dist(1.0, 2.0, 3.0);
  EXPECT_NEAR(d({0.3, 0.4, 0.0}), 0.75, 1e-15);
  EXPECT_EQ(d({0.0, 0.0, 1.2}), 0.0);
  EXPECT_DOUBLE_EQ(ball.r_q(), 2.0);
  EXPECT_DOUBLE_EQ(d.sup_norm(), 3.0);
  EXPECT_NEAR(ball.omega_measure(), 4 * pi / 3, 1e-15);
}

TEST(Weight, ShiftedAnchor) {
  const auto q = WeightProfile<3>::ball(0.5, 2.0, {1.0, 2.0, 3.0});
  EXPECT_EQ(q({1.2, 2.0, 3.0}), 2.0);
  EXPECT_EQ(q({0.2, 0.0, 0.0}), 0.0);
}

TEST(Weight, InvalidParameters) {
  EXPECT_THROW(WeightProfile<3>::ball(-1.0), Error);
  EXPECT_THROW(WeightProfile<3>::dist(1.0, 0.0, 1.0), Error);
  EXPECT_THROW(WeightProfile<3>::dist(1.0, 1.0, -2.0), Error);
  LatticeSamples<3> s;
  s.spacing = 0.1;
  s.index = {{0, 0, 0}};
  s.value = {-1.0};
  EXPECT_THROW(WeightProfile<3>::sampled(s), Error);
  s.value = {0.0};
  EXPECT_THROW(WeightProfile<3>::sampled(s), Error);
}

TEST(Weight, SampledProfile) {
  LatticeSamples<3> s;
  s.spacing = 0.5;
  s.origin = {1.0, 0.0, 0.0};
  for (std::int64_t i = -1; i <= 1; ++i)
    for (std::int64_t j = -1; j <= 1; ++j)
      for (std::int64_t k = -1; k <= 1; ++k) {
        s.index.push_back({i, j, k});
        s.value.push_back(1.0 + i);
      }
  const auto q = WeightProfile<3>::sampled(s);
  EXPECT_EQ(q.kind(), ProfileKind::grid_sampled);
  EXPECT_EQ(q({1.5, 0.0, 0.0}), 2.0);
  EXPECT_EQ(q({0.5, 0.2, 0.0}), 0.0);
  EXPECT_EQ(q({0.0, 0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(q.sup_norm(), 2.0);
  // the i = -1 layer carries Q = 0 and is not part of the support
  EXPECT_NEAR(q.r_q(), 0.5 * (std::sqrt(1.0 + 4.0 + 4.0) + std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(q.omega_measure(), 18 * 0.125, 1e-15);
}

TEST(Weight, CellAverageLimits) {
  const auto q = WeightProfile<3>::ball(1.0);
  EXPECT_EQ(q.cell_average({0.0, 0.0, 0.0}, 0.1, 10), 1.0);
  EXPECT_EQ(q.cell_average({3.0, 0.0, 0.0}, 0.1, 10), 0.0);
  const double a = q.cell_average({1.0, 0.0, 0.0}, 0.1, 10);
  EXPECT_GT(a, 0.3);
  EXPECT_LT(a, 0.7);
  // permutations and reflections give bit-identical averages
  EXPECT_EQ(q.cell_average({0.93, -0.2, 0.3}, 0.1, 10), q.cell_average({-0.3, 0.93, 0.2}, 0.1, 10));
}

namespace {

std::size_t lattice_points_in_ball(double h, double radius) {
  const auto n = static_cast<long>(std::ceil(radius / h)) + 1;
  std::size_t count = 0;
  for (long i = -n; i <= n; ++i)
    for (long j = -n; j <= n; ++j)
      for (long k = -n; k <= n; ++k)
        if (std::sqrt(static_cast<double>(i * i + j * j + k * k)) * h <= radius) ++count;
  return count;
}

}  // namespace

TEST(Grid, CellCountAtQuarterSpacing) {
  const auto q = WeightProfile<3>::ball(1.0);
  const auto centre = make_grid(q, 0.25, {SupportRule::cell_center});
  EXPECT_EQ(centre->size(), lattice_points_in_ball(0.25, 1.0));
  EXPECT_NEAR(static_cast<double>(centre->size()), 4 * pi / 3 / std::pow(0.25, 3), 0.1 * 268);
  const auto avg = make_grid(q, 0.25);
  EXPECT_GE(avg->size(), centre->size());
  EXPECT_NEAR(avg->weights().sum() * avg->cell_volume(), 4 * pi / 3, 0.01);
}

TEST(Grid, TooCoarse) {
  const auto q = WeightProfile<3>::ball(1.0);
  try {
    make_grid(q, 2.5);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resolution);
  }
  EXPECT_THROW(make_grid(q, 2.0, {SupportRule::cell_center}), Error);
  EXPECT_THROW(make_grid(q, -0.1), Error);
}

TEST(Grid, HalvingScalesCount) {
  const auto q = WeightProfile<3>::ball(1.0);
  const GridOptions centre{SupportRule::cell_center};
  const double a = static_cast<double>(make_grid(q, 0.1, centre)->size());
  const double b = static_cast<double>(make_grid(q, 0.05, centre)->size());
  EXPECT_NEAR(b / a, 8.0, 0.8);
  const auto q4 = WeightProfile<4>::ball(1.0);
  const double a4 = static_cast<double>(make_grid(q4, 0.2, centre)->size());
  const double b4 = static_cast<double>(make_grid(q4, 0.1, centre)->size());
  EXPECT_NEAR(b4 / a4, 16.0, 1.6);
  // averaged weights add a boundary layer of cells but keep the total mass
  for (double h : {0.2, 0.1}) {
    const auto g = make_grid(q, h);
    EXPECT_NEAR(g->weights().sum() * g->cell_volume(), 4 * pi / 3, 5e-3);
  }
}

TEST(Grid, LexicographicAndFind) {
  const auto g = make_grid(WeightProfile<3>::ball(1.0), 0.3);
  for (std::size_t i = 1; i < g->size(); ++i) EXPECT_LT(g->index(i - 1), g->index(i));
  for (std::size_t i = 0; i < g->size(); i += 7) EXPECT_EQ(g->find(g->index(i)), static_cast<std::ptrdiff_t>(i));
  EXPECT_EQ(g->find({100, 0, 0}), -1);
  const auto c = g->central_cell();
  EXPECT_EQ(g->index(c), (Index<3>{0, 0, 0}));
}

TEST(SelfWeight, Examples) {
  for (double h : {0.05, 0.1, 0.3}) {
    const double rho = h * std::cbrt(3.0 / (4 * pi));
    EXPECT_NEAR(singular_self_weight(0.0, h, 3), 0.5 * rho * rho, 1e-17);
    EXPECT_NEAR(singular_self_weight(1e-10, h, 3), 0.5 * rho * rho, 1e-12 * rho * rho);
    // for N = 3 the kernel is Lipschitz in sigma = -sqrt(-lambda), not in lambda
    EXPECT_NEAR(singular_self_weight(-1e-10, h, 3), 0.5 * rho * rho, 1e-5 * rho * rho * rho);
    for (double l : {-0.5, -10.0, -300.0}) EXPECT_LE(singular_self_weight(l, h, 3), singular_self_weight(0.0, h, 3));
  }
  // closed forms for N = 3: int_0^rho e^{-kr} r dr and int_0^rho cos(kr) r dr
  const double h = 0.2, rho = equal_volume_radius(h, 3), k = 3.0;
  EXPECT_NEAR(singular_self_weight(-k * k, h, 3), (1 - std::exp(-k * rho) * (1 + k * rho)) / (k * k), 1e-15);
  EXPECT_NEAR(singular_self_weight(k * k, h, 3), (std::cos(k * rho) + k * rho * std::sin(k * rho) - 1) / (k * k), 1e-15);
  // N = 4, 5 at lambda = 0
  for (int dim : {4, 5}) {
    const double r = equal_volume_radius(h, dim);
    EXPECT_NEAR(singular_self_weight(0.0, h, dim), r * r / (2.0 * (dim - 2)), 1e-16);
    EXPECT_NEAR(singular_self_weight(1e-9, h, dim), r * r / (2.0 * (dim - 2)), 1e-12);
  }
}

TEST(SelfWeight, SigmaDerivative) {
  for (int dim : {3, 4, 5}) {
    for (double sigma : {-4.0, -0.5, 0.3, 2.0}) {
      const double e = 1e-5, h = 0.1;
      const double fd = (singular_self_weight(lambda_of_sigma(sigma + e), h, dim) -
                         singular_self_weight(lambda_of_sigma(sigma - e), h, dim)) / (2 * e);
      EXPECT_NEAR(singular_self_weight_dsigma(sigma, h, dim), fd, 1e-7 * std::abs(fd) + 1e-12);
    }
  }
}

TEST(Extension, ZeroField) {
  const auto g = make_grid(WeightProfile<3>::ball(1.0), 0.2);
  const auto f = Field<3>::constant(g, 0.0);
  EXPECT_EQ(convolve_extension(0.3, f, {0.1, 0.0, 0.0}), 0.0);
  EXPECT_EQ(convolve_extension(-2.0, f, {3.0, 0.0, 0.0}), 0.0);
}

TEST(Extension, NewtonPotentialOfBall) {
  const auto q = WeightProfile<3>::ball(1.0);
  double prev_centre = HUGE_VAL, out = HUGE_VAL;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto g = make_grid(q, h);
    const auto f = Field<3>::constant(g, 1.0);
    const double c = std::abs(convolve_extension(0.0, f, {0.0, 0.0, 0.0}) - 0.5);
    out = std::abs(convolve_extension(0.0, f, {2.0, 0.0, 0.0}) - 1.0 / 6.0);
    EXPECT_LT(c, prev_centre);
    prev_centre = c;
  }
  EXPECT_LT(prev_centre, 2e-3);
  EXPECT_LT(out, 2e-4);
}

TEST(Extension, QuadratureOrderForSmoothWeight) {
  // Q = (1 - |x|)^2 on B_1, f = 1: value at 0 is int_0^1 r (1 - r)^2 dr = 1/12
  const auto q = WeightProfile<3>::dist(1.0, 2.0, 1.0);
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto g = make_grid(q, h);
    err.push_back(std::abs(convolve_extension(0.0, Field<3>::constant(g, 1.0), {0.0, 0.0, 0.0}) - 1.0 / 12));
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.5) << i;
}

TEST(Extension, Linearity) {
  const auto g = make_grid(WeightProfile<3>::dist(1.0, 1.0, 2.0), 0.2);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n;
  Eigen::VectorXd a(g->size()), b(g->size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] = n(gen);
    b[i] = n(gen);
  }
  const double al = 1.7, be = -0.4;
  for (double lambda : {-1.0, 0.0, 2.0}) {
    for (Point<3> x : {Point<3>{0.0, 0.0, 0.0}, Point<3>{0.33, -0.1, 0.7}, Point<3>{2.0, 1.0, 0.0}}) {
      const double lhs = convolve_extension(lambda, Field<3>(g, al * a + be * b), x);
      const double rhs = al * convolve_extension(lambda, Field<3>(g, a), x) + be * convolve_extension(lambda, Field<3>(g, b), x);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(lhs)));
    }
  }
}

TEST(Extension, PositiveOnSupportBelowThreshold) {
  const auto q = WeightProfile<3>::ball(1.0);
  const auto g = make_grid(q, 0.2);
  const double lq = lambda_q(3, q.r_q());
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto sample_in_support = [&](const ExtensionEvaluator<3>& ext) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (q(g->center(i)) > 0.0) ASSERT_GT(ext(g->center(i)), 0.0);
    }
    for (int k = 0; k < 200; ++k) {
      Point<3> x{2 * u(gen) - 1, 2 * u(gen) - 1, 2 * u(gen) - 1};
      if (q(x) > 0.0) ASSERT_GT(ext(x), 0.0);
    }
  };
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(g->size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(gen) < 0.3 ? u(gen) : 0.0;
    for (double lambda : {-3.0, 0.0, 0.99 * lq}) sample_in_support(ExtensionEvaluator<3>(lambda, g, f));
  }
  // a point source in any cell, below the threshold of the stored cell centres
  const double lq_cells = lambda_q(3, 2.0 * g->center_radius() + 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g->size()));
    f[static_cast<Eigen::Index>(static_cast<double>(g->size()) * u(gen))] = 1.0;
    sample_in_support(ExtensionEvaluator<3>(0.99 * lq_cells, g, f));
  }
}

TEST(Extension, TranslationConsistency) {
  const Point<3> shift{0.7, -1.3, 2.25};
  const auto q0 = WeightProfile<3>::dist(1.0, 2.0, 1.5);
  const auto q1 = WeightProfile<3>::dist(1.0, 2.0, 1.5, shift);
  const auto g0 = make_grid(q0, 0.2), g1 = make_grid(q1, 0.2);
  ASSERT_EQ(g0->size(), g1->size());
  Eigen::VectorXd f(g0->size());
  for (std::size_t i = 0; i < g0->size(); ++i) f[static_cast<Eigen::Index>(i)] = 1.0 + std::cos(static_cast<double>(i));
  for (double lambda : {-1.0, 0.0, 1.5}) {
    for (Point<3> x : {Point<3>{0.05, 0.1, -0.2}, Point<3>{1.5, 0.0, 0.3}}) {
      const double a = convolve_extension(lambda, Field<3>(g0, f), x);
      const double b = convolve_extension(lambda, Field<3>(g1, f), x + shift);
      EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    }
  }
}

TEST(Extension, SelfCellAtCentres) {
  const auto g = make_grid(WeightProfile<3>::ball(1.0), 0.25);
  const auto f = Field<3>::constant(g, 1.0);
  const std::size_t c = g->central_cell();
  const double lambda = -0.8;
  double want = g->weight(c) * singular_self_weight(lambda, 0.25, 3);
  for (std::size_t j = 0; j < g->size(); ++j) {
    if (j == c) continue;
    const double r = std::sqrt(static_cast<double>(g->index_dist2(c, j))) * 0.25;
    want += psi_lambda(r, lambda, 3) * g->weight(j) * g->cell_volume();
  }
  EXPECT_NEAR(convolve_extension(lambda, f, g->center(c)), want, 1e-13 * want);
}

TEST(FieldDump, RoundTripsAsLatticeSamples) {
  const auto q = WeightProfile<3>::ball(0.6, 1.0, {0.5, 0.0, -0.25});
  const auto g = make_grid(q, 0.2, {SupportRule::cell_center});
  Eigen::VectorXd v(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) v[static_cast<Eigen::Index>(i)] = 0.1 + 0.01 * static_cast<double>(i);
  std::ostringstream out;
  write_field_csv<3>(out, Field<3>(g, v));
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "ix,iy,iz,x,y,z,value");
  const std::string path = ::testing::TempDir() + "/field_roundtrip.csv";
  write_field_csv<3>(path, Field<3>(g, v));
  const auto samples = read_lattice_csv<3>(path);
  EXPECT_NEAR(samples.spacing, 0.2, 1e-15);
  EXPECT_NEAR(samples.origin[0], 0.5, 1e-15);
  EXPECT_NEAR(samples.origin[2], -0.25, 1e-15);
  ASSERT_EQ(samples.value.size(), g->size());
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(samples.value[i], v[static_cast<Eigen::Index>(i)]);
  const auto sampled = WeightProfile<3>::sampled(samples);
  EXPECT_EQ(sampled(g->center(3)), v[3]);
}
