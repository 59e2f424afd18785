#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <type_traits>
#include <vector>

#include "helmbranch/extension.hpp"
#include "helmbranch/solver.hpp"

namespace helmbranch {

/// Deterministic unit directions: Fibonacci sphere for N = 3, normalised
/// Gaussian samples from a fixed-seed generator otherwise.
template <int N>
std::vector<Point<N>> ray_directions(int count, unsigned seed = 20240611u) {
  std::vector<Point<N>> dirs(static_cast<std::size_t>(count));
  if constexpr (N == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      dirs[static_cast<std::size_t>(i)] = {rho * std::cos(phi), rho * std::sin(phi), z};
    }
  } else {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& d : dirs) {
      double n2 = 0.0;
      do {
        for (auto& c : d) c = normal(gen);
        n2 = norm2<N>(d);
      } while (n2 < 1e-12);
      const double inv = 1.0 / std::sqrt(n2);
      for (auto& c : d) c *= inv;
    }
  }
  return dirs;
}

struct RayOptions {
  int rays = 200;
  int radial = 64;       // midpoint radii on (0, r_inf] used for L^s norms
  double r_inf = 0.0;    // 0 selects 10 r_Q
};

/// Extension of a branch solution sampled on rays from the profile anchor.
struct RaySamples {
  double spacing = 0.0;             // radial spacing r_inf / radial
  int radial = 0;                   // leading columns inside B_{r_inf}
  std::vector<double> radii;        // (k + 1/2) spacing, possibly beyond r_inf
  Eigen::MatrixXd values;           // rays x radii
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> in_support;
};

struct SignReport {
  bool positive_inside_ball = false;     // every sample in B_{r_inf} positive
  bool positive_on_support = false;      // every sample with Q > 0 positive
  int rays_with_sign_change = 0;         // sign change outside supp Q
  double max_first_change = std::numeric_limits<double>::quiet_NaN();
  double min_first_change = std::numeric_limits<double>::quiet_NaN();
};

/// Samples of u(x) = Psi_lambda * (Q u_+^{p-1}) along rays. For lambda > 0 the radial
/// list extends to at least r_Q + pi / sqrt(lambda) so that the first exterior sign change
/// is resolved.
template <int N>
RaySamples sample_rays(const WeightProfile<N>& q, const Field<N>& u, double lambda, double p,
                       const std::type_identity_t<std::vector<Point<N>>>& dirs, const RayOptions& opts) {
  const double r_inf = opts.r_inf > 0.0 ? opts.r_inf : 10.0 * q.r_q();
  RaySamples out;
  out.spacing = r_inf / opts.radial;
  out.radial = opts.radial;
  double reach = r_inf;
  if (lambda > 0.0) reach = std::max(reach, q.r_q() + std::numbers::pi / std::sqrt(lambda) + out.spacing);
  const int count = std::max(opts.radial, static_cast<int>(std::ceil(reach / out.spacing)));
  for (int k = 0; k < count; ++k) out.radii.push_back((k + 0.5) * out.spacing);

  const ExtensionEvaluator<N> ext(lambda, u.grid, positive_power(u.values, p - 1.0));
  const auto nr = static_cast<Eigen::Index>(dirs.size());
  const auto nc = static_cast<Eigen::Index>(count);
  out.values.resize(nr, nc);
  out.in_support.resize(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index k = 0; k < nc; ++k) {
      Point<N> x = q.anchor();
      for (int c = 0; c < N; ++c) x[c] += out.radii[static_cast<std::size_t>(k)] * dirs[static_cast<std::size_t>(i)][c];
      out.values(i, k) = ext(x);
      out.in_support(i, k) = q(x) > 0.0;
    }
  }
  return out;
}

inline SignReport sign_report(const RaySamples& s) {
  SignReport rep;
  rep.positive_inside_ball = s.values.leftCols(s.radial).minCoeff() > 0.0;
  bool support_ok = true;
  double max_change = -1.0;
  double min_change = HUGE_VAL;
  for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
    Eigen::Index last_support = -1;
    for (Eigen::Index k = 0; k < s.values.cols(); ++k) {
      if (s.in_support(i, k)) {
        last_support = k;
        if (!(s.values(i, k) > 0.0)) support_ok = false;
      }
    }
    for (Eigen::Index k = last_support + 1; k + 1 < s.values.cols(); ++k) {
      const double a = s.values(i, k);
      const double b = s.values(i, k + 1);
      if (k == last_support + 1 && a <= 0.0) {
        // sign already negative right outside the support: change at the sample itself
        max_change = std::max(max_change, s.radii[static_cast<std::size_t>(k)]);
        min_change = std::min(min_change, s.radii[static_cast<std::size_t>(k)]);
        ++rep.rays_with_sign_change;
        break;
      }
      if (a > 0.0 && b <= 0.0) {
        const double ra = s.radii[static_cast<std::size_t>(k)];
        const double rb = s.radii[static_cast<std::size_t>(k + 1)];
        const double r0 = ra + (rb - ra) * a / (a - b);
        max_change = std::max(max_change, r0);
        min_change = std::min(min_change, r0);
        ++rep.rays_with_sign_change;
        break;
      }
    }
  }
  rep.positive_on_support = support_ok;
  if (rep.rays_with_sign_change > 0) {
    rep.max_first_change = max_change;
    rep.min_first_change = min_change;
  }
  return rep;
}

/// ||u||_{L^s(B_{r_inf})} from the leading radial columns (midpoint rule in r,
/// equal solid angle per ray).
inline double ls_norm(const RaySamples& s, double s_exp, int dim) {
  const double w_ray = sphere_area(dim) / static_cast<double>(s.values.rows());
  double sum = 0.0;
  for (int k = 0; k < s.radial; ++k) {
    const double r = s.radii[static_cast<std::size_t>(k)];
    const double wr = std::pow(r, dim - 1) * s.spacing * w_ray;
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) sum += std::pow(std::abs(s.values(i, k)), s_exp) * wr;
  }
  return std::pow(sum, 1.0 / s_exp);
}

/// ||u - v||_{L^s(B_{r_inf})} for samples on the same rays and radii.
inline double ls_distance(const RaySamples& a, const RaySamples& b, double s_exp, int dim) {
  RaySamples d;
  d.spacing = a.spacing;
  d.radial = std::min(a.radial, b.radial);
  d.radii = a.radii;
  d.values = a.values.leftCols(d.radial) - b.values.leftCols(d.radial);
  return ls_norm(d, s_exp, dim);
}

}  // namespace helmbranch
