#pragma once

// Radial fundamental solution of -Delta - lambda in R^N, N in {3, 4, 5}.
//
//   Psi_lambda(r) = psi_r(lambda) * Psi_0(r),   Psi_0(r) = Gamma(nu) / (4 pi^{N/2}) r^{2-N}
//
// with nu = (N-2)/2 and s = sqrt(|lambda|) r,
//
//   lambda < 0 :  psi_r = 2/Gamma(nu) (s/2)^nu K_nu(s)
//   lambda > 0 :  psi_r = -pi/Gamma(nu) (s/2)^nu Y_nu(s)
//
// For N = 3 and N = 5 these reduce to elementary functions and are evaluated
// that way. Derivatives are taken with respect to sigma = sign(lambda) sqrt|lambda|,
// the coordinate in which psi_r is Lipschitz across lambda = 0.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "helmbranch/bessel.hpp"
#include "helmbranch/error.hpp"

namespace helmbranch {

inline void check_dimension(int dim) {
  if (dim < 3 || dim > 5) {
    fail(ErrorKind::unsupported,
         "unsupported dimension N=" + std::to_string(dim) + " (supported: 3, 4, 5)");
  }
}

/// Critical Sobolev exponent 2N/(N-2).
inline double critical_exponent(int dim) { return 2.0 * dim / (dim - 2.0); }

/// Surface area of the unit sphere S^{N-1}.
inline double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// Volume of the unit ball in R^N.
inline double ball_volume(int dim) { return sphere_area(dim) / dim; }

inline double sigma_of_lambda(double lambda) {
  return lambda < 0.0 ? -std::sqrt(-lambda) : std::sqrt(lambda);
}

inline double lambda_of_sigma(double sigma) { return sigma < 0.0 ? -sigma * sigma : sigma * sigma; }

/// Gamma(nu) / (4 pi^{N/2}), the coefficient of r^{2-N} in Psi_0.
inline double newton_coefficient(int dim) {
  check_dimension(dim);
  return std::tgamma(0.5 * (dim - 2)) / (4.0 * std::pow(std::numbers::pi, 0.5 * dim));
}

namespace detail {

inline void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    std::ostringstream msg;
    msg << "radius must be positive and finite, got " << r;
    fail(ErrorKind::domain, msg.str());
  }
}

// psi as a function of the product signed argument: sigma * r
inline double psi_of_product(double x, int dim) {
  using specfun::BesselKind;
  if (x == 0.0) return 1.0;
  const double s = std::abs(x);
  switch (dim) {
    case 3:
      return x < 0.0 ? std::exp(-s) : std::cos(s);
    case 4: {
      const auto one = specfun::BesselOrder::from_twice(2);
      return x < 0.0 ? s * specfun::bessel(BesselKind::K, one, s)
                     : -0.5 * std::numbers::pi * s * specfun::bessel(BesselKind::Y, one, s);
    }
    case 5:
      return x < 0.0 ? (1.0 + s) * std::exp(-s) : std::cos(s) + s * std::sin(s);
    default:
      check_dimension(dim);
  }
  return 0.0;
}

// d psi / d x at x = sigma * r; right-sided at x = 0
inline double dpsi_of_product(double x, int dim) {
  using specfun::BesselKind;
  const double s = std::abs(x);
  switch (dim) {
    case 3:
      return x < 0.0 ? std::exp(-s) : -std::sin(s);
    case 4: {
      if (x == 0.0) return 0.0;
      const auto zero = specfun::BesselOrder::from_twice(0);
      return x < 0.0 ? s * specfun::bessel(BesselKind::K, zero, s)
                     : -0.5 * std::numbers::pi * s * specfun::bessel(BesselKind::Y, zero, s);
    }
    case 5:
      return x < 0.0 ? s * std::exp(-s) : s * std::cos(s);
    default:
      check_dimension(dim);
  }
  return 0.0;
}

}  // namespace detail

/// psi_r(lambda) = Psi_lambda(r) / Psi_0(r); equals 1 at lambda = 0.
inline double psi_ratio(double lambda, double r, int dim) {
  check_dimension(dim);
  detail::check_radius(r);
  return detail::psi_of_product(sigma_of_lambda(lambda) * r, dim);
}

/// chi(t) = psi_r(lambda) for lambda > 0 written in t = sqrt(lambda) r.
inline double chi(double t, int dim) {
  check_dimension(dim);
  if (t < 0.0) fail(ErrorKind::domain, "chi requires t >= 0");
  return detail::psi_of_product(t, dim);
}

inline double psi0(double r, int dim) {
  detail::check_radius(r);
  return newton_coefficient(dim) * std::pow(r, 2.0 - dim);
}

inline double psi_lambda(double r, double lambda, int dim) {
  return psi_ratio(lambda, r, dim) * psi0(r, dim);
}

/// d psi_r / d sigma at sigma = sign(lambda) sqrt|lambda| (right-sided at 0).
inline double dpsi_ratio_dsigma(double sigma, double r, int dim) {
  check_dimension(dim);
  detail::check_radius(r);
  return r * detail::dpsi_of_product(sigma * r, dim);
}

/// d Psi_lambda / d sigma; the kernel derivative used by the continuation.
inline double dpsi_lambda_dsigma(double r, double sigma, int dim) {
  return dpsi_ratio_dsigma(sigma, r, dim) * psi0(r, dim);
}

/// Radial derivative d Psi_lambda / d r.
inline double psi_lambda_dr(double r, double lambda, int dim) {
  check_dimension(dim);
  detail::check_radius(r);
  const double sigma = sigma_of_lambda(lambda);
  const double x = sigma * r;
  const double ratio = detail::psi_of_product(x, dim);
  const double dratio = sigma * detail::dpsi_of_product(x, dim);
  const double base = psi0(r, dim);
  return dratio * base + ratio * base * (2.0 - dim) / r;
}

/// First positive zero of Y_{(N-2)/2}.
inline double y_first_zero(int dim) {
  check_dimension(dim);
  if (dim == 3) return 0.5 * std::numbers::pi;
  return specfun::first_y_zero(specfun::BesselOrder::for_dimension(dim));
}

/// gamma_N = max of chi on the positivity interval; 1 for N = 3.
inline double gamma_const(int dim) {
  check_dimension(dim);
  if (dim == 3) return 1.0;
  const auto lower = specfun::BesselOrder::from_twice(dim - 4);
  const auto nu = specfun::BesselOrder::for_dimension(dim);
  const double y = specfun::first_y_zero(lower);
  return -std::numbers::pi / std::tgamma(nu.value()) * std::pow(0.5 * y, nu.value()) *
         specfun::bessel(specfun::BesselKind::Y, nu, y);
}

/// lambda_Q = (y^{(1)}_{(N-2)/2} / r_Q)^2.
inline double lambda_q(int dim, double r_q) {
  if (!(r_q > 0.0)) fail(ErrorKind::domain, "r_Q must be positive");
  const double y = y_first_zero(dim);
  return (y / r_q) * (y / r_q);
}

/// epsilon_0 = min{1, psi_{r0}(-lambda_minus), psi_{r0}(lambda_plus)}.
inline double epsilon0(double lambda_minus, double lambda_plus, double r0, int dim) {
  check_dimension(dim);
  detail::check_radius(r0);
  if (lambda_minus < 0.0 || lambda_plus < 0.0) {
    fail(ErrorKind::domain, "epsilon0 expects nonnegative Lambda_* and Lambda^*");
  }
  const double y = y_first_zero(dim);
  if (!(std::sqrt(lambda_plus) * r0 < y)) {
    std::ostringstream msg;
    msg << "Lambda^*=" << lambda_plus << " must lie below lambda_Q=" << (y / r0) * (y / r0)
        << " for r0=" << r0;
    fail(ErrorKind::threshold, msg.str());
  }
  return std::min({1.0, psi_ratio(-lambda_minus, r0, dim), psi_ratio(lambda_plus, r0, dim)});
}

/// Sampled upper constant zeta_N for |Psi_lambda| <= gamma_N Psi_0 + zeta_N lambda^{(N-3)/4} r^{(1-N)/2}.
/// Valid (safety factor 1.05 over the sampled supremum on t in (0, 1e3]), not minimal.
inline double zeta_estimate(int dim) {
  check_dimension(dim);
  if (dim == 3) return 0.0;
  const double gamma = gamma_const(dim);
  const double power = 0.5 * (dim - 3);
  constexpr int samples = 200000;
  constexpr double t_max = 1e3;
  double sup = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double t = t_max * i / samples;
    const double excess = std::abs(chi(t, dim)) - gamma;
    if (excess > 0.0) sup = std::max(sup, excess / std::pow(t, power));
  }
  return 1.05 * sup * newton_coefficient(dim);
}

/// Regular radial solution of u'' + (N-1)/r u' + lambda u = 0 with value 1 at r = 0,
/// and its radial derivative.
struct RegularSolution {
  double value;
  double derivative;
};

inline RegularSolution regular_solution(double r, double lambda, int dim) {
  using specfun::BesselKind;
  check_dimension(dim);
  if (r < 0.0) fail(ErrorKind::domain, "regular solution requires r >= 0");
  if (lambda == 0.0 || r == 0.0) return {1.0, 0.0};
  const double k = std::sqrt(std::abs(lambda));
  const double s = k * r;
  const int twice = dim - 2;
  const double nu = 0.5 * twice;
  const double g = std::tgamma(nu + 1.0);
  // phi(s) = Gamma(nu+1) (2/s)^nu Z_nu(s); phi'(s) = -/+ Gamma(nu+1) (2/s)^nu Z_{nu+1}(s)
  if (s < 2.0) {
    // phi = sum_k (-lambda r^2 / 4)^k Gamma(nu+1) / (k! Gamma(nu+k+1))
    const double q = -0.25 * lambda * r * r;
    double term = 1.0;
    double value = 1.0;
    double deriv = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= q / (k * (nu + k));
      value += term;
      deriv += 2.0 * k * term / r;
      if (std::abs(term) < 1e-18) break;
    }
    return {value, deriv};
  }
  const double scale = g * std::pow(2.0 / s, nu);
  const auto order = specfun::BesselOrder::from_twice(twice);
  const BesselKind kind = lambda > 0.0 ? BesselKind::J : BesselKind::I;
  const double value = scale * specfun::bessel(kind, order, s);
  // Z_{nu+1} is expressed through the recurrence on the available orders:
  //   J_{nu+1} = (2 nu / s) J_nu - J_{nu-1},  I_{nu+1} = I_{nu-1} - (2 nu / s) I_nu
  const double z_nu = specfun::bessel(kind, order, s);
  const double z_lower = specfun::detail::bessel_signed(kind, twice - 2, s);
  double deriv;
  if (lambda > 0.0) {
    const double z_upper = 2.0 * nu / s * z_nu - z_lower;
    deriv = -scale * z_upper * k;
  } else {
    const double z_upper = z_lower - 2.0 * nu / s * z_nu;
    deriv = scale * z_upper * k;
  }
  return {value, deriv};
}

}  // namespace helmbranch
