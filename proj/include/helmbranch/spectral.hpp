#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "helmbranch/fundamental.hpp"
#include "helmbranch/operator.hpp"
#include "helmbranch/quadrature.hpp"

namespace helmbranch {

template <int N>
struct EigenPair {
  double nu1 = 0.0;
  Field<N> f1;
  int iterations = 0;
  double residual = 0.0;
};

struct PowerIterationOptions {
  int max_iterations = 100000;
  double rayleigh_tol = 1e-12;
  double residual_tol = 1e-10;  // relative to nu1
};

/// Dominant (Krein-Rutman) eigenpair by power iteration.
///
/// The matrix is A = G W with G symmetric and W = diag(Q_j h^N), so A is
/// self-adjoint in the W-weighted inner product and the Rayleigh quotient is
/// taken in that inner product.
template <int N>
EigenPair<N> kr_eigenpair(const DiscreteOperator<N>& op, PowerIterationOptions opts = {},
                          std::optional<Eigen::VectorXd> start = std::nullopt) {
  const Eigen::Index m = op.matrix.rows();
  const Eigen::VectorXd& w = op.grid->weights();
  Eigen::VectorXd f = start ? *start : Eigen::VectorXd::Ones(m);
  if (f.size() != m) fail(ErrorKind::shape, "start vector length does not match operator");
  f /= f.cwiseAbs().maxCoeff();
  Eigen::VectorXd g = op.matrix * f;
  double nu_prev = HUGE_VAL;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double nu = f.dot(w.cwiseProduct(g)) / f.dot(w.cwiseProduct(f));
    const double res = (g - nu * f).cwiseAbs().maxCoeff();
    if (std::abs(nu - nu_prev) < opts.rayleigh_tol && res < opts.residual_tol * std::abs(nu)) {
      if (!(f.minCoeff() > 0.0)) {
        fail(ErrorKind::positivity, "dominant eigenvector is not strictly positive");
      }
      return {nu, Field<N>(op.grid, f), it, res};
    }
    nu_prev = nu;
    const double scale = g.maxCoeff();
    if (!(scale > 0.0) || !(g.minCoeff() > 0.0)) {
      std::ostringstream msg;
      msg << "power iterate lost positivity at iteration " << it
          << " (operator lambda=" << op.lambda << " may lie beyond lambda_Q)";
      fail(ErrorKind::positivity, msg.str());
    }
    f = g / scale;
    g = op.matrix * f;
  }
  std::ostringstream msg;
  msg << "power iteration did not converge in " << opts.max_iterations << " iterations";
  fail(ErrorKind::spectral, msg.str());
}

/// kappa_2 = (epsilon_0 nu_1)^{-(p-1)/(p-2)}.
inline double kappa2(double p, double eps0, double nu1) {
  if (!(p > 2.0)) fail(ErrorKind::domain, "kappa2 requires p > 2");
  if (!(eps0 > 0.0) || !(nu1 > 0.0)) fail(ErrorKind::domain, "kappa2 requires positive eps0, nu1");
  return std::pow(eps0 * nu1, -(p - 1.0) / (p - 2.0));
}

/// (|S^{N-1}| int_0^b |Psi_lambda(rho)|^{p/2} rho^{N-1} drho)^{2/p}
inline double kernel_lt_norm(double p, double b, double lambda, int dim) {
  const double t = 0.5 * p;
  const double beta = dim - 1.0 - (dim - 2.0) * t;
  const double sigma = sigma_of_lambda(lambda);
  auto g = [&](double rho) { return std::pow(std::abs(detail::psi_of_product(sigma * rho, dim)), t); };
  const double integral = quad::integrate_power_weight(g, beta, b, 1e-12);
  return std::pow(sphere_area(dim) * std::pow(newton_coefficient(dim), t) * integral, 1.0 / t);
}

struct DOptions {
  int lambda_samples = 64;
  double safety = 1.05;
};

/// Norm constant D: sup over a lambda grid on [-10 max(1, Lambda^*), Lambda^*]
/// (together with lambda = 0) of the L^{p/2}(B_{r+r0}) norm of Psi_lambda, times a safety factor.
inline double compute_D(double p, double r, double r0, double lambda_plus, int dim,
                        DOptions opts = {}) {
  check_dimension(dim);
  if (!(p > 2.0)) fail(ErrorKind::exponent, "D requires p > 2");
  if (!(p < critical_exponent(dim))) {
    std::ostringstream msg;
    msg << "p=" << p << " is not below the critical exponent 2N/(N-2)=" << critical_exponent(dim);
    fail(ErrorKind::integrability, msg.str());
  }
  if (!(r > 0.0) || !(r0 > 0.0)) fail(ErrorKind::domain, "D requires positive radii");
  if (lambda_plus < 0.0) fail(ErrorKind::domain, "Lambda^* must be nonnegative");
  const double big = 10.0 * std::max(1.0, lambda_plus);
  const double b = r + r0;
  double sup = kernel_lt_norm(p, b, 0.0, dim);
  const int n = std::max(opts.lambda_samples, 2);
  for (int i = 0; i < n; ++i) {
    const double lambda = -big + (lambda_plus + big) * i / (n - 1);
    sup = std::max(sup, kernel_lt_norm(p, b, lambda, dim));
  }
  return opts.safety * sup;
}

/// delta_0 = 1/2 (D ||Q||_inf)^{-1/(p-2)} |Omega|^{-1/p}.
inline double delta0(double p, double D, double q_sup, double omega) {
  if (!(p > 2.0) || !(D > 0.0) || !(q_sup > 0.0) || !(omega > 0.0)) {
    fail(ErrorKind::domain, "delta0 requires p > 2 and positive D, ||Q||, |Omega|");
  }
  return 0.5 * std::pow(D * q_sup, -1.0 / (p - 2.0)) * std::pow(omega, -1.0 / p);
}

template <int N>
double delta0(double p, double D, const WeightProfile<N>& q) {
  return delta0(p, D, q.sup_norm(), q.omega_measure());
}

template <int N>
struct SpectralData {
  double nu1 = 0.0;
  Field<N> f1;
  std::size_t f1_max_cell = 0;
  double epsilon0 = 0.0;
  double kappa2 = 0.0;
  double D = 0.0;
  double delta0 = 0.0;
  double lambda_Q = 0.0;
};

/// Constants for continuation over [-lambda_minus, lambda_plus]: nu1 and f1 of K_0,
/// epsilon_0 with r0 = r_Q, kappa_2, D with r = extent of supp Q and r0 = r_Q, delta_0.
template <int N>
SpectralData<N> spectral_data(const WeightProfile<N>& q, GridPtr<N> grid, double p,
                              double lambda_minus, double lambda_plus,
                              std::size_t capacity = kDefaultCapacity) {
  SpectralData<N> out;
  out.lambda_Q = lambda_q(N, q.r_q());
  const auto k0 = assemble_K<N>(0.0, grid, out.lambda_Q, capacity);
  auto pair = kr_eigenpair(k0);
  out.nu1 = pair.nu1;
  Eigen::Index imax = 0;
  pair.f1.values.maxCoeff(&imax);
  out.f1_max_cell = static_cast<std::size_t>(imax);
  out.f1 = std::move(pair.f1);
  out.epsilon0 = epsilon0(lambda_minus, lambda_plus, q.r_q(), N);
  out.kappa2 = kappa2(p, out.epsilon0, out.nu1);
  out.D = compute_D(p, q.extent(), q.r_q(), lambda_plus, N);
  out.delta0 = delta0(p, out.D, q.sup_norm(), q.omega_measure());
  return out;
}

}  // namespace helmbranch
