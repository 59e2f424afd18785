#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "helmbranch/error.hpp"

namespace helmbranch::quad {

/// Adaptive Gauss-Kronrod (15/31) on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 20) {
  if (a == b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &err, &l1);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite quadrature value on [" << a << ", " << b << "]";
    fail(ErrorKind::numerical, msg.str());
  }
  return value;
}

/// Integral of g(x) x^beta on [0, b] for beta > -1 and smooth g, evaluated
/// after the substitution x = b y^{1/(beta+1)} which removes the endpoint power.
template <class G>
double integrate_power_weight(G&& g, double beta, double b, double rel_tol = 1e-12) {
  if (!(beta > -1.0)) fail(ErrorKind::integrability, "power weight is not integrable at 0");
  const double e = 1.0 / (beta + 1.0);
  const double scale = std::pow(b, beta + 1.0) * e;
  auto h = [&](double y) { return y <= 0.0 ? g(0.0) : g(b * std::pow(y, e)); };
  return scale * integrate(h, 0.0, 1.0, rel_tol);
}

}  // namespace helmbranch::quad
