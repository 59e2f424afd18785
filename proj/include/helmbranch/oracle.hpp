#pragma once

// Radial shooting for u'' + (N-1)/r u' + lambda u + Q(r) u_+^{p-1} = 0, u(0) = a, u'(0) = 0.
//
// Outside supp Q = [0, R] the solution is a combination alpha Psi_lambda + beta phi of
// the standing kernel profile and the regular solution phi (phi(0) = 1). With the
// Wronskian W(f, g) = |S^{N-1}| r^{N-1} (f g' - f' g) one has W(Psi_lambda, phi) = 1,
// so at any exterior radius
//
//   beta  = W(Psi_lambda, u)   (matching defect: the inadmissible component)
//   alpha = W(u, phi)          (far coefficient)
//
// A solution of the integral equation has beta = 0, and then
// alpha = |S^{N-1}| int_0^R phi Q u_+^{p-1} s^{N-1} ds.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "helmbranch/fundamental.hpp"
#include "helmbranch/weight.hpp"

namespace helmbranch {

struct RadialProfile {
  std::function<double(double)> q;  // Q(r), zero for r > R
  double R = 1.0;
  int N = 3;
  double p = 4.0;
  double lambda = 0.0;
  double r_out = 0.0;  // 0 selects R + 2

  double outer() const { return r_out > 0.0 ? r_out : R + 2.0; }

  template <int M>
  static RadialProfile from(const WeightProfile<M>& w, double p, double lambda) {
    if (!w.radial()) fail(ErrorKind::validation, "oracle needs a radial profile");
    RadialProfile prof;
    const WeightProfile<M> copy = w;
    prof.q = [copy](double r) { return copy.radial_value(r); };
    prof.R = w.radius();
    prof.N = M;
    prof.p = p;
    prof.lambda = lambda;
    return prof;
  }
};

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
  double source = 0.0;  // |S^{N-1}| int_0^r phi Q u_+^{p-1} s^{N-1} ds
  bool diverged = false;
};

struct RadialTrajectory {
  std::vector<double> r, u, du;
  RadialState end;

  /// Cubic Hermite interpolation of u on the sample grid.
  double operator()(double x) const {
    if (x <= r.front()) return u.front();
    if (x >= r.back()) return u.back();
    auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - r.begin()) - 1;
    const double h = r[k + 1] - r[k];
    const double t = (x - r[k]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * u[k] + h10 * h * du[k] + h01 * u[k + 1] + h11 * h * du[k + 1];
  }
};

namespace detail {

using OdeState = std::array<double, 3>;

inline constexpr double kOracleRelTol = 1e-11;
inline constexpr double kOracleAbsTol = 1e-14;
inline constexpr double kBlowUp = 1e12;

struct RadialRhs {
  const RadialProfile& prof;
  double area;
  bool exterior = false;  // piece starting at or beyond R, where Q vanishes
  void operator()(const OdeState& y, OdeState& dy, double r) const {
    const double qv = exterior ? 0.0 : prof.q(r);
    const double up = y[0] > 0.0 ? std::pow(y[0], prof.p - 1.0) : 0.0;
    dy[0] = y[1];
    dy[1] = -(prof.N - 1.0) / r * y[1] - prof.lambda * y[0] - qv * up;
    const double phi = qv > 0.0 ? regular_solution(r, prof.lambda, prof.N).value : 0.0;
    dy[2] = area * phi * qv * up * std::pow(r, prof.N - 1);
  }
};

}  // namespace detail

/// Integrates from the series start at r_min to the sample radii (sorted, last = end).
inline RadialTrajectory radial_trajectory(const RadialProfile& prof, double a,
                                          std::vector<double> radii) {
  namespace ode = boost::numeric::odeint;
  check_dimension(prof.N);
  if (!(a > 0.0)) fail(ErrorKind::domain, "shooting amplitude must be positive");
  const double r_min = 1e-5;
  const double q0 = prof.q(0.0);
  const double ap = std::pow(a, prof.p - 1.0);
  const double c = -(prof.lambda * a + q0 * ap) / (2.0 * prof.N);
  const double area = sphere_area(prof.N);
  detail::OdeState y = {a + c * r_min * r_min, 2.0 * c * r_min,
                        area * q0 * ap * std::pow(r_min, prof.N) / prof.N};

  RadialTrajectory tr;
  tr.r.push_back(0.0);
  tr.u.push_back(a);
  tr.du.push_back(0.0);
  double r = r_min;
  bool diverged = false;
  // pieces split at R where Q may jump
  std::vector<double> stops;
  for (double x : radii) {
    if (x > r) stops.push_back(x);
  }
  std::sort(stops.begin(), stops.end());
  std::vector<double> targets = stops;
  if (prof.R > r && !stops.empty() && prof.R < stops.back()) targets.push_back(prof.R);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (double target : targets) {
    if (diverged) break;
    auto stepper = ode::make_controlled(detail::kOracleAbsTol, detail::kOracleRelTol,
                                        ode::runge_kutta_dopri5<detail::OdeState>());
    const detail::RadialRhs rhs{prof, area, r >= prof.R};
    double dt = std::min(1e-3, target - r);
    while (r < target) {
      if (r + dt > target) dt = target - r;
      const double before = r;
      if (stepper.try_step(rhs, y, r, dt) == ode::success) {
        if (!std::isfinite(y[0]) || std::abs(y[0]) > detail::kBlowUp) {
          diverged = true;
          break;
        }
      }
      if (r == before && dt < 1e-15) fail(ErrorKind::numerical, "radial integrator step underflow");
      if (target - r < 1e-14 * std::max(1.0, target)) r = target;
    }
    const bool is_sample = std::binary_search(stops.begin(), stops.end(), target);
    if (is_sample && !diverged) {
      tr.r.push_back(target);
      tr.u.push_back(y[0]);
      tr.du.push_back(y[1]);
    }
  }
  tr.end = {r, y[0], y[1], y[2], diverged};
  return tr;
}

/// radial_integrate: state at R_out.
inline RadialState radial_integrate(const RadialProfile& prof, double a) {
  return radial_trajectory(prof, a, {prof.outer()}).end;
}

/// Wronskian |S^{N-1}| r^{N-1} (f g' - f' g).
inline double wronskian(double r, double f, double df, double g, double dg, int dim) {
  return sphere_area(dim) * std::pow(r, dim - 1) * (f * dg - df * g);
}

inline double defect_of_state(const RadialProfile& prof, const RadialState& s) {
  const double psi = psi_lambda(s.r, prof.lambda, prof.N);
  const double dpsi = psi_lambda_dr(s.r, prof.lambda, prof.N);
  return wronskian(s.r, psi, dpsi, s.u, s.du, prof.N);
}

inline double far_coefficient_of_state(const RadialProfile& prof, const RadialState& s) {
  const auto phi = regular_solution(s.r, prof.lambda, prof.N);
  return wronskian(s.r, s.u, s.du, phi.value, phi.derivative, prof.N);
}

/// Coefficient of the regular (inadmissible) exterior solution; positive multiple of a for Q = 0.
inline double matching_defect(const RadialProfile& prof, double a) {
  if (!(prof.outer() > prof.R)) fail(ErrorKind::validation, "R_out must exceed R");
  const RadialState s = radial_integrate(prof, a);
  if (s.diverged) return std::numeric_limits<double>::quiet_NaN();
  return defect_of_state(prof, s);
}

/// First radius r > R at which Psi_lambda changes sign, lambda > 0.
inline double kernel_sign_change_radius(double lambda, double R, int dim) {
  if (!(lambda > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double k = std::sqrt(lambda);
  const double step = 0.01;
  double lo = k * R;
  const bool positive = chi(lo, dim) > 0.0;
  while ((chi(lo + step, dim) > 0.0) == positive) lo += step;
  double a = lo;
  double b = lo + step;
  for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
    const double m = 0.5 * (a + b);
    ((chi(m, dim) > 0.0) == positive ? a : b) = m;
  }
  return 0.5 * (a + b) / k;
}

struct ShootResult {
  double a_star = 0.0;
  double far_coefficient = 0.0;
  double defect = 0.0;
  double sign_change_radius = std::numeric_limits<double>::quiet_NaN();
  RadialTrajectory trajectory;           // samples on [0, R_out]
  std::vector<double> other_roots;       // brackets of further sign changes (lower ends)
  std::vector<std::pair<double, double>> defect_trace;
};

struct ShootOptions {
  double a_min = 1e-3;
  double a_max = 1e3;
  int per_decade = 20;
  double rel_tol = 1e-10;
  int samples = 2000;  // trajectory samples on [0, R_out]
};

/// Smallest positive a with vanishing matching defect.
inline ShootResult radial_shoot(const RadialProfile& prof, ShootOptions opts = {}) {
  check_dimension(prof.N);
  if (!(prof.p > 2.0)) fail(ErrorKind::exponent, "oracle needs p > 2");
  if (prof.lambda > 0.0 && !(prof.lambda < lambda_q(prof.N, 2.0 * prof.R))) {
    fail(ErrorKind::threshold, "oracle requires lambda < lambda_Q");
  }
  ShootResult res;
  const int decades = static_cast<int>(std::round(std::log10(opts.a_max / opts.a_min)));
  const int n = decades * opts.per_decade;
  double a_prev = opts.a_min;
  double d_prev = matching_defect(prof, a_prev);
  res.defect_trace.emplace_back(a_prev, d_prev);
  bool found = false;
  double lo = 0.0, hi = 0.0, dlo = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double a = opts.a_min * std::pow(10.0, static_cast<double>(i) / opts.per_decade);
    const double d = matching_defect(prof, a);
    res.defect_trace.emplace_back(a, d);
    if (std::isfinite(d) && std::isfinite(d_prev) && (d_prev > 0.0) != (d > 0.0)) {
      if (!found) {
        found = true;
        lo = a_prev;
        hi = a;
        dlo = d_prev;
      } else {
        res.other_roots.push_back(a_prev);
      }
    }
    a_prev = a;
    d_prev = d;
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no sign change of the matching defect for a in [" << opts.a_min << ", " << opts.a_max
        << "]; trace:";
    for (std::size_t i = 0; i < res.defect_trace.size(); i += 20) {
      msg << " (" << res.defect_trace[i].first << ", " << res.defect_trace[i].second << ")";
    }
    fail(ErrorKind::numerical, msg.str());
  }
  const bool lo_positive = dlo > 0.0;
  for (int it = 0; it < 200 && hi - lo > opts.rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = matching_defect(prof, mid);
    ((d > 0.0) == lo_positive ? lo : hi) = mid;
  }
  res.a_star = 0.5 * (lo + hi);
  std::vector<double> radii;
  const double r_out = prof.outer();
  for (int i = 1; i <= opts.samples; ++i) radii.push_back(r_out * i / opts.samples);
  res.trajectory = radial_trajectory(prof, res.a_star, radii);
  res.defect = defect_of_state(prof, res.trajectory.end);
  res.far_coefficient = far_coefficient_of_state(prof, res.trajectory.end);
  res.sign_change_radius = kernel_sign_change_radius(prof.lambda, prof.R, prof.N);
  return res;
}

/// Exterior value predicted by the integral equation: Psi_lambda(r) |S| int_0^R phi Q u_+^{p-1}.
inline double exterior_representation(const RadialProfile& prof, const ShootResult& res, double r) {
  const auto tr = radial_trajectory(prof, res.a_star, {prof.R});
  return psi_lambda(r, prof.lambda, prof.N) * tr.end.source;
}

}  // namespace helmbranch
