#pragma once

// Bessel functions J, Y, K, I of the orders needed by the dimensions 3, 4 and 5:
// nu in {0, 1/2, 1, 3/2}. Half-integer orders reduce to elementary functions.
// Integer orders are evaluated from their power series for small arguments and
// from the Hankel asymptotic expansions for large arguments:
//
//   J_n, Y_n : series for t <= 12, asymptotic for t > 12
//   K_n      : series for t <= 2, trapezoidal rule on the integral
//              K_n(t) = int_0^inf exp(-t cosh s) cosh(n s) ds for 2 < t <= 12,
//              asymptotic for t > 12
//   I_n      : series for t <= 30, asymptotic for t > 30
//
// K_nu(t) underflows to zero for t above ~700.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "helmbranch/error.hpp"

namespace helmbranch::specfun {

enum class BesselKind { J, Y, K, I };

inline const char* to_string(BesselKind kind) {
  switch (kind) {
    case BesselKind::J: return "J";
    case BesselKind::Y: return "Y";
    case BesselKind::K: return "K";
    case BesselKind::I: return "I";
  }
  return "?";
}

/// Bessel order nu = twice / 2, restricted to {0, 1/2, 1, 3/2}.
class BesselOrder {
 public:
  static BesselOrder from_twice(int twice) {
    if (twice < 0 || twice > 3) {
      fail(ErrorKind::unsupported,
           "unsupported Bessel order " + std::to_string(twice) + "/2");
    }
    return BesselOrder(twice);
  }

  static BesselOrder from_value(double nu) {
    const double twice = 2.0 * nu;
    const double rounded = std::round(twice);
    if (!(std::abs(twice - rounded) < 1e-12)) {
      std::ostringstream msg;
      msg << "unsupported Bessel order " << nu;
      fail(ErrorKind::unsupported, msg.str());
    }
    return from_twice(static_cast<int>(rounded));
  }

  /// Order (N-2)/2 of the fundamental solution in dimension N.
  static BesselOrder for_dimension(int dim) { return from_twice(dim - 2); }

  int twice() const { return twice_; }
  double value() const { return 0.5 * twice_; }
  bool half_integer() const { return twice_ % 2 != 0; }

  friend bool operator==(BesselOrder, BesselOrder) = default;

 private:
  explicit BesselOrder(int twice) : twice_(twice) {}
  int twice_;
};

namespace detail {

inline constexpr double kEulerGamma = std::numbers::egamma;
inline constexpr double kPi = std::numbers::pi;

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// digamma at a positive integer m: psi(m) = -gamma + H_{m-1}
inline double digamma_int(int m) {
  double h = 0.0;
  for (int i = 1; i < m; ++i) h += 1.0 / i;
  return -kEulerGamma + h;
}

inline double series_j(int n, double t) {
  const double half = 0.5 * t;
  const double q = -half * half;
  double term = std::pow(half, n) / factorial(n);
  double sum = term;
  double largest = std::abs(term);
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * static_cast<double>(k + n));
    sum += term;
    largest = std::max(largest, std::abs(term));
    if (std::abs(term) < 1e-18 * largest && k > half) break;
  }
  return sum;
}

inline double series_i(int n, double t) {
  const double half = 0.5 * t;
  const double q = half * half;
  double term = std::pow(half, n) / factorial(n);
  double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (k * static_cast<double>(k + n));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

inline double series_y(int n, double t) {
  const double half = 0.5 * t;
  const double q = half * half;
  double finite = 0.0;
  for (int k = 0; k < n; ++k) {
    finite += factorial(n - k - 1) / factorial(k) * std::pow(q, k);
  }
  finite *= -std::pow(half, -n) / kPi;

  double coef = std::pow(half, n) / factorial(n);  // (t/2)^n (-q)^k / (k!(n+k)!)
  double sum = 0.0;
  double largest = 0.0;
  double psi_a = digamma_int(1);
  double psi_b = digamma_int(n + 1);
  for (int k = 0; k < 500; ++k) {
    if (k > 0) {
      coef *= -q / (k * static_cast<double>(k + n));
      psi_a += 1.0 / k;
      psi_b += 1.0 / (k + n);
    }
    const double term = (psi_a + psi_b) * coef;
    sum += term;
    largest = std::max(largest, std::abs(term));
    if (k > half && std::abs(term) < 1e-18 * largest) break;
  }
  return finite + 2.0 / kPi * std::log(half) * series_j(n, t) - sum / kPi;
}

inline double series_k(int n, double t) {
  const double half = 0.5 * t;
  const double q = half * half;
  double finite = 0.0;
  for (int k = 0; k < n; ++k) {
    finite += factorial(n - k - 1) / factorial(k) * std::pow(-q, k);
  }
  finite *= 0.5 * std::pow(half, -n);

  double coef = std::pow(half, n) / factorial(n);
  double sum = 0.0;
  double psi_a = digamma_int(1);
  double psi_b = digamma_int(n + 1);
  for (int k = 0; k < 500; ++k) {
    if (k > 0) {
      coef *= q / (k * static_cast<double>(k + n));
      psi_a += 1.0 / k;
      psi_b += 1.0 / (k + n);
    }
    const double term = (psi_a + psi_b) * coef;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return finite - sign * std::log(half) * series_i(n, t) + sign * 0.5 * sum;
}

inline double integral_k(int n, double t) {
  constexpr double step = 0.1;
  double sum = 0.5 * std::exp(-t);
  for (int k = 1; k < 100000; ++k) {
    const double s = k * step;
    const double term = std::exp(-t * std::cosh(s)) * std::cosh(n * s);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return step * sum;
}

// Hankel expansion coefficients a_k(nu) / t^k are generated on the fly.
// Summation stops at the smallest term of the divergent series.
struct Asymptotic {
  double p = 0.0;  // sum of even terms with alternating sign
  double q = 0.0;  // sum of odd terms with alternating sign
  double plain = 0.0;
  double alternating = 0.0;
};

inline Asymptotic hankel_sums(double nu, double t) {
  const double mu = 4.0 * nu * nu;
  Asymptotic out;
  double term = 1.0;  // a_k / t^k
  double previous = HUGE_VAL;
  out.p = 1.0;
  out.plain = 1.0;
  out.alternating = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * t);
    if (std::abs(next) >= previous && std::abs(next) > 0.0) break;
    previous = std::abs(next);
    term = next;
    out.plain += term;
    out.alternating += (k % 2 == 0) ? term : -term;
    if (k % 2 == 0) {
      out.p += ((k / 2) % 2 == 0) ? term : -term;
    } else {
      out.q += (((k - 1) / 2) % 2 == 0) ? term : -term;
    }
    if (std::abs(term) < 1e-17) break;
  }
  return out;
}

inline double asymptotic_jy(BesselKind kind, double nu, double t) {
  const Asymptotic s = hankel_sums(nu, t);
  const double omega = t - (0.5 * nu + 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * t));
  if (kind == BesselKind::J) return amp * (s.p * std::cos(omega) - s.q * std::sin(omega));
  return amp * (s.p * std::sin(omega) + s.q * std::cos(omega));
}

inline double asymptotic_k(double nu, double t) {
  return std::sqrt(kPi / (2.0 * t)) * std::exp(-t) * hankel_sums(nu, t).plain;
}

inline double asymptotic_i(double nu, double t) {
  return std::exp(t) / std::sqrt(2.0 * kPi * t) * hankel_sums(nu, t).alternating;
}

inline double integer_order(BesselKind kind, int n, double t) {
  switch (kind) {
    case BesselKind::J:
      return t <= 12.0 ? series_j(n, t) : asymptotic_jy(kind, n, t);
    case BesselKind::Y:
      return t <= 12.0 ? series_y(n, t) : asymptotic_jy(kind, n, t);
    case BesselKind::K:
      if (t <= 2.0) return series_k(n, t);
      if (t <= 12.0) return integral_k(n, t);
      return asymptotic_k(n, t);
    case BesselKind::I:
      return t <= 30.0 ? series_i(n, t) : asymptotic_i(n, t);
  }
  return 0.0;
}

// sin(t)/t - cos(t) and cosh(t) - sinh(t)/t without cancellation at small t.
inline double sinc_minus_cos(double t) {
  if (t >= 0.5) return std::sin(t) / t - std::cos(t);
  const double t2 = t * t;
  double power = t2;
  double fact = 6.0;  // (2k+1)!
  double sum = 0.0;
  for (int k = 1; k < 30; ++k) {
    const double term = 2.0 * k * power / fact;
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) break;
    power *= t2;
    fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
  }
  return sum;
}

inline double cosh_minus_sinhc(double t) {
  if (t >= 0.5) return std::cosh(t) - std::sinh(t) / t;
  const double t2 = t * t;
  double power = t2;
  double fact = 6.0;
  double sum = 0.0;
  for (int k = 1; k < 30; ++k) {
    const double term = 2.0 * k * power / fact;
    sum += term;
    if (term < 1e-18 * sum) break;
    power *= t2;
    fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
  }
  return sum;
}

inline double half_integer_order(BesselKind kind, int twice, double t) {
  const double s = std::sqrt(2.0 / (kPi * t));
  const double kpref = std::sqrt(kPi / (2.0 * t)) * std::exp(-t);
  switch (twice) {
    case -1:
      switch (kind) {
        case BesselKind::J: return s * std::cos(t);
        case BesselKind::Y: return s * std::sin(t);
        case BesselKind::K: return kpref;
        case BesselKind::I: return s * std::cosh(t);
      }
      break;
    case 1:
      switch (kind) {
        case BesselKind::J: return s * std::sin(t);
        case BesselKind::Y: return -s * std::cos(t);
        case BesselKind::K: return kpref;
        case BesselKind::I: return s * std::sinh(t);
      }
      break;
    case 3:
      switch (kind) {
        case BesselKind::J: return s * sinc_minus_cos(t);
        case BesselKind::Y: return -s * (std::cos(t) / t + std::sin(t));
        case BesselKind::K: return kpref * (1.0 + 1.0 / t);
        case BesselKind::I: return s * cosh_minus_sinhc(t);
      }
      break;
    default:
      break;
  }
  fail(ErrorKind::unsupported, "unsupported half-integer order");
}

inline void check_argument(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "Bessel argument must be positive and finite, got " << t;
    fail(ErrorKind::domain, msg.str());
  }
}

/// Evaluation for twice in {-1, 0, 1, 2, 3}; order -1/2 appears in the
/// derivative identities of the fundamental solution.
inline double bessel_signed(BesselKind kind, int twice, double t) {
  check_argument(t);
  if (twice % 2 != 0) return half_integer_order(kind, twice, t);
  if (twice == 0 || twice == 2) return integer_order(kind, twice / 2, t);
  fail(ErrorKind::unsupported, "unsupported Bessel order " + std::to_string(twice) + "/2");
}

}  // namespace detail

/// J_nu, Y_nu, K_nu or I_nu at t > 0.
inline double bessel(BesselKind kind, BesselOrder nu, double t) {
  return detail::bessel_signed(kind, nu.twice(), t);
}

inline double bessel(BesselKind kind, double nu, double t) {
  return bessel(kind, BesselOrder::from_value(nu), t);
}

/// First positive zero of Y_nu, bracketed by a forward scan and refined by
/// bisection to an absolute width below 1e-14.
inline double first_y_zero(BesselOrder nu) {
  constexpr double scan_step = 0.05;
  constexpr double scan_end = 20.0;
  double lo = scan_step;
  double f_lo = bessel(BesselKind::Y, nu, lo);
  double hi = lo;
  bool bracketed = false;
  while (hi < scan_end) {
    hi = lo + scan_step;
    const double f_hi = bessel(BesselKind::Y, nu, hi);
    if (f_lo < 0.0 && f_hi >= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (!bracketed) {
    std::ostringstream msg;
    msg << "no sign change of Y_" << nu.value() << " on [" << scan_step << ", " << scan_end
        << "]";
    fail(ErrorKind::numerical, msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bessel(BesselKind::Y, nu, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace helmbranch::specfun
