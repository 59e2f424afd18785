#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "helmbranch/fundamental.hpp"
#include "helmbranch/io.hpp"

namespace helmbranch {

/// Outcome of one sampled kernel inequality. `worst` is the largest observed
/// lhs/rhs ratio, so a passing check has worst <= 1.
struct InequalityCheck {
  std::string name;
  int N = 3;
  int samples = 0;
  int violations = 0;
  double worst = 0.0;
  double lambda_at_worst = 0.0;
  double r_at_worst = 0.0;
};

struct KernelCheckOptions {
  int samples = 10000;
  double lambda_min = -100.0;
  double lambda_max = 100.0;
  double r_max = 10.0;
  // window for the uniform lower bound
  double lambda_minus = 4.0;
  double lambda_plus = 0.5;
  double r0 = 1.0;
  std::uint64_t seed = 1;
};

namespace detail {

class CheckAccumulator {
 public:
  CheckAccumulator(std::string name, int dim) { c_.name = std::move(name), c_.N = dim; }

  void add(double lambda, double r, double lhs, double rhs, double tol) {
    ++c_.samples;
    const double ratio = rhs != 0.0 ? lhs / rhs : (lhs > 0.0 ? HUGE_VAL : 0.0);
    if (!(lhs <= rhs * (1.0 + tol))) ++c_.violations;
    if (ratio > c_.worst || c_.samples == 1) {
      c_.worst = ratio;
      c_.lambda_at_worst = lambda;
      c_.r_at_worst = r;
    }
  }

  InequalityCheck result() const { return c_; }

 private:
  InequalityCheck c_;
};

}  // namespace detail

inline std::vector<InequalityCheck> kernel_inequality_checks(int dim, const KernelCheckOptions& opts = {}) {
  check_dimension(dim);
  std::mt19937_64 gen(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto radius = [&] { return std::max(opts.r_max * unit(gen), 1e-6); };
  const double y = y_first_zero(dim);
  const double g = gamma_const(dim);
  const double z = zeta_estimate(dim);
  const double eps = epsilon0(opts.lambda_minus, opts.lambda_plus, opts.r0, dim);
  std::vector<InequalityCheck> out;

  {
    // 0 < Psi_lambda <= Psi_0 for lambda <= 0; positivity is checked as -Psi <= 0 only
    // while Psi is above underflow
    detail::CheckAccumulator upper("nonpositive_upper", dim), pos("nonpositive_positive", dim);
    for (int i = 0; i < opts.samples; ++i) {
      const double lambda = opts.lambda_min * unit(gen);
      const double r = radius();
      const double v = psi_lambda(r, lambda, dim);
      upper.add(lambda, r, v, psi0(r, dim), 1e-14);
      if (std::sqrt(-lambda) * r < 700.0) pos.add(lambda, r, v > 0.0 ? 0.0 : 1.0, 0.0, 0.0);
    }
    out.push_back(upper.result());
    out.push_back(pos.result());
  }
  {
    detail::CheckAccumulator upper("positive_inside_first_zero", dim);
    for (int i = 0; i < opts.samples; ++i) {
      const double lambda = std::max(opts.lambda_max * unit(gen), 1e-6);
      const double r = std::max(unit(gen), 1e-6) * y / std::sqrt(lambda) * (1.0 - 1e-9);
      const double v = psi_lambda(r, lambda, dim);
      upper.add(lambda, r, v > 0.0 ? v : HUGE_VAL, g * psi0(r, dim), 1e-12);
    }
    out.push_back(upper.result());
  }
  {
    detail::CheckAccumulator lower("uniform_lower", dim);
    for (int i = 0; i < opts.samples; ++i) {
      const double lambda = -opts.lambda_minus + (opts.lambda_minus + opts.lambda_plus) * unit(gen);
      const double r = std::max(opts.r0 * unit(gen), 1e-6);
      lower.add(lambda, r, eps * psi0(r, dim), psi_lambda(r, lambda, dim), 1e-12);
    }
    out.push_back(lower.result());
  }
  {
    detail::CheckAccumulator far("far_field", dim);
    for (int i = 0; i < opts.samples; ++i) {
      const double lambda = std::max(opts.lambda_max * unit(gen), 1e-6);
      const double r = radius();
      const double bound = g * psi0(r, dim) + z * std::pow(lambda, (dim - 3) / 4.0) * std::pow(r, (1.0 - dim) / 2.0);
      far.add(lambda, r, std::abs(psi_lambda(r, lambda, dim)), bound, 1e-12);
    }
    out.push_back(far.result());
  }
  {
    // jump over delta lambda = 1e-6 against the allowance 1e-6, lambda in [-10, 10]
    detail::CheckAccumulator cont("continuity", dim);
    for (double r : {0.01, 0.5, 1.0, 3.0, 10.0}) {
      for (int i = 0; i <= 200; ++i) {
        const double lambda = -10.0 + 0.1 * i;
        cont.add(lambda, r, std::abs(psi_lambda(r, lambda + 1e-6, dim) - psi_lambda(r, lambda, dim)), 1e-6, 0.0);
      }
    }
    out.push_back(cont.result());
  }
  return out;
}

inline void write_kernel_checks_csv(std::ostream& out, const std::vector<InequalityCheck>& checks) {
  out << "check,N,samples,violations,worst_ratio,lambda_at_worst,r_at_worst\n";
  for (const auto& c : checks) {
    out << c.name << ',' << c.N << ',' << c.samples << ',' << c.violations << ',' << fmt17(c.worst) << ','
        << fmt17(c.lambda_at_worst) << ',' << fmt17(c.r_at_worst) << '\n';
  }
}

}  // namespace helmbranch
