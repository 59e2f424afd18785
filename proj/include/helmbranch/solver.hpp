#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "helmbranch/operator.hpp"
#include "helmbranch/spectral.hpp"

namespace helmbranch {

struct SolveConfig {
  double p = 4.0;
  double newton_tol = 1e-10;
  int max_newton = 50;
  double damping = 0.5;
  int max_backtracks = 10;
  double min_rcond = 1e-14;
};

/// p range checks: (A2) needs 2 < p < 2N/(N-2); (A1) additionally p < 2(N-1)/(N-2).
struct ExponentReport {
  bool subcritical = false;
  bool a1_range = false;
};

inline ExponentReport check_exponent(double p, int dim) {
  ExponentReport r;
  r.subcritical = p > 2.0 && p < critical_exponent(dim);
  r.a1_range = p > 2.0 && p < 2.0 * (dim - 1.0) / (dim - 2.0);
  return r;
}

template <int N>
struct SolveResult {
  Field<N> u;
  double t = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool admissible = false;
};

/// Componentwise u_+^q.
inline Eigen::VectorXd positive_power(const Eigen::VectorXd& u, double q) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out[i] = u[i] > 0.0 ? std::exp(q * std::log(u[i])) : 0.0;
  }
  return out;
}

inline bool admissible_values(const Eigen::VectorXd& u) { return u.size() > 0 && u.minCoeff() > 0.0; }

/// admissible_check: strictly positive on every support cell.
template <int N>
bool admissible_check(const Field<N>& u) {
  return admissible_values(u.values);
}

namespace detail {

inline Eigen::VectorXd residual_values(const Eigen::MatrixXd& a, const Eigen::VectorXd& u, double t,
                                       double p) {
  Eigen::VectorXd s = positive_power(u, p - 1.0);
  s.array() += t;
  return u - a * s;
}

inline Eigen::MatrixXd jacobian_values(const Eigen::MatrixXd& a, const Eigen::VectorXd& u, double p) {
  const Eigen::VectorXd d = (p - 1.0) * positive_power(u, p - 2.0);
  Eigen::MatrixXd j = -(a * d.asDiagonal());
  j.diagonal().array() += 1.0;
  return j;
}

inline double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

/// r = u - K_lambda(u_+^{p-1} + t).
template <int N>
Field<N> residual(const DiscreteOperator<N>& op, const Field<N>& u, double t, const SolveConfig& cfg) {
  check_same_grid<N>(op.grid, u.grid);
  return Field<N>(op.grid, detail::residual_values(op.matrix, u.values, t, cfg.p));
}

/// J = I - A diag((p-1) u_+^{p-2}).
template <int N>
Eigen::MatrixXd jacobian(const DiscreteOperator<N>& op, const Field<N>& u, const SolveConfig& cfg) {
  check_same_grid<N>(op.grid, u.grid);
  return detail::jacobian_values(op.matrix, u.values, cfg.p);
}

/// Damped Newton iteration on the residual; dense LU per step.
template <int N>
SolveResult<N> newton_solve(const DiscreteOperator<N>& op, const Field<N>& u0, double t,
                            const SolveConfig& cfg) {
  check_same_grid<N>(op.grid, u0.grid);
  if (!u0.values.allFinite()) fail(ErrorKind::validation, "initial guess is not finite");
  Eigen::VectorXd u = u0.values;
  Eigen::VectorXd r = detail::residual_values(op.matrix, u, t, cfg.p);
  double rn = detail::sup_norm(r);
  int it = 0;
  while (rn > cfg.newton_tol) {
    if (it >= cfg.max_newton) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << cfg.max_newton << " iterations at lambda=" << op.lambda
          << " (residual " << rn << ")";
      fail(ErrorKind::convergence, msg.str());
    }
    ++it;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(detail::jacobian_values(op.matrix, u, cfg.p));
    const double rc = lu.rcond();
    if (!(rc > cfg.min_rcond)) {
      std::ostringstream msg;
      msg << "singular Newton Jacobian at lambda=" << op.lambda << " (rcond " << rc
          << "), fold suspected";
      fail(ErrorKind::fold, msg.str());
    }
    const Eigen::VectorXd step = lu.solve(r);
    double alpha = 1.0;
    Eigen::VectorXd trial = u - step;
    Eigen::VectorXd rt = detail::residual_values(op.matrix, trial, t, cfg.p);
    double tn = detail::sup_norm(rt);
    for (int b = 0; b < cfg.max_backtracks && !(tn < rn); ++b) {
      alpha *= cfg.damping;
      trial = u - alpha * step;
      rt = detail::residual_values(op.matrix, trial, t, cfg.p);
      tn = detail::sup_norm(rt);
    }
    if (!std::isfinite(tn)) fail(ErrorKind::numerical, "Newton iterate became non-finite");
    u = std::move(trial);
    r = std::move(rt);
    rn = tn;
  }
  SolveResult<N> out;
  out.u = Field<N>(op.grid, u);
  out.t = t;
  out.residual = rn;
  out.iterations = it;
  out.admissible = admissible_values(u);
  return out;
}

/// c f1 with c = nu1^{-1/(p-2)}, the amplitude balancing c = nu1 c^{p-1}.
template <int N>
Field<N> initial_guess(const EigenPair<N>& pair, const SolveConfig& cfg) {
  if (!(cfg.p > 2.0)) fail(ErrorKind::exponent, "p must exceed 2");
  const double c = std::pow(pair.nu1, -1.0 / (cfg.p - 2.0));
  return Field<N>(pair.f1.grid, c * pair.f1.values);
}

/// Eigenpair of the operator itself, then the scaled eigenfunction.
template <int N>
Field<N> initial_guess(const DiscreteOperator<N>& op, const SolveConfig& cfg) {
  return initial_guess<N>(kr_eigenpair(op), cfg);
}

struct HomotopyStep {
  double t = 0.0;
  double sup_norm = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool nonnegative = false;
};

template <int N>
struct HomotopyResult {
  SolveResult<N> solution;
  std::vector<HomotopyStep> steps;
  std::vector<std::string> warnings;
};

struct HomotopyMonitors {
  double kappa2 = HUGE_VAL;  // t <= kappa2 * (1 + slack) is expected
  double sup_bound = HUGE_VAL;
  double slack = 0.1;
};

/// Warm-started solves of u = K_lambda(u_+^{p-1} + t) along a strictly decreasing
/// schedule ending at 0. Monitor violations are recorded as warnings.
template <int N>
HomotopyResult<N> homotopy_solve(const DiscreteOperator<N>& op, const std::vector<double>& schedule,
                                 const Field<N>& u0, const SolveConfig& cfg,
                                 const HomotopyMonitors& monitors = {}) {
  if (schedule.empty() || schedule.back() != 0.0) {
    fail(ErrorKind::validation, "t schedule must end at 0");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 0.0) fail(ErrorKind::validation, "t schedule must be nonnegative");
    if (i > 0 && !(schedule[i] < schedule[i - 1])) {
      fail(ErrorKind::validation, "t schedule must be strictly decreasing");
    }
  }
  HomotopyResult<N> out;
  Field<N> u = u0;
  for (double t : schedule) {
    auto res = newton_solve<N>(op, u, t, cfg);
    HomotopyStep step;
    step.t = t;
    step.sup_norm = detail::sup_norm(res.u.values);
    step.residual = res.residual;
    step.iterations = res.iterations;
    step.nonnegative = res.u.values.minCoeff() >= 0.0;
    if (step.nonnegative && t > monitors.kappa2 * (1.0 + monitors.slack)) {
      std::ostringstream msg;
      msg << "t=" << t << " exceeds kappa2 bound " << monitors.kappa2;
      out.warnings.push_back(msg.str());
    }
    if (step.sup_norm + t > monitors.sup_bound) {
      std::ostringstream msg;
      msg << "sup norm " << step.sup_norm << " + t exceeds bound " << monitors.sup_bound;
      out.warnings.push_back(msg.str());
    }
    out.steps.push_back(step);
    u = res.u;
    out.solution = std::move(res);
  }
  return out;
}

struct SeedOptions {
  double p_start = 2.5;      // exponent where the spectral guess is near exact
  double min_dp = 1e-3;
};

/// Spectral guess plus Newton at the target exponent. If that fails, the solution is
/// carried from p_start to cfg.p with warm starts, rescaling each guess by the scalar
/// amplitude s^{p-2} = <u, u> / <u, A u_+^{p-1}>.
template <int N>
SolveResult<N> seed_solve(const DiscreteOperator<N>& op, const SolveConfig& cfg, SeedOptions opts = {}) {
  const auto pair = kr_eigenpair(op);
  try {
    return newton_solve<N>(op, initial_guess<N>(pair, cfg), 0.0, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::convergence && e.kind() != ErrorKind::fold && e.kind() != ErrorKind::numerical) throw;
    if (!(cfg.p > opts.p_start)) throw;
  }
  SolveConfig c = cfg;
  c.p = opts.p_start;
  auto res = newton_solve<N>(op, initial_guess<N>(pair, c), 0.0, c);
  double p = opts.p_start;
  double dp = 0.25 * (cfg.p - opts.p_start);
  while (p < cfg.p) {
    c.p = std::min(cfg.p, p + dp);
    const Eigen::VectorXd& u = res.u.values;
    const double den = u.dot(op.matrix * positive_power(u, c.p - 1.0));
    if (!(den > 0.0)) fail(ErrorKind::numerical, "exponent continuation lost positivity");
    const double scale = std::pow(u.squaredNorm() / den, 1.0 / (c.p - 2.0));
    try {
      res = newton_solve<N>(op, Field<N>(op.grid, scale * u), 0.0, c);
      p = c.p;
      dp *= 1.5;
    } catch (const Error& e) {
      dp *= 0.5;
      if (dp < opts.min_dp) {
        std::ostringstream msg;
        msg << "exponent continuation stalled at p=" << p << " towards p=" << cfg.p << ": " << e.what();
        fail(e.kind(), msg.str());
      }
    }
  }
  return res;
}

}  // namespace helmbranch
