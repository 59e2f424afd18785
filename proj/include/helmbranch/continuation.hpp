#pragma once

// Pseudo-arclength continuation of u = K_lambda(u_+^{p-1}) in the coordinates
// (sigma, u), sigma = sign(lambda) sqrt|lambda|, with the metric
// d sigma^2 + |du|^2 / M. The kernel is only Hoelder-1/2 in lambda at 0^-,
// while it is Lipschitz in sigma, so steps are measured in sigma.
//
// Predictor: tangent at the seed, secant afterwards. Corrector: chord Newton on
// the bordered system
//
//   [ J      G_sigma ] [du     ]     [ G ]
//   [ c_u^T  c_sigma ] [dsigma ] = - [ n ]
//
// with (c_u, c_sigma) = (tau_u / M, tau_sigma) on the arclength hyperplane, or
// (0, 1) for natural-parameter steps (steep tangent, or landing on lambda_end).

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

#include "helmbranch/fundamental.hpp"
#include "helmbranch/io.hpp"
#include "helmbranch/operator.hpp"
#include "helmbranch/rays.hpp"
#include "helmbranch/solver.hpp"
#include "helmbranch/spectral.hpp"

namespace helmbranch {

struct ContinuationConfig {
  SolveConfig solve;
  double max_step = 0.0;       // max |lambda gap| and max arclength; 0 selects 0.1 (end - start)
  double min_step = 1e-4;      // arclength underflow bound
  double initial_step = 0.0;   // 0 selects max_step / 2
  bool adaptive = true;        // false: fixed arclength steps of initial_step
  double grow = 1.3;
  int grow_after = 3;
  double natural_threshold = 0.99;
  int max_points = 100000;
  int max_corrector = 12;
  double delta0 = 0.0;         // sup-norm monitor; 0 disables
  std::vector<double> s_list = {4.0};
  RayOptions rays;
  bool diagnostics = true;
  std::size_t capacity = kDefaultCapacity;
  std::string dump_dir;        // per-point field CSVs when non-empty
};

template <int N>
struct BranchPoint {
  double lambda = 0.0;
  double sigma = 0.0;
  Field<N> u;
  double sup_norm = 0.0;
  double min_on_support = 0.0;
  double residual = 0.0;
  double tangent_sigma = 0.0;
  Eigen::VectorXd tangent_u;
  bool natural_step = false;
  std::map<double, double> ls_norms;
  std::optional<RaySamples> rays;
  SignReport signs;
  double sign_change_radius = std::numeric_limits<double>::quiet_NaN();
};

struct StepStats {
  int accepted = 0;
  int rejected = 0;
  int corrector_iterations = 0;
  int factorizations = 0;
  int natural_steps = 0;
  double min_step_used = HUGE_VAL;
  double max_step_used = 0.0;
};

template <int N>
struct Branch {
  std::vector<BranchPoint<N>> points;
  double lambda_start = 0.0;
  double lambda_end = 0.0;
  bool complete = false;
  std::string diagnostic;
  std::vector<std::size_t> folds;  // indices where tau_sigma changes sign
  StepStats stats;
};

namespace detail {

template <int N>
struct System {
  const GridPtr<N>& grid;
  double p;
  std::size_t capacity;

  Eigen::MatrixXd matrix(double sigma) const {
    return detail::matrix_from_table<N>(*grid, kernel_table<N>(lambda_of_sigma(sigma), *grid),
                                        grid->weights());
  }
  Eigen::MatrixXd dmatrix(double sigma) const {
    return detail::matrix_from_table<N>(*grid, kernel_table<N>(lambda_of_sigma(sigma), *grid, true),
                                        grid->weights());
  }
};

inline double metric_norm(double ds, const Eigen::VectorXd& du) {
  return std::sqrt(ds * ds + du.squaredNorm() / static_cast<double>(du.size()));
}

}  // namespace detail

template <int N>
void fill_diagnostics(BranchPoint<N>& pt, const WeightProfile<N>& q, double p,
                      const std::type_identity_t<std::vector<Point<N>>>& dirs, const ContinuationConfig& cfg) {
  pt.sup_norm = pt.u.values.cwiseAbs().maxCoeff();
  pt.min_on_support = pt.u.values.minCoeff();
  if (!cfg.diagnostics) return;
  RaySamples s = sample_rays<N>(q, pt.u, pt.lambda, p, dirs, cfg.rays);
  pt.signs = sign_report(s);
  for (double se : cfg.s_list) pt.ls_norms[se] = ls_norm(s, se, N);
  if (pt.lambda > 0.0) pt.sign_change_radius = pt.signs.max_first_change;
  pt.rays = std::move(s);
}

/// Global branch of admissible solutions over [lambda_start, lambda_end].
template <int N>
Branch<N> continue_branch(const WeightProfile<N>& q, GridPtr<N> grid, double lambda_start,
                          double lambda_end, ContinuationConfig cfg) {
  const double p = cfg.solve.p;
  const double lq = lambda_q(N, q.r_q());
  if (!(lambda_end < lq)) {
    std::ostringstream msg;
    msg << "lambda_end=" << lambda_end << " must lie below lambda_Q=" << lq;
    fail(ErrorKind::threshold, msg.str());
  }
  if (lambda_start > lambda_end) fail(ErrorKind::validation, "lambda_start must not exceed lambda_end");
  detail::check_capacity(*grid, cfg.capacity);
  for (double se : cfg.s_list) {
    if (!(se > 2.0 * N / (N - 1.0))) {
      std::ostringstream msg;
      msg << "s=" << se << " must exceed 2N/(N-1)=" << 2.0 * N / (N - 1.0);
      fail(ErrorKind::exponent, msg.str());
    }
  }
  const double range = lambda_end - lambda_start;
  if (cfg.max_step <= 0.0) cfg.max_step = range > 0.0 ? 0.1 * range : 1.0;
  if (cfg.initial_step <= 0.0) cfg.initial_step = 0.5 * cfg.max_step;
  const auto dirs = ray_directions<N>(cfg.rays.rays);
  const detail::System<N> sys{grid, p, cfg.capacity};
  const auto m = static_cast<Eigen::Index>(grid->size());
  const double inv_m = 1.0 / static_cast<double>(m);

  Branch<N> branch;
  branch.lambda_start = lambda_start;
  branch.lambda_end = lambda_end;

  auto accept_checks = [&](const Eigen::VectorXd& u, double lambda, std::string& why) {
    if (!(lambda < lq)) {
      why = "lambda reached lambda_Q";
      return false;
    }
    if (!admissible_values(u)) {
      why = "inadmissible (nonpositive on supp Q)";
      return false;
    }
    if (cfg.delta0 > 0.0 && !(u.cwiseAbs().maxCoeff() >= cfg.delta0)) {
      why = "sup norm below delta0";
      return false;
    }
    return true;
  };

  auto dump = [&](const BranchPoint<N>& pt, std::size_t index) {
    if (cfg.dump_dir.empty()) return;
    std::filesystem::create_directories(cfg.dump_dir);
    std::ostringstream name;
    name << cfg.dump_dir << "/point_" << index << ".csv";
    write_field_csv<N>(name.str(), pt.u);
  };

  // seed
  BranchPoint<N> seed;
  try {
    const auto op = assemble_K<N>(lambda_start, grid, lq, cfg.capacity);
    auto res = seed_solve<N>(op, cfg.solve);
    std::string why;
    if (!accept_checks(res.u.values, lambda_start, why)) fail(ErrorKind::seed, why);
    seed.u = std::move(res.u);
    seed.residual = res.residual;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::seed || e.kind() == ErrorKind::capacity) throw;
    fail(ErrorKind::seed, std::string("seed solve at lambda_start failed: ") + e.what());
  }
  seed.lambda = lambda_start;
  seed.sigma = sigma_of_lambda(lambda_start);

  // tangent from the linearisation: J z = -G_sigma, direction (1, z) normalised
  auto linear_tangent = [&](BranchPoint<N>& pt) {
    const Eigen::MatrixXd a = sys.matrix(pt.sigma);
    const Eigen::MatrixXd da = sys.dmatrix(pt.sigma);
    const Eigen::VectorXd g_sigma = -(da * positive_power(pt.u.values, p - 1.0));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(detail::jacobian_values(a, pt.u.values, p));
    ++branch.stats.factorizations;
    const Eigen::VectorXd z = -lu.solve(g_sigma);
    const double nrm = detail::metric_norm(1.0, z);
    pt.tangent_sigma = 1.0 / nrm;
    pt.tangent_u = z / nrm;
  };
  linear_tangent(seed);
  fill_diagnostics<N>(seed, q, p, dirs, cfg);
  dump(seed, 0);
  branch.points.push_back(std::move(seed));
  branch.stats.accepted = 1;

  const double sigma_end = sigma_of_lambda(lambda_end);
  if (lambda_start == lambda_end) {
    branch.complete = true;
    return branch;
  }

  double ds = cfg.adaptive ? std::min(cfg.initial_step, cfg.max_step) : cfg.initial_step;
  int successes = 0;
  while (true) {
    if (static_cast<int>(branch.points.size()) >= cfg.max_points) {
      branch.diagnostic = "maximum number of points reached";
      return branch;
    }
    const BranchPoint<N>& last = branch.points.back();
    double tau_s = last.tangent_sigma;
    Eigen::VectorXd tau_u = last.tangent_u;

    // predictor; adaptive runs also cap the lambda gap, fixed-step runs keep the
    // arclength step exactly
    double step = ds;
    double sigma_p = last.sigma + step * tau_s;
    for (int k = 0; cfg.adaptive && k < 8; ++k) {
      const double gap = std::abs(lambda_of_sigma(sigma_p) - last.lambda);
      if (gap <= cfg.max_step) break;
      step *= 0.9 * cfg.max_step / gap;
      sigma_p = last.sigma + step * tau_s;
    }
    bool natural = std::abs(tau_s) > cfg.natural_threshold;
    bool landing = false;
    // d Psi / d sigma jumps at sigma = 0, so the branch gets a node there
    bool kink = false;
    if (tau_s > 0.0 && sigma_p >= sigma_end - 1e-12) {
      natural = true;
      landing = true;
      sigma_p = sigma_end;
    }
    if (last.sigma < 0.0 && sigma_p > 0.0) {
      natural = true;
      landing = false;
      kink = true;
      sigma_p = 0.0;
    }
    Eigen::VectorXd u_p;
    if (natural) {
      const double dsig = sigma_p - last.sigma;
      u_p = last.u.values + (tau_s != 0.0 ? dsig / tau_s : 0.0) * tau_u;
    } else {
      u_p = last.u.values + step * tau_u;
    }

    // corrector
    double sigma = sigma_p;
    Eigen::VectorXd u = u_p;
    bool converged = false;
    std::string why = "corrector did not converge";
    double res_norm = HUGE_VAL;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
    bool fresh = false;
    double prev_norm = HUGE_VAL;
    for (int it = 0; it <= cfg.max_corrector; ++it) {
      const Eigen::MatrixXd a = sys.matrix(sigma);
      const Eigen::VectorXd up = positive_power(u, p - 1.0);
      const Eigen::VectorXd g = u - a * up;
      const double n = natural ? (sigma - sigma_p)
                               : tau_s * (sigma - sigma_p) + inv_m * tau_u.dot(u - u_p);
      res_norm = g.cwiseAbs().maxCoeff();
      if (!std::isfinite(res_norm)) {
        why = "non-finite corrector residual";
        break;
      }
      if (res_norm <= cfg.solve.newton_tol && std::abs(n) <= 1e-10) {
        converged = true;
        break;
      }
      if (it == cfg.max_corrector) break;
      const bool stalled = res_norm > 0.5 * prev_norm;
      if (stalled && fresh && res_norm > prev_norm) {
        why = "corrector diverged";
        break;
      }
      if (!lu || stalled) {
        const Eigen::MatrixXd da = sys.dmatrix(sigma);
        Eigen::MatrixXd b(m + 1, m + 1);
        b.topLeftCorner(m, m) = detail::jacobian_values(a, u, p);
        b.topRightCorner(m, 1) = -(da * up);
        if (natural) {
          b.bottomLeftCorner(1, m).setZero();
          b(m, m) = 1.0;
        } else {
          b.bottomLeftCorner(1, m) = inv_m * tau_u.transpose();
          b(m, m) = tau_s;
        }
        lu.emplace(b);
        ++branch.stats.factorizations;
        fresh = true;
        if (!(lu->rcond() > cfg.solve.min_rcond)) {
          why = "singular bordered system";
          break;
        }
      } else {
        fresh = false;
      }
      prev_norm = res_norm;
      Eigen::VectorXd rhs(m + 1);
      rhs.head(m) = g;
      rhs[m] = n;
      const Eigen::VectorXd delta = lu->solve(rhs);
      u -= delta.head(m);
      sigma -= delta[m];
      ++branch.stats.corrector_iterations;
    }

    const double lambda = lambda_of_sigma(sigma);
    if (converged) {
      if (cfg.adaptive && std::abs(lambda - last.lambda) > cfg.max_step * (1.0 + 1e-9)) {
        converged = false;
        why = "lambda gap exceeds max_step";
      } else if (!accept_checks(u, lambda, why)) {
        converged = false;
      }
    }

    if (!converged) {
      ++branch.stats.rejected;
      successes = 0;
      if (!cfg.adaptive) {
        branch.diagnostic = "fixed-step corrector failure at lambda~" +
                            std::to_string(lambda_of_sigma(sigma_p)) + ": " + why;
        return branch;
      }
      ds *= 0.5;
      if (ds < cfg.min_step) {
        branch.diagnostic = "step underflow near lambda=" + std::to_string(last.lambda) + ": " + why;
        return branch;
      }
      continue;
    }

    BranchPoint<N> pt;
    pt.lambda = landing ? lambda_end : lambda;
    pt.sigma = sigma;
    pt.u = Field<N>(grid, u);
    pt.residual = res_norm;
    pt.natural_step = natural;
    // secant tangent, oriented along the previous tangent
    Eigen::VectorXd du = u - last.u.values;
    double dsig = sigma - last.sigma;
    double nrm = detail::metric_norm(dsig, du);
    if (nrm > 0.0) {
      pt.tangent_sigma = dsig / nrm;
      pt.tangent_u = du / nrm;
    } else {
      pt.tangent_sigma = tau_s;
      pt.tangent_u = tau_u;
    }
    if ((pt.tangent_sigma > 0.0) != (tau_s > 0.0) && tau_s != 0.0) {
      branch.folds.push_back(branch.points.size());
    }
    if (kink) {
      pt.lambda = 0.0;
      pt.sigma = 0.0;
      linear_tangent(pt);
    }
    const double used = nrm;
    branch.stats.min_step_used = std::min(branch.stats.min_step_used, used);
    branch.stats.max_step_used = std::max(branch.stats.max_step_used, used);
    if (natural) ++branch.stats.natural_steps;
    fill_diagnostics<N>(pt, q, p, dirs, cfg);
    dump(pt, branch.points.size());
    branch.points.push_back(std::move(pt));
    ++branch.stats.accepted;

    if (landing) {
      branch.complete = true;
      return branch;
    }
    if (cfg.adaptive && ++successes >= cfg.grow_after) {
      ds = std::min(ds * cfg.grow, cfg.max_step);
      successes = 0;
    }
  }
}

struct ContinuityReport {
  std::map<double, double> max_gap;              // s -> max relative gap
  std::map<double, std::vector<double>> gaps;    // s -> consecutive relative gaps
  bool passes = false;                           // all max gaps <= threshold
  double threshold = 0.1;
};

/// Relative L^s distances of consecutive sampled extensions over B_{r_inf}.
template <int N>
ContinuityReport branch_continuity_report(const Branch<N>& branch, const std::vector<double>& s_list,
                                          double threshold = 0.1) {
  ContinuityReport rep;
  rep.threshold = threshold;
  for (double se : s_list) {
    if (!(se > 2.0 * N / (N - 1.0))) {
      std::ostringstream msg;
      msg << "s=" << se << " must exceed 2N/(N-1)=" << 2.0 * N / (N - 1.0);
      fail(ErrorKind::exponent, msg.str());
    }
  }
  rep.passes = true;
  for (double se : s_list) {
    double worst = 0.0;
    auto& list = rep.gaps[se];
    for (std::size_t k = 1; k < branch.points.size(); ++k) {
      const auto& a = branch.points[k - 1];
      const auto& b = branch.points[k];
      if (!a.rays || !b.rays) fail(ErrorKind::validation, "branch points carry no ray samples");
      const double na = ls_norm(*a.rays, se, N);
      const double nb = ls_norm(*b.rays, se, N);
      const double denom = std::max(na, nb);
      const double gap = denom > 0.0 ? ls_distance(*a.rays, *b.rays, se, N) / denom : 0.0;
      list.push_back(gap);
      worst = std::max(worst, gap);
    }
    rep.max_gap[se] = worst;
    if (worst > threshold) rep.passes = false;
  }
  return rep;
}

}  // namespace helmbranch
