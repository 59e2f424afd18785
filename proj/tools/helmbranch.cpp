#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "helmbranch/helmbranch.hpp"
#include "json_out.hpp"

namespace hb = helmbranch;
using hb::cli::json;

namespace {

struct Extra {
  int samples = 10000;
  std::string emit_config;
};

void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) hb::fail(hb::ErrorKind::validation, "cannot open output " + path);
  body(out);
  if (!out) hb::fail(hb::ErrorKind::internal, "failed writing " + path);
}

void emit_summary(const std::string& path, const json& j) {
  with_output(path, [&](std::ostream& out) {
    hb::cli::write_json(out, j);
    out << '\n';
  });
}

std::string s_label(double s) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

void check_below_threshold(double lambda, double lq, const char* name) {
  if (!(lambda < lq)) {
    hb::fail(hb::ErrorKind::threshold, std::string(name) + "=" + hb::fmt17(lambda) +
                                           " must lie below lambda_Q=" + hb::fmt17(lq));
  }
}

/// Profile, threshold and grid for a run, in that order (cheap checks first).
template <int N>
struct Setup {
  hb::WeightProfile<N> q;
  double lq = 0.0;
  hb::GridPtr<N> grid;
};

template <int N>
Setup<N> profile_only(const hb::RunConfig& cfg) {
  auto q = hb::make_profile<N>(cfg.profile, cfg.R);
  const double lq = hb::lambda_q(N, q.r_q());
  return {std::move(q), lq, nullptr};
}

template <int N>
void build_grid(Setup<N>& s, const hb::RunConfig& cfg) {
  s.grid = hb::make_grid<N>(s.q, cfg.h, hb::grid_options(cfg));
  if (s.grid->size() > cfg.capacity) {
    hb::fail(hb::ErrorKind::capacity, "operator size M=" + std::to_string(s.grid->size()) + " exceeds capacity " +
                                          std::to_string(cfg.capacity));
  }
}

template <int N>
double center_value(const hb::Field<N>& u) {
  return u.values[static_cast<Eigen::Index>(u.grid->central_cell())];
}

template <int N>
int kernel_check(const hb::RunConfig& cfg, const Extra& extra) {
  hb::KernelCheckOptions opts;
  opts.samples = extra.samples;
  const auto checks = hb::kernel_inequality_checks(N, opts);
  with_output(cfg.out, [&](std::ostream& out) { hb::write_kernel_checks_csv(out, checks); });
  for (const auto& c : checks) {
    if (c.violations > 0) {
      hb::fail(hb::ErrorKind::numerical, "kernel inequality " + c.name + " violated in " +
                                             std::to_string(c.violations) + " of " + std::to_string(c.samples) +
                                             " samples");
    }
  }
  return 0;
}

template <int N>
int eig(const hb::RunConfig& cfg) {
  auto s = profile_only<N>(cfg);
  check_below_threshold(cfg.lambda, s.lq, "lambda");
  build_grid(s, cfg);
  const auto op = hb::assemble_K<N>(cfg.lambda, s.grid, s.lq, cfg.capacity);
  if (!cfg.matrix_out.empty()) hb::write_matrix<N>(op, cfg.matrix_out);
  const auto pair = hb::kr_eigenpair(op);
  if (!cfg.dump_fields.empty()) hb::write_field_csv<N>(cfg.dump_fields, pair.f1);
  Eigen::Index imax = 0;
  pair.f1.values.maxCoeff(&imax);
  json j;
  j["N"] = N;
  j["lambda"] = cfg.lambda;
  j["h"] = cfg.h;
  j["M"] = s.grid->size();
  j["nu1"] = pair.nu1;
  j["f1_max_cell"] = static_cast<std::size_t>(imax);
  j["iterations"] = pair.iterations;
  j["residual"] = pair.residual;
  emit_summary(cfg.out.empty() ? cfg.json_summary : cfg.out, j);
  return 0;
}

template <int N>
int bounds(const hb::RunConfig& cfg) {
  auto s = profile_only<N>(cfg);
  const double lambda_end = hb::resolve_lambda_end(cfg, s.lq);
  check_below_threshold(lambda_end, s.lq, "lambda_end");
  if (cfg.lambda_start > lambda_end) hb::fail(hb::ErrorKind::validation, "lambda_start must not exceed lambda_end");
  build_grid(s, cfg);
  const auto sd = hb::spectral_data<N>(s.q, s.grid, cfg.p, std::max(0.0, -cfg.lambda_start), std::max(0.0, lambda_end),
                                       cfg.capacity);
  json j;
  j["nu1"] = sd.nu1;
  j["f1_max_cell"] = sd.f1_max_cell;
  j["epsilon0"] = sd.epsilon0;
  j["kappa2"] = sd.kappa2;
  j["D"] = sd.D;
  j["delta0"] = sd.delta0;
  j["lambda_Q"] = sd.lambda_Q;
  emit_summary(cfg.json_summary.empty() ? cfg.out : cfg.json_summary, j);
  return 0;
}

template <int N>
int solve(const hb::RunConfig& cfg) {
  auto s = profile_only<N>(cfg);
  check_below_threshold(cfg.lambda, s.lq, "lambda");
  const auto scfg = hb::solve_config(cfg);
  build_grid(s, cfg);
  const auto op = hb::assemble_K<N>(cfg.lambda, s.grid, s.lq, cfg.capacity);
  if (!cfg.matrix_out.empty()) hb::write_matrix<N>(op, cfg.matrix_out);

  hb::HomotopyMonitors monitors;
  double kappa = HUGE_VAL;
  if (cfg.t_schedule.size() > 1) {
    const auto k0 = hb::assemble_K<N>(0.0, s.grid, s.lq, cfg.capacity);
    const double eps = hb::epsilon0(std::max(0.0, -cfg.lambda), std::max(0.0, cfg.lambda), s.q.r_q(), N);
    kappa = hb::kappa2(cfg.p, eps, hb::kr_eigenpair(k0).nu1);
    monitors.kappa2 = kappa;
  }
  hb::HomotopyResult<N> res;
  if (cfg.t_schedule.size() == 1 && cfg.t_schedule[0] == 0.0) {
    res.solution = hb::seed_solve<N>(op, scfg);
    res.steps.push_back({0.0, res.solution.u.values.cwiseAbs().maxCoeff(), res.solution.residual,
                         res.solution.iterations, res.solution.u.values.minCoeff() >= 0.0});
  } else {
    res = hb::homotopy_solve<N>(op, cfg.t_schedule, hb::initial_guess<N>(op, scfg), scfg, monitors);
  }
  const auto& u = res.solution.u;
  if (!cfg.out.empty()) hb::write_field_csv<N>(cfg.out, u);

  json j;
  j["N"] = N;
  j["p"] = cfg.p;
  j["lambda"] = cfg.lambda;
  j["h"] = cfg.h;
  j["M"] = s.grid->size();
  j["lambda_Q"] = s.lq;
  j["residual"] = res.solution.residual;
  j["iterations"] = res.solution.iterations;
  j["admissible"] = res.solution.admissible;
  j["sup_norm"] = u.values.cwiseAbs().maxCoeff();
  j["min_on_support"] = u.values.minCoeff();
  j["center_value"] = center_value(u);
  if (std::isfinite(kappa)) j["kappa2"] = kappa;
  json steps = json::array();
  for (const auto& st : res.steps) {
    steps.push_back({{"t", st.t}, {"sup_norm", st.sup_norm}, {"residual", st.residual},
                     {"iterations", st.iterations}, {"nonnegative", st.nonnegative}});
  }
  j["homotopy"] = steps;
  j["warnings"] = res.warnings;
  emit_summary(cfg.json_summary, j);
  return 0;
}

template <int N>
int continue_cmd(const hb::RunConfig& cfg) {
  auto s = profile_only<N>(cfg);
  const double lambda_end = hb::resolve_lambda_end(cfg, s.lq);
  check_below_threshold(lambda_end, s.lq, "lambda_end");
  if (cfg.lambda_start > lambda_end) hb::fail(hb::ErrorKind::validation, "lambda_start must not exceed lambda_end");
  build_grid(s, cfg);

  hb::ContinuationConfig cc;
  cc.solve = hb::solve_config(cfg);
  cc.max_step = cfg.max_step;
  cc.min_step = cfg.min_step;
  cc.initial_step = cfg.initial_step;
  cc.adaptive = cfg.adaptive;
  cc.max_points = cfg.max_points;
  cc.s_list = cfg.s_list;
  cc.rays.rays = cfg.rays;
  cc.rays.radial = cfg.radial;
  cc.rays.r_inf = cfg.r_inf;
  cc.capacity = cfg.capacity;
  cc.dump_dir = cfg.dump_fields;
  const auto branch = hb::continue_branch<N>(s.q, s.grid, cfg.lambda_start, lambda_end, cc);

  with_output(cfg.out, [&](std::ostream& out) {
    out << "index,lambda,sup_norm,min_on_support,residual";
    for (double se : cfg.s_list) out << ",Ls_norm_" << s_label(se);
    out << ",sign_change_radius\n";
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
      const auto& pt = branch.points[i];
      out << i << ',' << hb::fmt17(pt.lambda) << ',' << hb::fmt17(pt.sup_norm) << ',' << hb::fmt17(pt.min_on_support)
          << ',' << hb::fmt17(pt.residual);
      for (double se : cfg.s_list) out << ',' << hb::fmt17(pt.ls_norms.at(se));
      out << ',' << hb::fmt17(pt.sign_change_radius) << '\n';
    }
  });

  if (!cfg.json_summary.empty()) {
    const double D = hb::compute_D(cfg.p, s.q.extent(), s.q.r_q(), std::max(0.0, lambda_end), N);
    const double d0 = hb::delta0<N>(cfg.p, D, s.q);
    double min_sup = HUGE_VAL;
    bool admissible = true;
    bool signs = true;
    for (const auto& pt : branch.points) {
      min_sup = std::min(min_sup, pt.sup_norm);
      admissible = admissible && pt.min_on_support > 0.0;
      if (pt.lambda <= 0.0) {
        signs = signs && pt.signs.positive_inside_ball;
      } else {
        signs = signs && pt.signs.rays_with_sign_change == cfg.rays;
      }
    }
    const auto rep = hb::branch_continuity_report<N>(branch, cfg.s_list);
    json gaps = json::object();
    for (const auto& [se, g] : rep.max_gap) gaps[s_label(se)] = g;
    json j;
    j["complete"] = branch.complete;
    j["diagnostic"] = branch.diagnostic;
    j["points"] = branch.points.size();
    j["lambda_start"] = branch.lambda_start;
    j["lambda_end"] = branch.lambda_end;
    j["lambda_Q"] = s.lq;
    j["M"] = s.grid->size();
    j["folds"] = branch.folds;
    j["all_admissible"] = admissible;
    j["sign_pattern_ok"] = signs;
    j["delta0"] = d0;
    j["min_sup_norm"] = min_sup;
    j["sup_above_delta0"] = min_sup >= d0;
    j["max_relative_gap"] = gaps;
    j["stats"] = {{"accepted", branch.stats.accepted},
                  {"rejected", branch.stats.rejected},
                  {"corrector_iterations", branch.stats.corrector_iterations},
                  {"factorizations", branch.stats.factorizations},
                  {"natural_steps", branch.stats.natural_steps},
                  {"min_step", branch.stats.min_step_used},
                  {"max_step", branch.stats.max_step_used}};
    emit_summary(cfg.json_summary, j);
  }
  if (!branch.complete) hb::fail(hb::ErrorKind::convergence, "branch incomplete: " + branch.diagnostic);
  return 0;
}

template <int N>
hb::RadialProfile radial_profile(const hb::RunConfig& cfg, const hb::WeightProfile<N>& q, double lq) {
  if (!q.radial()) hb::fail(hb::ErrorKind::validation, "oracle needs a ball or dist profile");
  check_below_threshold(cfg.lambda, lq, "lambda");
  return hb::RadialProfile::from(q, cfg.p, cfg.lambda);
}

template <int N>
int oracle(const hb::RunConfig& cfg) {
  const auto s = profile_only<N>(cfg);
  const auto prof = radial_profile<N>(cfg, s.q, s.lq);
  const auto res = hb::radial_shoot(prof);
  with_output(cfg.out, [&](std::ostream& out) {
    out << "r,u,du\n";
    const auto& tr = res.trajectory;
    for (std::size_t i = 0; i < tr.r.size(); ++i) {
      out << hb::fmt17(tr.r[i]) << ',' << hb::fmt17(tr.u[i]) << ',' << hb::fmt17(tr.du[i]) << '\n';
    }
  });
  if (!cfg.json_summary.empty()) {
    json j;
    j["N"] = N;
    j["p"] = cfg.p;
    j["lambda"] = cfg.lambda;
    j["R"] = prof.R;
    j["R_out"] = prof.outer();
    j["a_star"] = res.a_star;
    j["far_coefficient"] = res.far_coefficient;
    j["sign_change_radius"] = res.sign_change_radius;
    j["defect"] = res.defect;
    j["other_roots"] = res.other_roots;
    emit_summary(cfg.json_summary, j);
  }
  return 0;
}

template <int N>
int crosscheck(const hb::RunConfig& cfg) {
  auto s = profile_only<N>(cfg);
  const auto prof = radial_profile<N>(cfg, s.q, s.lq);
  build_grid(s, cfg);
  const auto res = hb::radial_shoot(prof);

  const auto scfg = hb::solve_config(cfg);
  const auto op = hb::assemble_K<N>(cfg.lambda, s.grid, s.lq, cfg.capacity);
  const auto sol = hb::seed_solve<N>(op, scfg);

  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < s.grid->size(); ++i) {
    if (!(s.q(s.grid->center(i)) > 0.0)) continue;
    const double r = std::sqrt(hb::norm2<N>(s.grid->local_center(i)));
    const double ref = res.trajectory(r);
    worst = std::max(worst, std::abs(sol.u.values[static_cast<Eigen::Index>(i)] - ref));
    scale = std::max(scale, std::abs(ref));
  }
  const std::size_t c = s.grid->central_cell();
  const double r_c = std::sqrt(hb::norm2<N>(s.grid->local_center(c)));
  const double ref_c = res.trajectory(r_c);
  json j;
  j["N"] = N;
  j["p"] = cfg.p;
  j["lambda"] = cfg.lambda;
  j["h"] = cfg.h;
  j["M"] = s.grid->size();
  j["a_star"] = res.a_star;
  j["nystrom_center"] = center_value(sol.u);
  j["center_value_error"] = std::abs(center_value(sol.u) - ref_c) / std::abs(ref_c);
  j["max_relative_field_error"] = worst / scale;
  j["nystrom_residual"] = sol.residual;
  j["newton_iterations"] = sol.iterations;
  j["admissible"] = sol.admissible;
  emit_summary(cfg.json_summary.empty() ? cfg.out : cfg.json_summary, j);
  return 0;
}

template <int N>
int dispatch(const std::string& cmd, const hb::RunConfig& cfg, const Extra& extra) {
  if (cmd == "kernel-check") return kernel_check<N>(cfg, extra);
  if (cmd == "eig") return eig<N>(cfg);
  if (cmd == "bounds") return bounds<N>(cfg);
  if (cmd == "solve") return solve<N>(cfg);
  if (cmd == "continue") return continue_cmd<N>(cfg);
  if (cmd == "oracle") return oracle<N>(cfg);
  if (cmd == "crosscheck") return crosscheck<N>(cfg);
  hb::fail(hb::ErrorKind::internal, "unknown command " + cmd);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

int report(hb::ErrorKind kind, const std::string& message) {
  const int code = hb::exit_code(kind);
  std::cerr << "error kind=" << hb::to_string(kind) << " code=" << code << ": " << one_line(message) << std::endl;
  return code;
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const FlagSpec kFlags[] = {
    {"--N", "problem.N", "dimension (3, 4 or 5)"},
    {"--p", "problem.p", "exponent p"},
    {"--profile", "problem.profile", "ball:radius=..,amplitude=.. | dist:radius=..,alpha=..,beta=.. | grid:FILE"},
    {"--h", "problem.h", "cell width"},
    {"--support-rule", "problem.support_rule", "cell_average or cell_center"},
    {"--n-sub", "problem.n_sub", "sub-cells per axis for cell averages"},
    {"--lambda", "lambda.value", "lambda for eig, solve, oracle, crosscheck"},
    {"--lambda-start", "lambda.start", "first lambda of a branch"},
    {"--lambda-end", "lambda.end", "last lambda of a branch (number or c*lambda_Q)"},
    {"--newton-tol", "solver.newton_tol", "Newton residual tolerance (sup norm)"},
    {"--max-newton", "solver.max_newton", "Newton iteration cap"},
    {"--t-schedule", "solver.t_schedule", "comma-separated decreasing t values ending at 0"},
    {"--max-step", "continuation.max_step", "largest step (0: a tenth of the range)"},
    {"--min-step", "continuation.min_step", "step underflow bound"},
    {"--initial-step", "continuation.initial_step", "first step, or the fixed step"},
    {"--max-points", "continuation.max_points", "cap on branch points"},
    {"--s-list", "continuation.s_list", "comma-separated L^s exponents"},
    {"--rays", "rays.count", "number of rays"},
    {"--radial", "rays.radial", "radial samples per ray inside r_inf"},
    {"--r-inf", "rays.r_inf", "ray length (0: 10 r_Q)"},
    {"--R", "oracle.R", "radius override for ball and dist profiles"},
    {"--capacity", "limits.capacity", "largest allowed number of cells"},
    {"--out", "output.out", "main output file (stdout when empty)"},
    {"--json-summary", "output.json_summary", "JSON summary file"},
    {"--dump-fields", "output.dump_fields", "field dump (directory for continue)"},
    {"--matrix", "output.matrix", "binary matrix dump"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nystrom continuation of admissible Helmholtz solution branches"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;
  bool fixed_step = false;
  Extra extra;

  const std::pair<const char*, const char*> commands[] = {
      {"kernel-check", "sampled kernel inequality report (CSV)"},
      {"eig", "Krein-Rutman eigenpair of K_lambda"},
      {"bounds", "spectral constants as JSON"},
      {"solve", "admissible solution at one lambda"},
      {"continue", "branch over [lambda_start, lambda_end]"},
      {"oracle", "radial shooting solution"},
      {"crosscheck", "oracle against Nystrom on a radial profile"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "print help and exit");
    sub->add_option("--config", config_path, "INI config file; flags override it");
    for (const auto& f : kFlags) {
      const std::string key = f.key;
      sub->add_option_function<std::string>(
          f.flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, f.help);
    }
    sub->add_flag("--fixed-step", fixed_step, "constant arclength steps of --initial-step");
    sub->add_option("--set", sets, "section.key=value override");
    sub->add_option("--samples", extra.samples, "samples per inequality (kernel-check)");
    sub->add_option("--emit-config", extra.emit_config, "write the effective config and exit ('-' for stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(hb::ErrorKind::validation, e.what());
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    hb::RunConfig cfg = config_path.empty() ? hb::RunConfig{} : hb::read_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) hb::fail(hb::ErrorKind::validation, "--set expects section.key=value");
      hb::set_config_value(cfg, hb::trim(s.substr(0, eq)), s.substr(eq + 1));
    }
    for (const auto& [key, value] : overrides) hb::set_config_value(cfg, key, value);
    if (fixed_step) cfg.adaptive = false;
    if (extra.samples <= 0) hb::fail(hb::ErrorKind::validation, "--samples must be positive");

    const auto notes = hb::validate_config(cfg, cmd != "kernel-check");
    if (!extra.emit_config.empty()) {
      if (extra.emit_config == "-") {
        std::cout << hb::emit_config(cfg);
      } else {
        std::ofstream out(extra.emit_config);
        if (!out) hb::fail(hb::ErrorKind::validation, "cannot open " + extra.emit_config);
        out << hb::emit_config(cfg);
      }
      return 0;
    }
    for (const auto& n : notes) std::cerr << "note: " << n << '\n';
    switch (cfg.N) {
      case 3: return dispatch<3>(cmd, cfg, extra);
      case 4: return dispatch<4>(cmd, cfg, extra);
      default: return dispatch<5>(cmd, cfg, extra);
    }
  } catch (const hb::Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::bad_alloc&) {
    return report(hb::ErrorKind::capacity, "out of memory");
  } catch (const std::exception& e) {
    return report(hb::ErrorKind::internal, e.what());
  }
}
