#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helmbranch/error.hpp"
#include "helmbranch/fundamental.hpp"
#include "helmbranch/grid.hpp"
#include "helmbranch/io.hpp"
#include "helmbranch/solver.hpp"
#include "helmbranch/weight.hpp"

namespace helmbranch {

/// Everything a CLI run needs. Values come from an INI file, then flags.
struct RunConfig {
  // [problem]
  int N = 3;
  double p = 4.0;
  std::string profile = "ball:radius=1,amplitude=1";
  double h = 0.1;
  std::string support_rule = "cell_average";
  int n_sub = 0;
  // [lambda]
  double lambda = 0.0;
  double lambda_start = -2.0;
  std::string lambda_end = "0.9*lambda_Q";
  // [solver]
  double newton_tol = 1e-10;
  int max_newton = 50;
  double damping = 0.5;
  int max_backtracks = 10;
  std::vector<double> t_schedule = {0.0};
  // [continuation]
  double max_step = 0.0;
  double min_step = 1e-4;
  double initial_step = 0.0;
  bool adaptive = true;
  int max_points = 100000;
  std::vector<double> s_list = {4.0};
  // [rays]
  int rays = 200;
  int radial = 64;
  double r_inf = 0.0;
  // [oracle]
  double R = 0.0;  // profile radius override for radial runs; 0 keeps the profile
  // [limits]
  std::size_t capacity = 8000;
  // [output]
  std::string out;
  std::string json_summary;
  std::string dump_fields;
  std::string matrix_out;
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v)) {
    fail(ErrorKind::validation, key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) fail(ErrorKind::validation, key + ": expected an integer, got '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(ErrorKind::validation, key + ": expected true or false, got '" + text + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(trim(text), ',')) out.push_back(parse_double(key, part));
  if (out.empty()) fail(ErrorKind::validation, key + ": empty list");
  return out;
}

/// One config entry: section, key, how to read it from text and how to print it.
struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<Field>& config_fields() {
  using S = const std::string&;
  static const std::vector<Field> fields = {
      {"problem", "N", [](RunConfig& c, S v) { c.N = static_cast<int>(parse_int("N", v)); },
       [](const RunConfig& c) { return std::to_string(c.N); }},
      {"problem", "p", [](RunConfig& c, S v) { c.p = parse_double("p", v); },
       [](const RunConfig& c) { return fmt17(c.p); }},
      {"problem", "profile", [](RunConfig& c, S v) { c.profile = trim(v); },
       [](const RunConfig& c) { return c.profile; }},
      {"problem", "h", [](RunConfig& c, S v) { c.h = parse_double("h", v); },
       [](const RunConfig& c) { return fmt17(c.h); }},
      {"problem", "support_rule", [](RunConfig& c, S v) { c.support_rule = trim(v); },
       [](const RunConfig& c) { return c.support_rule; }},
      {"problem", "n_sub", [](RunConfig& c, S v) { c.n_sub = static_cast<int>(parse_int("n_sub", v)); },
       [](const RunConfig& c) { return std::to_string(c.n_sub); }},
      {"lambda", "value", [](RunConfig& c, S v) { c.lambda = parse_double("lambda", v); },
       [](const RunConfig& c) { return fmt17(c.lambda); }},
      {"lambda", "start", [](RunConfig& c, S v) { c.lambda_start = parse_double("lambda_start", v); },
       [](const RunConfig& c) { return fmt17(c.lambda_start); }},
      {"lambda", "end", [](RunConfig& c, S v) { c.lambda_end = trim(v); },
       [](const RunConfig& c) { return c.lambda_end; }},
      {"solver", "newton_tol", [](RunConfig& c, S v) { c.newton_tol = parse_double("newton_tol", v); },
       [](const RunConfig& c) { return fmt17(c.newton_tol); }},
      {"solver", "max_newton", [](RunConfig& c, S v) { c.max_newton = static_cast<int>(parse_int("max_newton", v)); },
       [](const RunConfig& c) { return std::to_string(c.max_newton); }},
      {"solver", "damping", [](RunConfig& c, S v) { c.damping = parse_double("damping", v); },
       [](const RunConfig& c) { return fmt17(c.damping); }},
      {"solver", "max_backtracks",
       [](RunConfig& c, S v) { c.max_backtracks = static_cast<int>(parse_int("max_backtracks", v)); },
       [](const RunConfig& c) { return std::to_string(c.max_backtracks); }},
      {"solver", "t_schedule", [](RunConfig& c, S v) { c.t_schedule = parse_list("t_schedule", v); },
       [](const RunConfig& c) { return join_doubles(c.t_schedule); }},
      {"continuation", "max_step", [](RunConfig& c, S v) { c.max_step = parse_double("max_step", v); },
       [](const RunConfig& c) { return fmt17(c.max_step); }},
      {"continuation", "min_step", [](RunConfig& c, S v) { c.min_step = parse_double("min_step", v); },
       [](const RunConfig& c) { return fmt17(c.min_step); }},
      {"continuation", "initial_step", [](RunConfig& c, S v) { c.initial_step = parse_double("initial_step", v); },
       [](const RunConfig& c) { return fmt17(c.initial_step); }},
      {"continuation", "adaptive", [](RunConfig& c, S v) { c.adaptive = parse_bool("adaptive", v); },
       [](const RunConfig& c) { return std::string(c.adaptive ? "true" : "false"); }},
      {"continuation", "max_points", [](RunConfig& c, S v) { c.max_points = static_cast<int>(parse_int("max_points", v)); },
       [](const RunConfig& c) { return std::to_string(c.max_points); }},
      {"continuation", "s_list", [](RunConfig& c, S v) { c.s_list = parse_list("s_list", v); },
       [](const RunConfig& c) { return join_doubles(c.s_list); }},
      {"rays", "count", [](RunConfig& c, S v) { c.rays = static_cast<int>(parse_int("rays", v)); },
       [](const RunConfig& c) { return std::to_string(c.rays); }},
      {"rays", "radial", [](RunConfig& c, S v) { c.radial = static_cast<int>(parse_int("radial", v)); },
       [](const RunConfig& c) { return std::to_string(c.radial); }},
      {"rays", "r_inf", [](RunConfig& c, S v) { c.r_inf = parse_double("r_inf", v); },
       [](const RunConfig& c) { return fmt17(c.r_inf); }},
      {"oracle", "R", [](RunConfig& c, S v) { c.R = parse_double("R", v); },
       [](const RunConfig& c) { return fmt17(c.R); }},
      {"limits", "capacity",
       [](RunConfig& c, S v) {
         const auto n = parse_int("capacity", v);
         if (n <= 0) fail(ErrorKind::validation, "capacity must be positive");
         c.capacity = static_cast<std::size_t>(n);
       },
       [](const RunConfig& c) { return std::to_string(c.capacity); }},
      {"output", "out", [](RunConfig& c, S v) { c.out = trim(v); }, [](const RunConfig& c) { return c.out; }},
      {"output", "json_summary", [](RunConfig& c, S v) { c.json_summary = trim(v); },
       [](const RunConfig& c) { return c.json_summary; }},
      {"output", "dump_fields", [](RunConfig& c, S v) { c.dump_fields = trim(v); },
       [](const RunConfig& c) { return c.dump_fields; }},
      {"output", "matrix", [](RunConfig& c, S v) { c.matrix_out = trim(v); },
       [](const RunConfig& c) { return c.matrix_out; }},
  };
  return fields;
}

}  // namespace detail

/// Applies INI text on top of `cfg`. Unknown sections or keys are rejected.
inline void apply_ini(RunConfig& cfg, std::istream& in, const std::string& origin = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::validation, origin + ": " + e.message() + " at line " + std::to_string(e.line()));
  }
  std::map<std::string, const detail::Field*> index;
  for (const auto& f : detail::config_fields()) index[std::string(f.section) + "." + f.key] = &f;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      fail(ErrorKind::validation, origin + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const auto it = index.find(section + "." + key);
      if (it == index.end()) fail(ErrorKind::validation, origin + ": unknown key [" + section + "] " + key);
      it->second->set(cfg, value.data());
    }
  }
}

inline RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::validation, "cannot open config " + path);
  RunConfig cfg;
  apply_ini(cfg, in, path);
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  RunConfig cfg;
  apply_ini(cfg, in);
  return cfg;
}

/// Canonical INI text: every key, fixed section and key order, 17-digit numbers.
inline std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : detail::config_fields()) {
    if (section != f.section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

/// Sets one value by its dotted name, e.g. "problem.h".
inline void set_config_value(RunConfig& cfg, const std::string& name, const std::string& value) {
  for (const auto& f : detail::config_fields()) {
    if (name == std::string(f.section) + "." + f.key) {
      f.set(cfg, value);
      return;
    }
  }
  fail(ErrorKind::validation, "unknown config key " + name);
}

/// Parsed form of a profile spec such as "ball:radius=1,amplitude=1",
/// "dist:radius=1,alpha=2,beta=3" or "grid:path=q.csv".
struct ProfileSpec {
  std::string kind;
  std::map<std::string, std::string> params;
};

inline ProfileSpec parse_profile_spec(const std::string& text) {
  ProfileSpec spec;
  const std::string t = trim(text);
  const auto colon = t.find(':');
  spec.kind = trim(t.substr(0, colon));
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"ball", {"radius", "amplitude", "center"}},
      {"dist", {"radius", "alpha", "beta", "center"}},
      {"grid", {"path"}}};
  const auto kind_it = allowed.find(spec.kind);
  if (kind_it == allowed.end()) {
    fail(ErrorKind::validation, "profile kind must be ball, dist or grid, got '" + spec.kind + "'");
  }
  if (colon != std::string::npos) {
    for (const auto& part : split(t.substr(colon + 1), ',')) {
      if (trim(part).empty()) continue;
      const auto eq = part.find('=');
      if (eq == std::string::npos) {
        if (spec.kind == "grid" && spec.params.empty()) {
          spec.params["path"] = trim(part);
          continue;
        }
        fail(ErrorKind::validation, "profile parameter '" + part + "' is not key=value");
      }
      const std::string key = trim(part.substr(0, eq));
      if (!kind_it->second.count(key)) {
        fail(ErrorKind::validation, "profile " + spec.kind + " has no parameter '" + key + "'");
      }
      spec.params[key] = trim(part.substr(eq + 1));
    }
  }
  if (spec.kind == "grid" && !spec.params.count("path")) fail(ErrorKind::validation, "grid profile needs a path");
  return spec;
}

/// `radius` > 0 replaces the radius of a ball or dist profile.
template <int N>
WeightProfile<N> make_profile(const std::string& text, double radius = 0.0) {
  auto spec = parse_profile_spec(text);
  if (radius > 0.0 && spec.kind != "grid") spec.params["radius"] = fmt17(radius);
  auto num = [&](const char* key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : detail::parse_double(std::string("profile.") + key, it->second);
  };
  Point<N> center{};
  if (const auto it = spec.params.find("center"); it != spec.params.end()) {
    const auto parts = split(it->second, ';');
    if (parts.size() != static_cast<std::size_t>(N)) {
      fail(ErrorKind::validation, "profile center needs " + std::to_string(N) + " ';'-separated coordinates");
    }
    for (int k = 0; k < N; ++k) center[k] = detail::parse_double("profile.center", parts[static_cast<std::size_t>(k)]);
  }
  if (spec.kind == "ball") return WeightProfile<N>::ball(num("radius", 1.0), num("amplitude", 1.0), center);
  if (spec.kind == "dist") return WeightProfile<N>::dist(num("radius", 1.0), num("alpha", 1.0), num("beta", 1.0), center);
  return WeightProfile<N>::sampled(read_lattice_csv<N>(spec.params.at("path")));
}

inline GridOptions grid_options(const RunConfig& cfg) {
  GridOptions opts;
  if (cfg.support_rule == "cell_average") {
    opts.rule = SupportRule::cell_average;
  } else if (cfg.support_rule == "cell_center") {
    opts.rule = SupportRule::cell_center;
  } else {
    fail(ErrorKind::validation, "support_rule must be cell_average or cell_center");
  }
  opts.n_sub = cfg.n_sub;
  return opts;
}

inline SolveConfig solve_config(const RunConfig& cfg) {
  SolveConfig s;
  s.p = cfg.p;
  s.newton_tol = cfg.newton_tol;
  s.max_newton = cfg.max_newton;
  s.damping = cfg.damping;
  s.max_backtracks = cfg.max_backtracks;
  return s;
}

/// lambda_end as a number; "c*lambda_Q" and "lambda_Q" are resolved against `lq`.
inline double resolve_lambda_end(const RunConfig& cfg, double lq) {
  const std::string t = trim(cfg.lambda_end);
  const std::string tag = "lambda_Q";
  if (t.size() >= tag.size() && t.compare(t.size() - tag.size(), tag.size(), tag) == 0) {
    std::string factor = trim(t.substr(0, t.size() - tag.size()));
    if (factor.empty()) return lq;
    if (factor.back() != '*') fail(ErrorKind::validation, "lambda_end must be a number or c*lambda_Q");
    factor.pop_back();
    return detail::parse_double("lambda_end", factor) * lq;
  }
  return detail::parse_double("lambda_end", t);
}

/// Checks that do not need the profile. Returns advisory notes (not failures).
/// `exponents` = false skips the p and s checks (kernel-only commands).
inline std::vector<std::string> validate_config(const RunConfig& cfg, bool exponents = true) {
  std::vector<std::string> notes;
  if (cfg.N < 3 || cfg.N > 5) fail(ErrorKind::unsupported, "N must be 3, 4 or 5");
  if (exponents) {
    const double crit = critical_exponent(cfg.N);
    if (!(cfg.p > 2.0)) fail(ErrorKind::exponent, "p=" + fmt17(cfg.p) + " must exceed 2");
    if (!(cfg.p < crit)) {
      fail(ErrorKind::integrability, "p=" + fmt17(cfg.p) + " must lie below 2N/(N-2)=" + fmt17(crit));
    }
    if (!check_exponent(cfg.p, cfg.N).a1_range) {
      notes.push_back("p=" + fmt17(cfg.p) + " is outside the (A1) range p < " + fmt17(2.0 * (cfg.N - 1.0) / (cfg.N - 2.0)));
    }
    const double s_min = 2.0 * cfg.N / (cfg.N - 1.0);
    for (double s : cfg.s_list) {
      if (!(s > s_min)) fail(ErrorKind::exponent, "s=" + fmt17(s) + " must exceed 2N/(N-1)=" + fmt17(s_min));
    }
  }
  if (!(cfg.h > 0.0)) fail(ErrorKind::validation, "h must be positive");
  if (cfg.rays <= 0 || cfg.radial <= 0) fail(ErrorKind::validation, "rays and radial must be positive");
  if (!(cfg.newton_tol > 0.0) || cfg.max_newton <= 0) fail(ErrorKind::validation, "newton_tol and max_newton must be positive");
  if (!(cfg.damping > 0.0 && cfg.damping < 1.0)) fail(ErrorKind::validation, "damping must lie in (0, 1)");
  if (!(cfg.min_step > 0.0)) fail(ErrorKind::validation, "min_step must be positive");
  if (cfg.R < 0.0) fail(ErrorKind::validation, "R must be nonnegative");
  grid_options(cfg);
  parse_profile_spec(cfg.profile);
  return notes;
}

}  // namespace helmbranch
