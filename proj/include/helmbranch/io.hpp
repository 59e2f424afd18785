#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helmbranch/error.hpp"
#include "helmbranch/grid.hpp"

namespace helmbranch {

/// %.17g: lossless decimal form of a double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kAxisNames[5] = {"x", "y", "z", "w", "v"};

template <int N>
std::string field_csv_header() {
  std::string h;
  for (int k = 0; k < N; ++k) h += std::string("i") + kAxisNames[k] + ",";
  for (int k = 0; k < N; ++k) h += std::string(kAxisNames[k]) + ",";
  return h + "value";
}

/// Field dump: one row per support cell (lattice index, centre, value).
template <int N>
void write_field_csv(std::ostream& out, const Field<N>& f) {
  out << field_csv_header<N>() << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& idx = f.grid->index(i);
    const auto c = f.grid->center(i);
    for (int k = 0; k < N; ++k) out << idx[k] << ',';
    for (int k = 0; k < N; ++k) out << fmt17(c[k]) << ',';
    out << fmt17(f.values[static_cast<Eigen::Index>(i)]) << '\n';
  }
}

template <int N>
void write_field_csv(const std::string& path, const Field<N>& f) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::validation, "cannot open field output " + path);
  write_field_csv<N>(out, f);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Reads a field-format CSV (lattice index, centre, value) as lattice samples of Q.
/// Spacing and origin are recovered from two rows with differing indices.
template <int N>
LatticeSamples<N> read_lattice_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::validation, "cannot open grid profile " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != field_csv_header<N>()) {
    fail(ErrorKind::validation, "grid profile " + path + " must start with header " + field_csv_header<N>());
  }
  LatticeSamples<N> s;
  std::vector<Point<N>> centres;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto parts = split(trim(line), ',');
    if (parts.size() != static_cast<std::size_t>(2 * N + 1)) {
      fail(ErrorKind::validation, "grid profile " + path + " row " + std::to_string(row) + " has wrong column count");
    }
    Index<N> idx;
    Point<N> c;
    try {
      for (int k = 0; k < N; ++k) idx[k] = std::stoll(parts[static_cast<std::size_t>(k)]);
      for (int k = 0; k < N; ++k) c[k] = std::stod(parts[static_cast<std::size_t>(N + k)]);
      s.value.push_back(std::stod(parts[static_cast<std::size_t>(2 * N)]));
    } catch (const std::exception&) {
      fail(ErrorKind::validation, "grid profile " + path + " row " + std::to_string(row) + " is not numeric");
    }
    s.index.push_back(idx);
    centres.push_back(c);
  }
  if (s.index.size() < 2) fail(ErrorKind::validation, "grid profile " + path + " needs at least two rows");
  for (std::size_t j = 1; j < s.index.size() && s.spacing == 0.0; ++j) {
    for (int k = 0; k < N; ++k) {
      const auto di = s.index[j][k] - s.index[0][k];
      if (di != 0) {
        s.spacing = (centres[j][k] - centres[0][k]) / static_cast<double>(di);
        break;
      }
    }
  }
  if (!(s.spacing > 0.0)) fail(ErrorKind::validation, "grid profile " + path + " has no positive spacing");
  for (int k = 0; k < N; ++k) s.origin[k] = centres[0][k] - static_cast<double>(s.index[0][k]) * s.spacing;
  return s;
}

}  // namespace helmbranch
