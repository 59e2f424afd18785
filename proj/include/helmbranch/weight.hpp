#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "helmbranch/error.hpp"
#include "helmbranch/fundamental.hpp"

namespace helmbranch {

template <int N>
using Point = std::array<double, N>;

template <int N>
using Index = std::array<std::int64_t, N>;

template <int N>
double norm2(const Point<N>& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

// Radius from sorted squared components, so that the result is invariant under
// coordinate permutations and sign flips bit for bit.
template <int N>
double symmetric_radius(const Point<N>& x) {
  std::array<double, N> sq;
  for (int k = 0; k < N; ++k) sq[k] = x[k] * x[k];
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double v : sq) s += v;
  return std::sqrt(s);
}

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> c;
  for (std::size_t k = 0; k < N; ++k) c[k] = a[k] + b[k];
  return c;
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> c;
  for (std::size_t k = 0; k < N; ++k) c[k] = a[k] - b[k];
  return c;
}

enum class ProfileKind { ball_indicator, dist_alpha, grid_sampled };

inline const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::ball_indicator: return "ball";
    case ProfileKind::dist_alpha: return "dist";
    case ProfileKind::grid_sampled: return "grid";
  }
  return "?";
}

/// Piecewise-constant samples on a uniform lattice: value[i] is Q on the cube of
/// side `spacing` centred at origin + index[i] * spacing.
template <int N>
struct LatticeSamples {
  Point<N> origin{};
  double spacing = 0.0;
  std::vector<Index<N>> index;
  std::vector<double> value;
};

/// The coefficient Q: bounded, nonnegative, compactly supported.
///
/// Analytic profiles are described in coordinates local to `anchor()`;
/// ball_indicator is amplitude * 1_{|x| <= R}, dist_alpha is beta * (R - |x|)_+^alpha
/// (the distance to the boundary of the ball Omega = B_R raised to alpha).
template <int N>
class WeightProfile {
 public:
  static WeightProfile ball(double radius, double amplitude = 1.0, Point<N> center = {}) {
    if (!(radius > 0.0)) fail(ErrorKind::validation, "ball radius must be positive");
    if (!(amplitude > 0.0)) fail(ErrorKind::validation, "ball amplitude must be positive");
    WeightProfile q(ProfileKind::ball_indicator);
    q.anchor_ = center;
    q.radius_ = radius;
    q.amplitude_ = amplitude;
    q.finish_analytic();
    return q;
  }

  static WeightProfile dist(double radius, double alpha, double beta, Point<N> center = {}) {
    if (!(radius > 0.0)) fail(ErrorKind::validation, "dist radius must be positive");
    if (!(alpha > 0.0)) fail(ErrorKind::validation, "dist alpha must be positive");
    if (!(beta > 0.0)) fail(ErrorKind::validation, "dist beta must be positive");
    WeightProfile q(ProfileKind::dist_alpha);
    q.anchor_ = center;
    q.radius_ = radius;
    q.alpha_ = alpha;
    q.amplitude_ = beta;
    q.finish_analytic();
    return q;
  }

  static WeightProfile sampled(LatticeSamples<N> samples) {
    if (!(samples.spacing > 0.0)) fail(ErrorKind::validation, "sample spacing must be positive");
    if (samples.index.size() != samples.value.size()) {
      fail(ErrorKind::validation, "sample index/value length mismatch");
    }
    WeightProfile q(ProfileKind::grid_sampled);
    q.anchor_ = samples.origin;
    auto table = std::make_shared<std::map<Index<N>, double>>();
    std::vector<Index<N>> support;
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.value.size(); ++i) {
      const double v = samples.value[i];
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorKind::validation, "sampled Q must be finite and nonnegative");
      }
      if (v > 0.0) {
        (*table)[samples.index[i]] = v;
        support.push_back(samples.index[i]);
        sup = std::max(sup, v);
      }
    }
    if (support.empty()) fail(ErrorKind::validation, "sampled Q vanishes identically");
    const double h = samples.spacing;
    double max_pair = 0.0;
    double extent = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      double ri = 0.0;
      for (int k = 0; k < N; ++k) {
        ri = std::max(ri, std::abs(static_cast<double>(support[i][k])) + 0.5);
      }
      extent = std::max(extent, ri);
      for (std::size_t j = i + 1; j < support.size(); ++j) {
        double d2 = 0.0;
        for (int k = 0; k < N; ++k) {
          const double d = static_cast<double>(support[i][k] - support[j][k]);
          d2 += d * d;
        }
        max_pair = std::max(max_pair, d2);
      }
    }
    q.table_ = std::move(table);
    q.spacing_ = h;
    q.amplitude_ = sup;
    q.sup_ = sup;
    // diameter of a union of cubes is at most the centre diameter plus one cube diagonal
    q.r_q_ = h * (std::sqrt(max_pair) + std::sqrt(static_cast<double>(N)));
    q.omega_ = static_cast<double>(support.size()) * std::pow(h, N);
    q.extent_ = h * extent * std::sqrt(static_cast<double>(N));
    return q;
  }

  ProfileKind kind() const { return kind_; }
  const Point<N>& anchor() const { return anchor_; }
  double r_q() const { return r_q_; }
  double sup_norm() const { return sup_; }
  double omega_measure() const { return omega_; }
  /// Radius of a ball around the anchor containing supp Q.
  double extent() const { return extent_; }
  bool radial() const { return kind_ != ProfileKind::grid_sampled; }
  double radius() const { return radius_; }
  double alpha() const { return alpha_; }
  double amplitude() const { return amplitude_; }
  double spacing() const { return spacing_; }

  /// Q as a function of |x - anchor| for radial profiles.
  double radial_value(double r) const {
    switch (kind_) {
      case ProfileKind::ball_indicator:
        return r <= radius_ ? amplitude_ : 0.0;
      case ProfileKind::dist_alpha:
        return r < radius_ ? amplitude_ * std::pow(radius_ - r, alpha_) : 0.0;
      case ProfileKind::grid_sampled:
        break;
    }
    fail(ErrorKind::internal, "radial_value on a non-radial profile");
  }

  /// Q at a point given in anchor-local coordinates.
  double local(const Point<N>& y) const {
    if (kind_ != ProfileKind::grid_sampled) return radial_value(symmetric_radius<N>(y));
    Index<N> idx;
    for (int k = 0; k < N; ++k) idx[k] = static_cast<std::int64_t>(std::floor(y[k] / spacing_ + 0.5));
    const auto it = table_->find(idx);
    return it == table_->end() ? 0.0 : it->second;
  }

  /// eval_Q: Q at a point in absolute coordinates.
  double operator()(const Point<N>& x) const { return local(x - anchor_); }

  /// Cell average of Q over the cube of side h centred at `c` (anchor-local),
  /// midpoint rule with n_sub^N sub-cells.
  double cell_average(const Point<N>& c, double h, int n_sub) const {
    const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(N));
    if (kind_ != ProfileKind::grid_sampled) {
      const double rc = symmetric_radius<N>(c);
      if (rc - half_diag >= radius_) return 0.0;
      if (kind_ == ProfileKind::ball_indicator && rc + half_diag <= radius_) return amplitude_;
    }
    std::vector<double> offs(n_sub);
    for (int k = 0; k < n_sub; ++k) offs[k] = h * (2.0 * k + 1.0 - n_sub) / (2.0 * n_sub);
    std::array<int, N> counter{};
    double sum = 0.0;
    long total = 0;
    while (true) {
      Point<N> y;
      for (int k = 0; k < N; ++k) y[k] = c[k] + offs[counter[k]];
      sum += local(y);
      ++total;
      int k = 0;
      while (k < N && ++counter[k] == n_sub) counter[k++] = 0;
      if (k == N) break;
    }
    return sum / static_cast<double>(total);
  }

  /// Canonical text description, e.g. "ball:radius=1,amplitude=1".
  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
      case ProfileKind::ball_indicator:
        out << "ball:radius=" << radius_ << ",amplitude=" << amplitude_;
        break;
      case ProfileKind::dist_alpha:
        out << "dist:radius=" << radius_ << ",alpha=" << alpha_ << ",beta=" << amplitude_;
        break;
      case ProfileKind::grid_sampled:
        out << "grid:cells=" << table_->size() << ",spacing=" << spacing_;
        break;
    }
    return out.str();
  }

 private:
  explicit WeightProfile(ProfileKind kind) : kind_(kind) {}

  void finish_analytic() {
    r_q_ = 2.0 * radius_;
    sup_ = kind_ == ProfileKind::ball_indicator ? amplitude_
                                                : amplitude_ * std::pow(radius_, alpha_);
    omega_ = ball_volume(N) * std::pow(radius_, N);
    extent_ = radius_;
  }

  ProfileKind kind_;
  Point<N> anchor_{};
  double radius_ = 0.0;
  double alpha_ = 0.0;
  double amplitude_ = 0.0;
  double spacing_ = 0.0;
  double r_q_ = 0.0;
  double sup_ = 0.0;
  double omega_ = 0.0;
  double extent_ = 0.0;
  std::shared_ptr<const std::map<Index<N>, double>> table_;
};

}  // namespace helmbranch
