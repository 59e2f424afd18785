#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <memory>
#include <sstream>
#include <vector>

#include "helmbranch/error.hpp"
#include "helmbranch/weight.hpp"

namespace helmbranch {

/// How the weight of a lattice cell is obtained from Q.
///   cell_average : mean of Q over the cell (sub-cell midpoint rule); a cell is in
///                  the support when that mean is positive
///   cell_center  : Q at the cell centre
enum class SupportRule { cell_average, cell_center };

struct GridOptions {
  SupportRule rule = SupportRule::cell_average;
  int n_sub = 0;  // sub-cells per axis for cell_average; 0 picks 10 (N=3) or 4
};

/// Uniform lattice of spacing h anchored at the profile anchor (the anchor is a
/// cell centre). Only cells carrying positive weight are stored, in
/// lexicographic order of their integer index.
template <int N>
class Grid {
 public:
  double h() const { return h_; }
  std::size_t size() const { return index_.size(); }
  const Index<N>& index(std::size_t i) const { return index_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  const Eigen::VectorXd& weights() const { return weight_; }
  const Point<N>& anchor() const { return anchor_; }
  SupportRule rule() const { return rule_; }
  /// Number of lattice cells examined in the bounding box.
  std::size_t box_cells() const { return box_cells_; }
  double cell_volume() const { return std::pow(h_, N); }

  Point<N> local_center(std::size_t i) const {
    Point<N> c;
    for (int k = 0; k < N; ++k) c[k] = static_cast<double>(index_[i][k]) * h_;
    return c;
  }

  Point<N> center(std::size_t i) const { return anchor_ + local_center(i); }

  /// |i - j|^2 in lattice units.
  std::int64_t index_dist2(std::size_t i, std::size_t j) const {
    std::int64_t s = 0;
    for (int k = 0; k < N; ++k) {
      const std::int64_t d = index_[i][k] - index_[j][k];
      s += d * d;
    }
    return s;
  }

  std::int64_t max_index_dist2() const { return max_dist2_; }

  /// Largest distance from the anchor to a stored cell centre. With averaged
  /// weights, boundary cells may have centres slightly outside supp Q.
  double center_radius() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, norm2<N>(local_center(i)));
    return std::sqrt(m);
  }

  /// Position of the cell with the given index, or -1.
  std::ptrdiff_t find(const Index<N>& idx) const {
    auto it = std::lower_bound(index_.begin(), index_.end(), idx);
    if (it == index_.end() || *it != idx) return -1;
    return it - index_.begin();
  }

  /// Cell centre closest to the anchor; the anchor itself for centred profiles.
  std::size_t central_cell() const {
    std::size_t best = 0;
    std::int64_t best_d = -1;
    for (std::size_t i = 0; i < size(); ++i) {
      std::int64_t d = 0;
      for (int k = 0; k < N; ++k) d += index_[i][k] * index_[i][k];
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  template <int M>
  friend std::shared_ptr<const Grid<M>> make_grid(const WeightProfile<M>&, double,
                                                  GridOptions);

 private:
  Grid() = default;
  double h_ = 0.0;
  Point<N> anchor_{};
  SupportRule rule_ = SupportRule::cell_average;
  std::vector<Index<N>> index_;
  Eigen::VectorXd weight_;
  std::size_t box_cells_ = 0;
  std::int64_t max_dist2_ = 0;
};

template <int N>
using GridPtr = std::shared_ptr<const Grid<N>>;

template <int N>
std::shared_ptr<const Grid<N>> make_grid(const WeightProfile<N>& q, double h,
                                         GridOptions opts = {}) {
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::resolution, "grid spacing h must be positive");
  if (h > q.r_q()) {
    std::ostringstream msg;
    msg << "grid spacing h=" << h << " exceeds r_Q=" << q.r_q();
    fail(ErrorKind::resolution, msg.str());
  }
  const int n_sub = opts.n_sub > 0 ? opts.n_sub : (N == 3 ? 10 : 4);
  const auto n = static_cast<std::int64_t>(std::ceil(q.extent() / h)) + 1;

  auto grid = std::shared_ptr<Grid<N>>(new Grid<N>());
  grid->h_ = h;
  grid->anchor_ = q.anchor();
  grid->rule_ = opts.rule;

  std::vector<double> weights;
  Index<N> idx;
  idx.fill(-n);
  std::size_t box = 0;
  while (true) {
    Point<N> c;
    for (int k = 0; k < N; ++k) c[k] = static_cast<double>(idx[k]) * h;
    const double w = opts.rule == SupportRule::cell_average ? q.cell_average(c, h, n_sub)
                                                            : q.local(c);
    ++box;
    if (w > 0.0) {
      grid->index_.push_back(idx);
      weights.push_back(w);
    }
    int k = N - 1;
    while (k >= 0 && ++idx[k] > n) idx[k--] = -n;
    if (k < 0) break;
  }
  grid->box_cells_ = box;
  if (grid->index_.size() < 8) {
    std::ostringstream msg;
    msg << "grid spacing h=" << h << " resolves only " << grid->index_.size()
        << " support cells (need at least 8)";
    fail(ErrorKind::resolution, msg.str());
  }
  grid->weight_ = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));

  Index<N> lo = grid->index_.front();
  Index<N> hi = lo;
  for (const auto& i : grid->index_) {
    for (int k = 0; k < N; ++k) {
      lo[k] = std::min(lo[k], i[k]);
      hi[k] = std::max(hi[k], i[k]);
    }
  }
  std::int64_t m = 0;
  for (int k = 0; k < N; ++k) m += (hi[k] - lo[k]) * (hi[k] - lo[k]);
  grid->max_dist2_ = m;
  return grid;
}

/// Real values on the support cells of a grid.
template <int N>
struct Field {
  GridPtr<N> grid;
  Eigen::VectorXd values;

  Field() = default;
  Field(GridPtr<N> g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid->size()) {
      fail(ErrorKind::shape, "field length does not match grid");
    }
  }

  static Field constant(GridPtr<N> g, double c) {
    const auto m = static_cast<Eigen::Index>(g->size());
    return Field(g, Eigen::VectorXd::Constant(m, c));
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

template <int N>
void check_same_grid(const GridPtr<N>& a, const GridPtr<N>& b) {
  if (a.get() != b.get() && (a->size() != b->size() || a->h() != b->h())) {
    fail(ErrorKind::shape, "fields live on different grids");
  }
}

}  // namespace helmbranch
