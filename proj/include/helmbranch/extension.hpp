#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "helmbranch/fundamental.hpp"
#include "helmbranch/grid.hpp"
#include "helmbranch/quadrature.hpp"

namespace helmbranch {

/// Radius of the ball with the volume of a cube of side h.
inline double equal_volume_radius(double h, int dim) {
  return h * std::pow(ball_volume(dim), -1.0 / dim);
}

/// S_lambda(h): integral of Psi_lambda over the equal-volume ball of a cell.
inline double singular_self_weight(double lambda, double h, int dim) {
  check_dimension(dim);
  if (!(h > 0.0)) fail(ErrorKind::domain, "self-weight needs h > 0");
  const double rho = equal_volume_radius(h, dim);
  const double scale = 1.0 / (dim - 2.0);
  if (lambda == 0.0) return scale * 0.5 * rho * rho;
  const double sigma = sigma_of_lambda(lambda);
  auto f = [&](double r) { return detail::psi_of_product(sigma * r, dim) * r; };
  return scale * quad::integrate(f, 0.0, rho, 1e-13);
}

/// d S_lambda(h) / d sigma.
inline double singular_self_weight_dsigma(double sigma, double h, int dim) {
  check_dimension(dim);
  const double rho = equal_volume_radius(h, dim);
  auto f = [&](double r) { return r * detail::dpsi_of_product(sigma * r, dim) * r; };
  return quad::integrate(f, 0.0, rho, 1e-13) / (dim - 2.0);
}

/// Psi_lambda(h sqrt(k)) h^N for integer k = |i - j|^2, k >= 1; entry 0 holds S_lambda(h).
/// With `derivative` set, the table holds d/dsigma of the same quantities.
template <int N>
std::vector<double> kernel_table(double lambda, const Grid<N>& grid, bool derivative = false) {
  const double h = grid.h();
  const double vol = grid.cell_volume();
  const auto kmax = grid.max_index_dist2();
  std::vector<double> table(static_cast<std::size_t>(kmax) + 1, 0.0);
  const double sigma = sigma_of_lambda(lambda);
  table[0] = derivative ? singular_self_weight_dsigma(sigma, h, N) : singular_self_weight(lambda, h, N);
  for (std::int64_t k = 1; k <= kmax; ++k) {
    const double r = h * std::sqrt(static_cast<double>(k));
    table[static_cast<std::size_t>(k)] =
        (derivative ? dpsi_lambda_dsigma(r, sigma, N) : psi_lambda(r, lambda, N)) * vol;
  }
  return table;
}

/// u(x) = sum_j Psi_lambda(|x - y_j|) Q_j f_j h^N over the support cells.
/// A cell whose centre lies within the equal-volume radius of x contributes
/// Q_j f_j S_lambda(h) instead, which is exact placement at a cell centre.
template <int N>
class ExtensionEvaluator {
 public:
  ExtensionEvaluator(double lambda, GridPtr<N> grid, const Eigen::VectorXd& f)
      : lambda_(lambda), grid_(std::move(grid)) {
    if (static_cast<std::size_t>(f.size()) != grid_->size()) {
      fail(ErrorKind::shape, "field length does not match grid");
    }
    const std::size_t m = grid_->size();
    source_.resize(m);
    centers_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      source_[j] = grid_->weight(j) * f[static_cast<Eigen::Index>(j)];
      centers_[j] = grid_->center(j);
    }
    self_ = singular_self_weight(lambda, grid_->h(), N);
    rho2_ = std::pow(equal_volume_radius(grid_->h(), N), 2);
    vol_ = grid_->cell_volume();
    coef_ = newton_coefficient(N);
    sigma_ = sigma_of_lambda(lambda);
  }

  double operator()(const Point<N>& x) const {
    double sum = 0.0;
    double near = 0.0;
    for (std::size_t j = 0; j < source_.size(); ++j) {
      if (source_[j] == 0.0) continue;
      double d2 = 0.0;
      for (int k = 0; k < N; ++k) {
        const double d = x[k] - centers_[j][k];
        d2 += d * d;
      }
      if (d2 < rho2_) {
        near += source_[j];
        continue;
      }
      const double r = std::sqrt(d2);
      sum += source_[j] * detail::psi_of_product(sigma_ * r, N) * std::pow(r, 2.0 - N);
    }
    return sum * coef_ * vol_ + near * self_;
  }

  double lambda() const { return lambda_; }

 private:
  double lambda_;
  GridPtr<N> grid_;
  std::vector<double> source_;
  std::vector<Point<N>> centers_;
  double self_ = 0.0;
  double rho2_ = 0.0;
  double vol_ = 0.0;
  double coef_ = 0.0;
  double sigma_ = 0.0;
};

/// convolve_extension: single-point evaluation of the extension formula.
template <int N>
double convolve_extension(double lambda, const Field<N>& f, const std::type_identity_t<Point<N>>& x) {
  return ExtensionEvaluator<N>(lambda, f.grid, f.values)(x);
}

}  // namespace helmbranch
