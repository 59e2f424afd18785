#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "helmbranch/extension.hpp"
#include "helmbranch/grid.hpp"

namespace helmbranch {

inline constexpr std::size_t kDefaultCapacity = 8000;

/// Dense Nystrom matrix of K_lambda f = Psi_lambda * (Q f) on the support cells:
///   A_ij = Psi_lambda(|x_i - x_j|) Q_j h^N  (i != j),   A_ii = Q_i S_lambda(h).
template <int N>
struct DiscreteOperator {
  double lambda = 0.0;
  GridPtr<N> grid;
  Eigen::MatrixXd matrix;
  double h = 0.0;
  double self_weight = 0.0;
  /// Set when lambda >= lambda_Q of the profile the operator was built for.
  bool beyond_lambda_q = false;

  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

namespace detail {

template <int N>
Eigen::MatrixXd matrix_from_table(const Grid<N>& grid, const std::vector<double>& table,
                                  const Eigen::VectorXd& w) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd a(m, m);
  // column-major storage: fill column by column
  for (Eigen::Index j = 0; j < m; ++j) {
    const double wj = w[j];
    const auto& ij = grid.index(static_cast<std::size_t>(j));
    double* col = a.col(j).data();
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& ii = grid.index(static_cast<std::size_t>(i));
      std::int64_t k = 0;
      for (int c = 0; c < N; ++c) {
        const std::int64_t d = ii[c] - ij[c];
        k += d * d;
      }
      col[i] = table[static_cast<std::size_t>(k)] * wj;
    }
  }
  return a;
}

template <int N>
void check_capacity(const Grid<N>& grid, std::size_t capacity) {
  if (grid.size() > capacity) {
    std::ostringstream msg;
    msg << "operator size M=" << grid.size() << " exceeds capacity " << capacity;
    fail(ErrorKind::capacity, msg.str());
  }
}

}  // namespace detail

template <int N>
DiscreteOperator<N> assemble_K(double lambda, GridPtr<N> grid, double lambda_q_value = HUGE_VAL,
                               std::size_t capacity = kDefaultCapacity) {
  detail::check_capacity(*grid, capacity);
  DiscreteOperator<N> op;
  op.lambda = lambda;
  op.h = grid->h();
  const auto table = kernel_table<N>(lambda, *grid);
  op.self_weight = table[0];
  op.matrix = detail::matrix_from_table<N>(*grid, table, grid->weights());
  op.beyond_lambda_q = !(lambda < lambda_q_value);
  op.grid = std::move(grid);
  return op;
}

template <int N>
DiscreteOperator<N> assemble_K(double lambda, GridPtr<N> grid, const WeightProfile<N>& q,
                               std::size_t capacity = kDefaultCapacity) {
  return assemble_K<N>(lambda, std::move(grid), lambda_q(N, q.r_q()), capacity);
}

/// Same kernel with cell weights replaced by `weights` (e.g. a rescaled or vanishing Q).
template <int N>
DiscreteOperator<N> assemble_K_with_weights(double lambda, GridPtr<N> grid,
                                            const Eigen::VectorXd& weights) {
  if (static_cast<std::size_t>(weights.size()) != grid->size()) {
    fail(ErrorKind::shape, "weight vector length does not match grid");
  }
  DiscreteOperator<N> op;
  op.lambda = lambda;
  op.h = grid->h();
  const auto table = kernel_table<N>(lambda, *grid);
  op.self_weight = table[0];
  op.matrix = detail::matrix_from_table<N>(*grid, table, weights);
  op.grid = std::move(grid);
  return op;
}

/// d A / d sigma at sigma = sign(lambda) sqrt|lambda| (right-sided at lambda = 0).
template <int N>
Eigen::MatrixXd assemble_dK_dsigma(double lambda, const Grid<N>& grid,
                                   std::size_t capacity = kDefaultCapacity) {
  detail::check_capacity(grid, capacity);
  return detail::matrix_from_table<N>(grid, kernel_table<N>(lambda, grid, true), grid.weights());
}

template <int N>
Field<N> apply_K(const DiscreteOperator<N>& op, const Field<N>& f) {
  check_same_grid<N>(op.grid, f.grid);
  return Field<N>(op.grid, op.matrix * f.values);
}

/// Binary matrix dump, little-endian:
///   bytes  0..7   magic "HBKMAT01"
///   bytes  8..15  M as uint64
///   bytes 16..23  lambda as float64
///   bytes 24..31  h as float64
///   then M*M float64 entries in row-major order
inline constexpr char kMatrixMagic[8] = {'H', 'B', 'K', 'M', 'A', 'T', '0', '1'};

template <int N>
void write_matrix(const DiscreteOperator<N>& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::validation, "cannot open matrix output " + path);
  const std::uint64_t m = op.size();
  out.write(kMatrixMagic, 8);
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(&op.lambda), 8);
  out.write(reinterpret_cast<const char*>(&op.h), 8);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = op.matrix;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(m * m * sizeof(double)));
  if (!out) fail(ErrorKind::internal, "failed writing matrix " + path);
}

struct MatrixDump {
  double lambda = 0.0;
  double h = 0.0;
  Eigen::MatrixXd matrix;
};

inline MatrixDump read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::validation, "cannot open matrix file " + path);
  char magic[8];
  std::uint64_t m = 0;
  MatrixDump dump;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&m), 8);
  in.read(reinterpret_cast<char*>(&dump.lambda), 8);
  in.read(reinterpret_cast<char*>(&dump.h), 8);
  if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0) {
    fail(ErrorKind::validation, "bad matrix header in " + path);
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(m * m * sizeof(double)));
  if (!in) fail(ErrorKind::validation, "truncated matrix file " + path);
  dump.matrix = rows;
  return dump;
}

}  // namespace helmbranch
