#pragma once

#include "kronfeat/linalg.hpp"

#include <random>

namespace kronfeat::testing {

inline Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/// Unit-Frobenius-norm upper-triangular matrix, the shape of a descriptor.
inline Matrix unit_upper(int d, std::mt19937_64& rng) {
  Matrix m = gaussian_matrix(d, d, rng).triangularView<Eigen::Upper>();
  return m / m.norm();
}

inline Matrix random_symmetric(int d, std::mt19937_64& rng) {
  const Matrix a = gaussian_matrix(d, d, rng);
  return (a + a.transpose()) / 2.0;
}

inline Matrix random_spd(int d, std::mt19937_64& rng, double shift = 1.0) {
  const Matrix a = gaussian_matrix(d, d, rng);
  Matrix s = a * a.transpose() + shift * Matrix::Identity(d, d);
  return (s + s.transpose()) / 2.0;
}

/// Explicit Kronecker product of a list of matrices (empty list gives [[1]]).
inline Matrix kron_all(const std::vector<Matrix>& ms) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& m : ms) {
    Matrix next(out.rows() * m.rows(), out.cols() * m.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = out(i, j) * m;
    out = std::move(next);
  }
  return out;
}

}  // namespace kronfeat::testing
