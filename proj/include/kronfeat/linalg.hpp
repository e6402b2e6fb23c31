#pragma once

// Dense symmetric-matrix numerics used by the descriptor pipeline and the
// Kronecker feature maps.

#include <Eigen/Dense>

#include <span>

namespace kronfeat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A square matrix that is exactly symmetric. Construction never
/// symmetrizes silently; use `symmetrized` for that.
class SymMatrix {
 public:
  /// Throws ContractError if `m` is empty, non-square or not exactly symmetric.
  explicit SymMatrix(Matrix m);

  /// Returns (m + mᵀ)/2.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vector& diag);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthogonal, one eigenvector per column
};

struct JacobiOptions {
  /// Off-diagonal Frobenius norm threshold, relative to ‖m‖_F.
  double relative_tolerance = 1e-12;
  /// Sweep cap is sweep_factor · d².
  int sweep_factor = 100;
};

/// Cyclic Jacobi eigendecomposition. Throws NumericError when the sweep cap
/// is exhausted.
EigenDecomposition eigh(const SymMatrix& m, const JacobiOptions& opts = {});

/// U · diag(log(λᵢ + eps)) · Uᵀ. Throws DomainError if some λᵢ + eps ≤ 0 or
/// if the matrix has an eigenvalue below -1e-10 (not PSD).
SymMatrix sym_log(const SymMatrix& m, double eps);
SymMatrix sym_log(const EigenDecomposition& eig, double eps);

/// Default regularizer for sym_log: 1e-5 · max(λ_max, 1).
double default_log_eps(const EigenDecomposition& eig);

/// Σᵢⱼ aᵢⱼ bᵢⱼ. Throws ContractError on shape mismatch.
double frob_inner(const Matrix& a, const Matrix& b);
double frob_inner(const SymMatrix& a, const SymMatrix& b);

/// Π_κ tr(W^(κ)ᵀ X), which equals tr(⊗_κ W^(κ)ᵀ X). Returns 1 for an empty
/// list. Throws ContractError unless every factor has the shape of `x`.
double kron_trace(std::span<const Matrix> ws, const Matrix& x);

/// Column-major vectorization.
Vector vec(const Matrix& m);

}  // namespace kronfeat
