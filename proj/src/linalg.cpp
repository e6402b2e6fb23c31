#include "kronfeat/linalg.hpp"

#include "kronfeat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kronfeat {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw ContractError("SymMatrix: expected a non-empty square matrix, got " +
                        std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  for (Eigen::Index j = 0; j < m_.cols(); ++j)
    for (Eigen::Index i = j + 1; i < m_.rows(); ++i)
      if (m_(i, j) != m_(j, i))
        throw ContractError("SymMatrix: entries (" + std::to_string(i) + "," + std::to_string(j) +
                            ") and its mirror differ");
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractError("SymMatrix::symmetrized: matrix is not square");
  Matrix s = m;
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index i = j + 1; i < s.rows(); ++i) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return SymMatrix(std::move(s));
}

SymMatrix SymMatrix::identity(int dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

// One Jacobi rotation annihilating a(p, q); a is kept exactly symmetric.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    const double np = c * akp - s * akq;
    const double nq = s * akp + c * akq;
    a(k, p) = a(p, k) = np;
    a(k, q) = a(q, k) = nq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

EigenDecomposition eigh(const SymMatrix& m, const JacobiOptions& opts) {
  const int d = m.dim();
  Matrix a = m.matrix();
  Matrix v = Matrix::Identity(d, d);

  const double threshold = opts.relative_tolerance * a.norm();
  const long max_sweeps = static_cast<long>(opts.sweep_factor) * d * d;
  bool converged = off_diagonal_norm(a) <= threshold;
  for (long sweep = 0; !converged && sweep < max_sweeps; ++sweep) {
    for (Eigen::Index p = 0; p < d - 1; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) rotate(a, v, p, q);
    converged = off_diagonal_norm(a) <= threshold;
  }
  if (!converged)
    throw NumericError("eigh: Jacobi iteration did not converge for a " + std::to_string(d) + "x" +
                       std::to_string(d) + " matrix");

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(d), Matrix(d, d)};
  for (int k = 0; k < d; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

SymMatrix sym_log(const EigenDecomposition& eig, double eps) {
  const Eigen::Index d = eig.eigenvalues.size();
  Vector logs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda < -1e-10)
      throw DomainError("sym_log: matrix is not positive semi-definite (eigenvalue " +
                        std::to_string(lambda) + ")");
    if (lambda + eps <= 0.0)
      throw DomainError("sym_log: eigenvalue " + std::to_string(lambda) + " plus regularizer " +
                        std::to_string(eps) + " is not positive");
    logs(i) = std::log(lambda + eps);
  }
  const Matrix& u = eig.eigenvectors;
  return SymMatrix::symmetrized(u * logs.asDiagonal() * u.transpose());
}

SymMatrix sym_log(const SymMatrix& m, double eps) { return sym_log(eigh(m), eps); }

double default_log_eps(const EigenDecomposition& eig) {
  const double top = eig.eigenvalues.size() ? eig.eigenvalues.maxCoeff() : 0.0;
  return 1e-5 * std::max(top, 1.0);
}

double frob_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractError("frob_inner: shape mismatch (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

double frob_inner(const SymMatrix& a, const SymMatrix& b) { return frob_inner(a.matrix(), b.matrix()); }

double kron_trace(std::span<const Matrix> ws, const Matrix& x) {
  double prod = 1.0;
  for (const Matrix& w : ws) {
    if (w.rows() != x.rows() || w.cols() != x.cols())
      throw ContractError("kron_trace: factor shape does not match the input matrix");
    // tr(Wᵀ X) = ⟨W, X⟩_F
    prod *= frob_inner(w, x);
  }
  return prod;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace kronfeat
