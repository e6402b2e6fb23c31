#include "helpers.hpp"
#include "kronfeat/errors.hpp"
#include "kronfeat/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace kronfeat;
using kronfeat::testing::gaussian_matrix;
using kronfeat::testing::kron_all;
using kronfeat::testing::random_spd;
using kronfeat::testing::random_symmetric;

namespace {

void expect_valid_decomposition(const Matrix& m, const EigenDecomposition& e) {
  const auto d = m.rows();
  const Matrix recon = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
  EXPECT_LE((recon - m).norm(), 1e-10 * d * std::max(1.0, m.cwiseAbs().maxCoeff()));
  EXPECT_LE((e.eigenvectors.transpose() * e.eigenvectors - Matrix::Identity(d, d)).norm(), 1e-10);
  for (Eigen::Index i = 1; i < d; ++i) EXPECT_LE(e.eigenvalues(i - 1), e.eigenvalues(i));
}

// Matrix exponential through the eigendecomposition; test-only.
Matrix sym_exp(const Matrix& m) {
  const EigenDecomposition e = eigh(SymMatrix(m));
  return e.eigenvectors * e.eigenvalues.array().exp().matrix().asDiagonal() * e.eigenvectors.transpose();
}

}  // namespace

TEST(SymMatrix, RejectsAsymmetricInput) {
  Matrix m(2, 2);
  m << 1, 2, 2.0000001, 1;
  EXPECT_THROW(SymMatrix{m}, ContractError);
  EXPECT_THROW(SymMatrix{Matrix(2, 3)}, ContractError);
  EXPECT_THROW(SymMatrix{Matrix(0, 0)}, ContractError);
}

TEST(SymMatrix, SymmetrizationIsExplicit) {
  Matrix m(2, 2);
  m << 1, 2, 4, 1;
  const SymMatrix s = SymMatrix::symmetrized(m);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
}

TEST(Eigh, IdentityHasUnitEigenvalues) {
  const EigenDecomposition e = eigh(SymMatrix::identity(3));
  EXPECT_EQ(e.eigenvalues, Vector::Ones(3));
  expect_valid_decomposition(Matrix::Identity(3, 3), e);
}

TEST(Eigh, DiagonalGivesSignedPermutation) {
  Vector diag(2);
  diag << 5, 2;
  const EigenDecomposition e = eigh(SymMatrix::diagonal(diag));
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), 2.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 5.0);
  EXPECT_EQ(e.eigenvectors.cwiseAbs(), (Matrix(2, 2) << 0, 1, 1, 0).finished());
}

TEST(Eigh, RandomSymmetricReconstructs) {
  std::mt19937_64 rng(6);
  const Matrix m = random_symmetric(6, rng);
  expect_valid_decomposition(m, eigh(SymMatrix(m)));
}

TEST(Eigh, MatchesReferenceSolverOnManySizes) {
  std::mt19937_64 rng(11);
  for (int d : {1, 2, 3, 5, 8, 15, 30}) {
    const Matrix m = random_symmetric(d, rng);
    const EigenDecomposition e = eigh(SymMatrix(m));
    expect_valid_decomposition(m, e);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(m);
    EXPECT_LE((e.eigenvalues - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, m.norm())) << "d=" << d;
  }
}

TEST(Eigh, ZeroMatrix) {
  const EigenDecomposition e = eigh(SymMatrix(Matrix::Zero(3, 3)));
  EXPECT_EQ(e.eigenvalues, Vector::Zero(3));
}

TEST(Eigh, SweepCapRaisesNumericErrorNamingDimension) {
  std::mt19937_64 rng(3);
  const Matrix m = random_symmetric(5, rng);
  JacobiOptions opts;
  opts.sweep_factor = 0;
  opts.relative_tolerance = 1e-300;
  try {
    eigh(SymMatrix(m), opts);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
  }
}

TEST(SymLog, IdentityIsExactlyZero) {
  const SymMatrix l = sym_log(SymMatrix::identity(4), 0.0);
  EXPECT_LT(l.matrix().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SymLog, DiagonalScalarLogs) {
  Vector diag(2);
  diag << std::numbers::e, std::exp(2.0);
  const SymMatrix l = sym_log(SymMatrix::diagonal(diag), 0.0);
  EXPECT_NEAR(l(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(l(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(l(0, 1), 0.0, 1e-14);
}

TEST(SymLog, RankDeficientWithRegularizer) {
  std::mt19937_64 rng(9);
  const Matrix b = gaussian_matrix(3, 2, rng);
  const SymMatrix c = SymMatrix::symmetrized(b * b.transpose());
  const EigenDecomposition e = eigh(c);
  const SymMatrix l = sym_log(c, 1e-6);
  ASSERT_TRUE(l.matrix().allFinite());
  const Vector got = eigh(SymMatrix::symmetrized(l.matrix())).eigenvalues;
  Vector expected = (e.eigenvalues.array() + 1e-6).log().matrix();
  std::sort(expected.data(), expected.data() + expected.size());
  EXPECT_NEAR(got(0), std::log(1e-6), 1e-6);
  EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SymLog, InverseOfExponential) {
  std::mt19937_64 rng(21);
  for (int d : {2, 4, 9}) {
    const Matrix c = random_spd(d, rng);
    const Matrix back = sym_exp(sym_log(SymMatrix(c), 0.0).matrix());
    EXPECT_LE((back - c).norm() / c.norm(), 1e-8) << "d=" << d;
  }
}

TEST(SymLog, OutputIsExactlySymmetric) {
  std::mt19937_64 rng(22);
  const SymMatrix l = sym_log(SymMatrix(random_spd(7, rng)), 0.0);
  EXPECT_EQ(l.matrix(), l.matrix().transpose());
}

TEST(SymLog, NonPositiveEigenvalueIsDomainError) {
  Vector diag(2);
  diag << 1.0, 0.0;
  EXPECT_THROW(sym_log(SymMatrix::diagonal(diag), 0.0), DomainError);
  diag << 1.0, -0.5;
  try {
    sym_log(SymMatrix::diagonal(diag), 1.0);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
  }
}

TEST(SymLog, DefaultEpsFollowsLargestEigenvalue) {
  Vector diag(2);
  diag << 0.5, 40.0;
  EXPECT_DOUBLE_EQ(default_log_eps(eigh(SymMatrix::diagonal(diag))), 1e-5 * 40.0);
  diag << 0.1, 0.5;
  EXPECT_DOUBLE_EQ(default_log_eps(eigh(SymMatrix::diagonal(diag))), 1e-5);
}

TEST(FrobInner, Examples) {
  EXPECT_DOUBLE_EQ(frob_inner(SymMatrix::identity(3), SymMatrix::identity(3)), 3.0);
  std::mt19937_64 rng(4);
  Matrix x = gaussian_matrix(4, 4, rng);
  x /= x.norm();
  EXPECT_NEAR(frob_inner(x, x), 1.0, 1e-15);

  const Matrix a = gaussian_matrix(4, 4, rng);
  const Matrix b = gaussian_matrix(4, 4, rng);
  double naive = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) naive += a(i, j) * b(i, j);
  EXPECT_NEAR(frob_inner(a, b), naive, 1e-13);
  EXPECT_EQ(frob_inner(a, b), frob_inner(b, a));
}

TEST(FrobInner, ShapeMismatch) {
  EXPECT_THROW(frob_inner(Matrix(2, 2), Matrix(2, 3)), ContractError);
}

TEST(KronTrace, EmptyProductIsOne) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(kron_trace({}, gaussian_matrix(3, 3, rng)), 1.0);
}

TEST(KronTrace, SingleIdentityIsTrace) {
  std::mt19937_64 rng(2);
  const Matrix x = gaussian_matrix(4, 4, rng);
  const std::vector<Matrix> ws{Matrix::Identity(4, 4)};
  EXPECT_NEAR(kron_trace(ws, x), x.trace(), 1e-14);
}

TEST(KronTrace, MatchesMaterializedKronecker) {
  std::mt19937_64 rng(31);
  for (int d = 1; d <= 4; ++d) {
    for (int n = 0; n <= 3; ++n) {
      for (int rep = 0; rep < 3; ++rep) {
        const Matrix x = gaussian_matrix(d, d, rng);
        std::vector<Matrix> ws;
        for (int k = 0; k < n; ++k) ws.push_back(gaussian_matrix(d, d, rng));
        const Matrix big = kron_all(ws).transpose() * kron_all(std::vector<Matrix>(n, x));
        const double expected = big.trace();
        EXPECT_NEAR(kron_trace(ws, x), expected, 1e-9 * std::max(1.0, std::abs(expected))) << "d=" << d << " n=" << n;
      }
    }
  }
}

TEST(KronTrace, ShapeMismatch) {
  const std::vector<Matrix> ws{Matrix::Zero(3, 3)};
  EXPECT_THROW(kron_trace(ws, Matrix::Zero(2, 2)), ContractError);
}

TEST(Vec, ColumnMajor) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_EQ(vec(m), (Vector(4) << 1, 3, 2, 4).finished());
}
