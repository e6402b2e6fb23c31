#include "helpers.hpp"
#include "kronfeat/errors.hpp"
#include "kronfeat/featmap.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace kronfeat;
using kronfeat::testing::gaussian_matrix;
using kronfeat::testing::kron_all;
using kronfeat::testing::unit_upper;

namespace {

MapSpec spec_of(MapKind kind, int nu, int input_dim, double sigma = 1.0, double theta = 0.9, std::uint64_t seed = 0) {
  MapSpec s;
  s.kind = kind;
  s.nu = nu;
  s.input_dim = input_dim;
  s.sigma = sigma;
  s.theta = theta;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(RbfExact, Examples) {
  std::mt19937_64 rng(1);
  const Matrix x = unit_upper(4, rng);
  EXPECT_EQ(rbf_exact(x, x, RbfParams{1.0}), 1.0);

  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(0, 1) = 1.0;
  EXPECT_NEAR(rbf_exact(a, b, RbfParams{1.0}), 0.36787944117144233, 1e-15);

  const Matrix y = unit_upper(4, rng);
  double dist2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) dist2 += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
  EXPECT_NEAR(rbf_exact(x, y, RbfParams{0.7}), std::exp(-dist2 / (2 * 0.49)), 1e-15);
  EXPECT_THROW(rbf_exact(x, Matrix::Zero(3, 3), RbfParams{1.0}), ContractError);
  EXPECT_THROW(rbf_exact(x, y, RbfParams{0.0}), ContractError);
}

TEST(DegreeDistribution, PmfSumsToOne) {
  for (double theta : {0.1, 0.5, 0.9, 1.0}) {
    const DegreeDistribution rho{theta};
    double total = 0.0;
    for (int n = 0; n < 2000; ++n) total += rho.pmf(n);
    EXPECT_NEAR(total, 1.0, 1e-12) << theta;
  }
  EXPECT_THROW(DegreeDistribution{0.0}.validate(), ContractError);
  EXPECT_THROW(DegreeDistribution{1.5}.validate(), ContractError);
}

TEST(MapKind, NamesRoundTrip) {
  for (MapKind k : {MapKind::kron_pi, MapKind::kron_e, MapKind::fourier, MapKind::taylor, MapKind::fastfood,
                    MapKind::perceptron})
    EXPECT_EQ(parse_map_kind(to_string(k)), k);
  EXPECT_THROW(parse_map_kind("rff"), ContractError);
}

TEST(KronPi, SeedDeterminism) {
  const FeatureMapModel a = sample_kron_pi(64, 4, RbfParams{1.0}, DegreeDistribution{0.5}, 7);
  const FeatureMapModel b = sample_kron_pi(64, 4, RbfParams{1.0}, DegreeDistribution{0.5}, 7);
  for (int j = 0; j < 64; ++j) {
    const auto& ca = a.product_params().components[j];
    const auto& cb = b.product_params().components[j];
    ASSERT_EQ(ca.degree, cb.degree);
    EXPECT_EQ(ca.coef, cb.coef);
    for (int k = 0; k < ca.degree; ++k) EXPECT_EQ(ca.factors[k], cb.factors[k]);
  }
  std::mt19937_64 rng(2);
  const Matrix x = unit_upper(4, rng);
  EXPECT_EQ(a.apply(x), b.apply(x));
  const FeatureMapModel c = sample_kron_pi(64, 4, RbfParams{1.0}, DegreeDistribution{0.5}, 8);
  EXPECT_NE(a.apply(x), c.apply(x));
}

TEST(KronPi, ComponentsIndependentOfNu) {
  const FeatureMapModel small = sample_kron_pi(5, 3, RbfParams{1.0}, DegreeDistribution{0.5}, 3);
  const FeatureMapModel large = sample_kron_pi(50, 3, RbfParams{1.0}, DegreeDistribution{0.5}, 3);
  for (int j = 0; j < 5; ++j) {
    const auto& a = small.product_params().components[j];
    const auto& b = large.product_params().components[j];
    ASSERT_EQ(a.degree, b.degree);
    for (int k = 0; k < a.degree; ++k) EXPECT_EQ(a.factors[k], b.factors[k]);
    EXPECT_NEAR(a.coef / b.coef, std::sqrt(10.0), 1e-12);
  }
}

TEST(KronPi, ThetaOneGivesDegreeZero) {
  const FeatureMapModel m = sample_kron_pi(200, 4, RbfParams{1.0}, DegreeDistribution{1.0}, 1);
  for (const auto& c : m.product_params().components) EXPECT_EQ(c.degree, 0);
}

TEST(KronPi, DegreeZeroFractionMatchesTheta) {
  const int nu = 10000;
  const double theta = 0.9;
  const FeatureMapModel m = sample_kron_pi(nu, 2, RbfParams{1.0}, DegreeDistribution{theta}, 11);
  int zeros = 0;
  for (const auto& c : m.product_params().components) zeros += c.degree == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / nu, theta, 3.0 * std::sqrt(theta * (1 - theta) / nu));
}

TEST(KronPi, WeightsHaveBandwidthStandardDeviation) {
  const double sigma = 0.7;
  const FeatureMapModel m = sample_kron_pi(2000, 4, RbfParams{sigma}, DegreeDistribution{0.3}, 5);
  double sum = 0.0, sum2 = 0.0;
  long count = 0;
  for (const auto& c : m.product_params().components)
    for (const auto& w : c.factors) {
      sum += w.sum();
      sum2 += w.squaredNorm();
      count += w.size();
    }
  ASSERT_GT(count, 10000);
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  EXPECT_NEAR(mean, 0.0, 4.0 * sigma / std::sqrt(count));
  EXPECT_NEAR(var, sigma * sigma, 4.0 * sigma * sigma * std::sqrt(2.0 / count));
}

TEST(KronPi, DegreeCapBoundsSmallTheta) {
  const FeatureMapModel m = sample_kron_pi(300, 2, RbfParams{1.0}, DegreeDistribution{0.01}, 4);
  for (const auto& c : m.product_params().components) {
    EXPECT_LE(c.degree, 20);
    EXPECT_TRUE(std::isfinite(c.coef));
  }
}

TEST(KronPi, DegreeZeroComponentIsConstant) {
  const double sigma = 0.8, theta = 0.9;
  const int nu = 20;
  const FeatureMapModel m = sample_kron_pi(nu, 3, RbfParams{sigma}, DegreeDistribution{theta}, 2);
  std::mt19937_64 rng(3);
  const Vector fx = m.apply(unit_upper(3, rng));
  const Vector fy = m.apply(unit_upper(3, rng));
  const double expected = std::sqrt(std::exp(-1.0 / (sigma * sigma)) / (nu * theta));
  int seen = 0;
  for (int j = 0; j < nu; ++j)
    if (m.product_params().components[j].degree == 0) {
      ++seen;
      EXPECT_NEAR(fx(j), expected, 1e-15);
      EXPECT_EQ(fx(j), fy(j));
    }
  EXPECT_GT(seen, 0);
}

TEST(KronPi, SingleComponentMatchesScalarFormula) {
  const double sigma = 1.0, theta = 0.9;
  std::mt19937_64 rng(4);
  const Matrix x = unit_upper(4, rng);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 5 && seed < 500; ++seed) {
    const FeatureMapModel m = sample_kron_pi(1, 4, RbfParams{sigma}, DegreeDistribution{theta}, seed);
    const auto& c = m.product_params().components[0];
    if (c.degree == 0) continue;
    ++checked;
    double prod = 1.0;
    for (const auto& w : c.factors) prod *= (w.transpose() * x).trace();
    const int n = c.degree;
    const double rho = std::pow(1 - theta, n) * theta;
    const double expected = std::pow(sigma, -2.0 * n) * std::sqrt(std::exp(-1.0 / (sigma * sigma)) / (rho * std::tgamma(n + 1.0))) * prod;
    EXPECT_NEAR(m.apply(x)(0), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
  EXPECT_EQ(checked, 5);
}

TEST(KronPi, CoefficientIsComputedInLogSpace) {
  const double c = product_coefficient(150, DegreeDistribution{0.001}.log_pmf(150), 0.5, 1);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(c, 0.0);
}

TEST(KronE, MatchesKronPiAtForcedDegreeOne) {
  MapSpec s = spec_of(MapKind::kron_pi, 40, 4, 1.0, 0.9, 17);
  s.forced_degree = 1;
  const FeatureMapModel pi = sample_map(s);
  s.kind = MapKind::kron_e;
  const FeatureMapModel e = sample_map(s);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const Matrix x = unit_upper(4, rng);
    EXPECT_EQ(pi.apply(x), e.apply(x));
  }
}

TEST(KronE, FactorizedEqualsMaterializedTensor) {
  MapSpec s = spec_of(MapKind::kron_e, 1, 2, 1.0, 0.9, 23);
  s.forced_degree = 2;
  const FeatureMapModel m = sample_map(s);
  const auto& comp = m.product_params().components[0];
  ASSERT_EQ(comp.factors.size(), 2u);
  std::mt19937_64 rng(6);
  const Matrix x = unit_upper(2, rng);
  const Matrix v = kron_all(comp.factors);  // 4×4
  const Matrix xx = kron_all({x, x});
  const double expected = comp.coef * (v.transpose() * xx).trace();
  EXPECT_NEAR(m.apply(x)(0), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  // Point-mass degree law: coefficient has log ρ = 0.
  EXPECT_NEAR(comp.coef, product_coefficient(2, 0.0, 1.0, 1), 1e-15);
}

TEST(Fourier, SelfInnerProductBoundedAndConverges) {
  std::mt19937_64 rng(7);
  const Matrix x = unit_upper(4, rng);
  for (int nu : {1, 10, 100}) {
    const Vector z = sample_fourier(nu, 16, RbfParams{1.0}, 3).apply(x);
    EXPECT_GE(z.squaredNorm(), 0.0);
    EXPECT_LE(z.squaredNorm(), 2.0);
  }
  const Vector z = sample_fourier(20000, 16, RbfParams{1.0}, 3).apply(x);
  EXPECT_NEAR(z.squaredNorm(), 1.0, 0.03);
}

TEST(Fourier, DistributionOfParameters) {
  const double sigma = 0.5;
  const FeatureMapModel m = sample_fourier(4000, 16, RbfParams{sigma}, 9);
  const auto& f = m.fourier_params();
  const double n = static_cast<double>(f.frequencies.size());
  const double var = f.frequencies.squaredNorm() / n;
  EXPECT_NEAR(var, 1.0 / (sigma * sigma), 4.0 / (sigma * sigma) * std::sqrt(2.0 / n));
  EXPECT_GE(f.phases.minCoeff(), 0.0);
  EXPECT_LT(f.phases.maxCoeff(), 2 * std::numbers::pi);
  EXPECT_NEAR(f.phases.mean(), std::numbers::pi, 4.0 * std::numbers::pi / std::sqrt(3.0 * 4000));
}

TEST(Fourier, SeedDeterminismAndWidthCheck) {
  std::mt19937_64 rng(8);
  const Matrix x = unit_upper(4, rng);
  EXPECT_EQ(sample_fourier(50, 16, RbfParams{1.0}, 1).apply(x), sample_fourier(50, 16, RbfParams{1.0}, 1).apply(x));
  EXPECT_THROW(sample_fourier(50, 9, RbfParams{1.0}, 1).apply(x), ContractError);
}

TEST(Taylor, DegreeZeroComponentIsConstant) {
  const double sigma = 1.0, theta = 0.9;
  const int nu = 30;
  const FeatureMapModel m = sample_taylor(nu, 16, RbfParams{sigma}, DegreeDistribution{theta}, 5);
  std::mt19937_64 rng(9);
  const Vector f = m.apply(unit_upper(4, rng));
  const double expected = std::sqrt(std::exp(-1.0) / (nu * theta));
  int seen = 0;
  for (int j = 0; j < nu; ++j) {
    const auto& c = m.product_params().components[j];
    if (c.degree == 0) {
      ++seen;
      EXPECT_NEAR(f(j), expected, 1e-15);
    }
    for (const auto& s : c.factors) EXPECT_EQ(s.cwiseAbs(), Matrix::Ones(16, 1));
  }
  EXPECT_GT(seen, 0);
}

TEST(Taylor, SeedDeterminism) {
  std::mt19937_64 rng(10);
  const Matrix x = unit_upper(4, rng);
  const auto a = sample_taylor(80, 16, RbfParams{1.0}, DegreeDistribution{0.5}, 2).apply(x);
  const auto b = sample_taylor(80, 16, RbfParams{1.0}, DegreeDistribution{0.5}, 2).apply(x);
  EXPECT_EQ(a, b);
}

TEST(Fwht, BasisVectorAndInvolution) {
  std::vector<double> e0{1, 0, 0, 0};
  fwht(e0);
  EXPECT_EQ(e0, (std::vector<double>{1, 1, 1, 1}));

  std::mt19937_64 rng(11);
  const Matrix v = gaussian_matrix(16, 1, rng);
  std::vector<double> w(v.data(), v.data() + 16);
  fwht(w);
  fwht(w);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(w[i], 16.0 * v(i), 1e-12);
  std::vector<double> bad(6);
  EXPECT_THROW(fwht(bad), ContractError);
}

TEST(Fwht, MatchesExplicitHadamard) {
  const int n = 8;
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = (__builtin_popcount(i & j) % 2) ? -1.0 : 1.0;
  std::mt19937_64 rng(12);
  const Vector v = gaussian_matrix(n, 1, rng);
  std::vector<double> w(v.data(), v.data() + n);
  fwht(w);
  const Vector expected = h * v;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(w[i], expected(i), 1e-12);
}

TEST(Fastfood, RejectsNonMultipleNamingMinimum) {
  EXPECT_EQ(next_pow2(9), 16);
  EXPECT_EQ(next_pow2(16), 16);
  try {
    sample_fastfood(100, 9, RbfParams{1.0}, 0);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("minimum valid nu is 16"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(sample_fastfood(32, 9, RbfParams{1.0}, 0));
}

TEST(Fastfood, ApproximatesKernelAtSixteenBlocks) {
  // Monte-Carlo average over map draws; a single draw has error std about 0.06 here.
  std::mt19937_64 rng(13);
  const int dp = 16;
  const int draws = 50;
  for (int k = 0; k < 5; ++k) {
    const Matrix x = unit_upper(4, rng);
    const Matrix y = unit_upper(4, rng);
    double mean = 0.0;
    for (int r = 0; r < draws; ++r) {
      const FeatureMapModel m = sample_fastfood(16 * dp, 16, RbfParams{1.0}, 100 * k + r);
      mean += m.apply(x).dot(m.apply(y)) / draws;
    }
    EXPECT_NEAR(mean, rbf_exact(x, y, RbfParams{1.0}), 0.05) << "pair " << k;
  }
}

TEST(Fastfood, ScalingUsesChiNorms) {
  const FeatureMapModel m = sample_fastfood(64 * 16, 16, RbfParams{1.0}, 3);
  double mean_s2g2 = 0.0;
  for (const auto& b : m.fastfood_params().blocks) {
    EXPECT_EQ(b.binary.cwiseAbs(), Vector::Ones(16));
    std::vector<int> perm = b.permutation;
    std::sort(perm.begin(), perm.end());
    for (int i = 0; i < 16; ++i) EXPECT_EQ(perm[i], i);
    mean_s2g2 += (b.scaling.cwiseProduct(b.scaling)).mean() * b.gaussian.squaredNorm();
  }
  mean_s2g2 /= 64.0;
  // S_i = sqrt(chi²(D')) / ‖G‖, so E[S_i²]·‖G‖² = D'.
  EXPECT_NEAR(mean_s2g2, 16.0, 4.0 * std::sqrt(2.0 * 16.0 / (64.0 * 16.0)));
}

TEST(ExactTaylor, ScalarSelfProductTendsToOne) {
  Vector x(1);
  x << 1.0;
  const Vector f = exact_taylor_map(x, 8, RbfParams{1.0});
  double remainder = 0.0;
  for (int n = 9; n < 30; ++n) remainder += std::exp(-1.0) / std::tgamma(n + 1.0);
  EXPECT_NEAR(f.squaredNorm(), 1.0 - remainder, 1e-14);
  EXPECT_LT(remainder, 2e-6);
}

TEST(ExactTaylor, TwoDimensionalUnitVectors) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 10; ++k) {
    Vector x = gaussian_matrix(2, 1, rng), y = gaussian_matrix(2, 1, rng);
    x.normalize();
    y.normalize();
    const double approx = exact_taylor_map(x, 8, RbfParams{1.0}).dot(exact_taylor_map(y, 8, RbfParams{1.0}));
    const double exact = std::exp(-(x - y).squaredNorm() / 2.0);
    const double c = std::abs(x.dot(y));
    double remainder = 0.0;
    for (int n = 9; n < 40; ++n) remainder += std::exp(-1.0) * std::pow(c, n) / std::tgamma(n + 1.0);
    EXPECT_LE(std::abs(approx - exact), remainder + 1e-14);
    if (c < 0.99) EXPECT_LE(std::abs(approx - exact), 1e-6);
  }
}

TEST(ExactTaylor, DegreeZeroAndGuards) {
  const double sigma = 0.6;
  Vector x(3), y(3);
  x << 1, 0, 0;
  y << 0, 0.6, 0.8;
  const double v = exact_taylor_map(x, 0, RbfParams{sigma}).dot(exact_taylor_map(y, 0, RbfParams{sigma}));
  EXPECT_NEAR(v, std::exp(-1.0 / (sigma * sigma)), 1e-15);
  EXPECT_THROW(exact_taylor_map(Vector::Zero(7), 2, RbfParams{1.0}), ContractError);
  EXPECT_THROW(exact_taylor_map(x, 9, RbfParams{1.0}), ContractError);
}

TEST(AllMaps, InnerProductsSymmetricAndDeterministic) {
  std::mt19937_64 rng(15);
  const Matrix x = unit_upper(4, rng), y = unit_upper(4, rng);
  for (MapKind kind : {MapKind::kron_pi, MapKind::kron_e, MapKind::fourier, MapKind::taylor, MapKind::fastfood}) {
    const int dim = takes_matrix_input(kind) ? 4 : 16;
    const MapSpec s = spec_of(kind, 32, dim, 1.0, 0.5, 99);
    const FeatureMapModel a = sample_map(s), b = sample_map(s);
    EXPECT_EQ(a.apply(x).dot(a.apply(y)), a.apply(y).dot(a.apply(x))) << to_string(kind);
    EXPECT_EQ(a.apply(x), b.apply(x)) << to_string(kind);
    const Matrix batch = a.apply_batch(std::vector<Matrix>{x, y});
    EXPECT_EQ(Vector(batch.row(1).transpose()), a.apply(y));
  }
}

TEST(AllMaps, ContractErrors) {
  EXPECT_THROW(sample_kron_pi(0, 4, RbfParams{1.0}, DegreeDistribution{0.9}, 0), ContractError);
  EXPECT_THROW(sample_kron_pi(5, 0, RbfParams{1.0}, DegreeDistribution{0.9}, 0), ContractError);
  EXPECT_THROW(sample_kron_pi(5, 4, RbfParams{-1.0}, DegreeDistribution{0.9}, 0), ContractError);
  EXPECT_THROW(sample_kron_e(5, 4, RbfParams{1.0}, DegreeDistribution{0.0}, 0), ContractError);
  EXPECT_THROW(sample_map(spec_of(MapKind::perceptron, 5, 16)), ContractError);
  const FeatureMapModel m = sample_kron_pi(5, 4, RbfParams{1.0}, DegreeDistribution{0.9}, 0);
  EXPECT_THROW(m.apply(Matrix::Zero(3, 3)), ContractError);
  EXPECT_THROW(m.fourier_params(), ContractError);
}
