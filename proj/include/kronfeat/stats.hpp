#pragma once

// Theory checks for the Kronecker feature maps: the C_ρ series, the
// closed-form variance bounds, the Chebyshev deviation bound, and a
// Monte-Carlo harness measuring bias and variance of induced inner products.

#include "kronfeat/featmap.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace kronfeat {

struct CRhoResult {
  double series = 0.0;       // Σ_n 1/(ρ(n) n!) summed to tolerance (inf if it overflows)
  double closed_form = 0.0;  // ((1-θ)/θ)·exp((1-θ)/θ)
  int terms = 0;
  bool diverged = false;  // ratio test never started decaying
};

/// Sums the series until the running term drops below tol · partial sum (once
/// the terms are decreasing). Throws ContractError unless θ ∈ (0, 1) and
/// tol > 0.
CRhoResult c_rho(const DegreeDistribution& rho, double truncation_tol = 1e-16);

/// Fourth moment of Normal(0, σ²): 3σ⁴.
double m4_gaussian(double sigma);

/// kron_pi: (C_ρ/ν³)·exp((9 m₄ - 2σ⁴)/σ⁸); kron_e: (C_ρ/ν³)·exp((3 - 2σ²)/σ⁴).
/// C_ρ is the series value. Other kinds throw ContractError. May return +inf.
double variance_bound(MapKind kind, int nu, const RbfParams& p, const DegreeDistribution& rho);

/// min(1, variance_bound / eps²). Throws ContractError unless eps > 0.
double chebyshev_bound(MapKind kind, int nu, const RbfParams& p, const DegreeDistribution& rho, double eps);

struct ChebyshevRow {
  double eps;
  double prob_kron_pi;
  double prob_kron_e;
};

struct BoundReport {
  int nu = 1;
  double sigma = 1.0;
  double theta = 0.9;
  double c_rho_series = 0.0;
  double c_rho_closed_form = 0.0;
  bool c_rho_diverged = false;
  double variance_bound_pi = 0.0;
  double variance_bound_e = 0.0;
  std::vector<ChebyshevRow> chebyshev;
};

BoundReport make_bound_report(int nu, const RbfParams& p, const DegreeDistribution& rho,
                              std::span<const double> eps_values);

struct EstimatorStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_error = 0.0;   // sqrt(variance / samples)
  long samples = 0;
};

/// Pairwise (cascade) summation; result does not depend on how the caller
/// partitioned work as long as the input order is fixed.
double pairwise_sum(std::span<const double> values);

EstimatorStats summarize(std::span<const double> values);

struct McResult {
  EstimatorStats stats;
  double target = 0.0;  // exact kernel value
  double z_score = 0.0;
  bool unbiased = false;                  // |mean - target| ≤ 3·stderr
  std::optional<double> bound;            // variance bound, when supplied
  std::optional<bool> within_bound;       // variance ≤ 2·bound
};

/// One draw of ⟨φ(X), φ(Y)⟩ for the given repetition seed.
using InnerProductSampler = std::function<double(std::uint64_t)>;
/// Builds a fresh feature map for the given repetition seed.
using MapFactory = std::function<FeatureMapModel(std::uint64_t)>;

struct McOptions {
  std::uint64_t seed = 0;
  std::optional<double> variance_bound;
  double z_threshold = 3.0;
  double bound_slack = 2.0;
};

/// Repetition r uses seed sub_seed(opts.seed, r). Throws ContractError for
/// repetitions < 1000.
McResult mc_bias_variance(const InnerProductSampler& sampler, const Matrix& x, const Matrix& y, int repetitions,
                          const RbfParams& p, const McOptions& opts = {});
McResult mc_bias_variance(const MapFactory& factory, const Matrix& x, const Matrix& y, int repetitions,
                          const RbfParams& p, const McOptions& opts = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace kronfeat
