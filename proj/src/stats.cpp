#include "kronfeat/stats.hpp"

#include "kronfeat/errors.hpp"
#include "kronfeat/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kronfeat {

CRhoResult c_rho(const DegreeDistribution& rho, double truncation_tol) {
  const double theta = rho.theta;
  if (!(theta > 0.0 && theta < 1.0)) throw ContractError("c_rho: theta must lie in (0, 1)");
  if (!(truncation_tol > 0.0)) throw ContractError("c_rho: truncation tolerance must be positive");

  CRhoResult out;
  const double r = (1.0 - theta) / theta;
  out.closed_form = r * std::exp(r);

  // term_n = 1 / (ρ(n) n!) = θ⁻¹ (1-θ)⁻ⁿ / n!, accumulated in extended precision.
  const long double log_inv_q = -std::log1p(-static_cast<long double>(theta));
  const long double log_inv_theta = -std::log(static_cast<long double>(theta));
  long double sum = 0.0L;
  long double prev_term = 0.0L;
  long double prev_ratio = 0.0L;
  int growing_ratio_run = 0;
  constexpr int kMaxTerms = 10'000'000;
  for (int n = 0; n < kMaxTerms; ++n) {
    const long double log_term = log_inv_theta + n * log_inv_q - std::lgamma(static_cast<long double>(n) + 1.0L);
    const long double term = std::exp(log_term);
    sum += term;
    out.terms = n + 1;
    if (!std::isfinite(static_cast<double>(sum))) {
      out.series = std::numeric_limits<double>::infinity();
      return out;
    }
    if (n > 0) {
      const long double ratio = term / prev_term;
      // A convergent series eventually has a shrinking term ratio; ten
      // consecutive growing steps with a non-decreasing ratio means it will not.
      growing_ratio_run = (ratio >= 1.0L && ratio >= prev_ratio) ? growing_ratio_run + 1 : 0;
      if (growing_ratio_run >= 10) {
        out.diverged = true;
        out.series = std::numeric_limits<double>::infinity();
        return out;
      }
      if (ratio < 1.0L && term < truncation_tol * sum) break;
      prev_ratio = ratio;
    }
    prev_term = term;
  }
  out.series = static_cast<double>(sum);
  return out;
}

double m4_gaussian(double sigma) {
  RbfParams{sigma}.validate();
  const double s2 = sigma * sigma;
  return 3.0 * s2 * s2;
}

double variance_bound(MapKind kind, int nu, const RbfParams& p, const DegreeDistribution& rho) {
  p.validate();
  if (nu < 1) throw ContractError("variance_bound: nu must be >= 1");
  const double s2 = p.sigma * p.sigma;
  const double s4 = s2 * s2;
  double exponent = 0.0;
  switch (kind) {
    case MapKind::kron_pi: exponent = (9.0 * m4_gaussian(p.sigma) - 2.0 * s4) / (s4 * s4); break;
    case MapKind::kron_e: exponent = (3.0 - 2.0 * s2) / s4; break;
    default: throw ContractError("variance_bound: only kron_pi and kron_e have closed-form bounds");
  }
  const double crho = c_rho(rho).series;
  const double nu3 = static_cast<double>(nu) * nu * nu;
  return crho / nu3 * std::exp(exponent);
}

double chebyshev_bound(MapKind kind, int nu, const RbfParams& p, const DegreeDistribution& rho, double eps) {
  if (!(eps > 0.0)) throw ContractError("chebyshev_bound: eps must be positive");
  return std::min(1.0, variance_bound(kind, nu, p, rho) / (eps * eps));
}

BoundReport make_bound_report(int nu, const RbfParams& p, const DegreeDistribution& rho,
                              std::span<const double> eps_values) {
  BoundReport r;
  r.nu = nu;
  r.sigma = p.sigma;
  r.theta = rho.theta;
  const CRhoResult c = c_rho(rho);
  r.c_rho_series = c.series;
  r.c_rho_closed_form = c.closed_form;
  r.c_rho_diverged = c.diverged;
  r.variance_bound_pi = variance_bound(MapKind::kron_pi, nu, p, rho);
  r.variance_bound_e = variance_bound(MapKind::kron_e, nu, p, rho);
  for (double eps : eps_values)
    r.chebyshev.push_back({eps, chebyshev_bound(MapKind::kron_pi, nu, p, rho, eps),
                           chebyshev_bound(MapKind::kron_e, nu, p, rho, eps)});
  return r;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimatorStats summarize(std::span<const double> values) {
  EstimatorStats s;
  s.samples = static_cast<long>(values.size());
  if (values.empty()) return s;
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - s.mean) * (values[i] - s.mean);
    s.variance = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  }
  s.std_error = std::sqrt(s.variance / static_cast<double>(values.size()));
  return s;
}

McResult mc_bias_variance(const InnerProductSampler& sampler, const Matrix& x, const Matrix& y, int repetitions,
                          const RbfParams& p, const McOptions& opts) {
  if (repetitions < 1000) throw ContractError("mc_bias_variance: need at least 1000 repetitions");
  std::vector<double> draws(repetitions);
  for (int r = 0; r < repetitions; ++r) draws[r] = sampler(sub_seed(opts.seed, static_cast<std::uint64_t>(r)));

  McResult out;
  out.stats = summarize(draws);
  out.target = rbf_exact(x, y, p);
  const double bias = out.stats.mean - out.target;
  if (out.stats.std_error > 0.0)
    out.z_score = bias / out.stats.std_error;
  else
    out.z_score = bias == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), bias);
  out.unbiased = std::abs(bias) <= opts.z_threshold * out.stats.std_error;
  if (opts.variance_bound) {
    out.bound = opts.variance_bound;
    out.within_bound = out.stats.variance <= opts.bound_slack * *opts.variance_bound;
  }
  return out;
}

McResult mc_bias_variance(const MapFactory& factory, const Matrix& x, const Matrix& y, int repetitions,
                          const RbfParams& p, const McOptions& opts) {
  const InnerProductSampler sampler = [&](std::uint64_t seed) {
    const FeatureMapModel m = factory(seed);
    return m.apply(x).dot(m.apply(y));
  };
  return mc_bias_variance(sampler, x, y, repetitions, p, opts);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ContractError("spearman: need two equal-length series of size >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const Eigen::Map<const Vector> va(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const Eigen::Map<const Vector> vb(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Vector ca = va.array() - va.mean();
  const Vector cb = vb.array() - vb.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return denom > 0.0 ? ca.dot(cb) / denom : 0.0;
}

}  // namespace kronfeat
