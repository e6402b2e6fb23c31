#include "kronfeat/featmap.hpp"

#include "kronfeat/errors.hpp"
#include "kronfeat/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace kronfeat {

namespace {

// Stream salts. kron_pi and kron_e share one so that equal seeds give equal
// weights.
constexpr std::uint64_t kKronSalt = 0x6b726f6eULL;
constexpr std::uint64_t kFourierSalt = 0x666f7572ULL;
constexpr std::uint64_t kTaylorSalt = 0x7461796cULL;
constexpr std::uint64_t kFastfoodSalt = 0x66617374ULL;

void check_nu(int nu) {
  if (nu < 1) throw ContractError("feature map: nu must be >= 1, got " + std::to_string(nu));
}

void check_dim(int dim, const char* what) {
  if (dim < 1) throw ContractError(std::string("feature map: ") + what + " must be >= 1");
}

int draw_degree(Rng& rng, const MapSpec& spec) {
  if (spec.forced_degree) return *spec.forced_degree;
  if (spec.theta >= 1.0) return 0;
  std::geometric_distribution<int> geo(spec.theta);
  for (;;) {
    const int n = geo(rng);
    if (n <= spec.max_degree) return n;
  }
}

double degree_log_rho(const MapSpec& spec, int n) {
  if (spec.forced_degree) return 0.0;
  return DegreeDistribution{spec.theta}.log_pmf(n);
}

void validate_product_spec(const MapSpec& spec) {
  check_nu(spec.nu);
  check_dim(spec.input_dim, "input dimension");
  RbfParams{spec.sigma}.validate();
  if (spec.forced_degree) {
    if (*spec.forced_degree < 0) throw ContractError("feature map: forced degree must be >= 0");
  } else {
    DegreeDistribution{spec.theta}.validate();
  }
  if (spec.max_degree < 0) throw ContractError("feature map: max_degree must be >= 0");
}

FeatureMapModel sample_kron(MapSpec spec) {
  validate_product_spec(spec);
  const int d = spec.input_dim;
  const std::uint64_t stream = sub_seed(spec.seed, kKronSalt);
  ProductParams params;
  params.components.reserve(spec.nu);
  for (int j = 0; j < spec.nu; ++j) {
    Rng rng = make_rng(stream, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, spec.sigma);
    ProductComponent comp;
    comp.degree = draw_degree(rng, spec);
    comp.coef = product_coefficient(comp.degree, degree_log_rho(spec, comp.degree), spec.sigma, spec.nu);
    comp.factors.reserve(comp.degree);
    for (int k = 0; k < comp.degree; ++k) {
      Matrix w(d, d);
      for (Eigen::Index e = 0; e < w.size(); ++e) w.data()[e] = normal(rng);
      comp.factors.push_back(std::move(w));
    }
    params.components.push_back(std::move(comp));
  }
  return FeatureMapModel(std::move(spec), std::move(params));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void RbfParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ContractError("RbfParams: sigma must be positive and finite, got " + std::to_string(sigma));
}

void DegreeDistribution::validate() const {
  if (!(theta > 0.0 && theta <= 1.0))
    throw ContractError("DegreeDistribution: theta must lie in (0, 1], got " + std::to_string(theta));
}

double DegreeDistribution::log_pmf(int n) const {
  if (n < 0) return -std::numeric_limits<double>::infinity();
  if (n == 0) return std::log(theta);
  if (theta >= 1.0) return -std::numeric_limits<double>::infinity();
  return n * std::log1p(-theta) + std::log(theta);
}

double DegreeDistribution::pmf(int n) const { return std::exp(log_pmf(n)); }

std::string_view to_string(MapKind kind) {
  switch (kind) {
    case MapKind::kron_pi: return "kron_pi";
    case MapKind::kron_e: return "kron_e";
    case MapKind::fourier: return "fourier";
    case MapKind::taylor: return "taylor";
    case MapKind::fastfood: return "fastfood";
    case MapKind::perceptron: return "perceptron";
  }
  return "unknown";
}

MapKind parse_map_kind(std::string_view name) {
  for (MapKind k : {MapKind::kron_pi, MapKind::kron_e, MapKind::fourier, MapKind::taylor, MapKind::fastfood,
                    MapKind::perceptron})
    if (to_string(k) == name) return k;
  throw ContractError("unknown feature map kind '" + std::string(name) + "'");
}

bool takes_matrix_input(MapKind kind) { return kind == MapKind::kron_pi || kind == MapKind::kron_e; }

FeatureMapModel::FeatureMapModel(MapSpec spec, ProductParams params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  if (spec_.kind != MapKind::kron_pi && spec_.kind != MapKind::kron_e && spec_.kind != MapKind::taylor)
    throw ContractError("FeatureMapModel: product parameters need kind kron_pi, kron_e or taylor");
  if (std::get<ProductParams>(params_).components.size() != static_cast<std::size_t>(spec_.nu))
    throw ContractError("FeatureMapModel: component count does not match nu");
}

FeatureMapModel::FeatureMapModel(MapSpec spec, FourierParams params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const auto& f = std::get<FourierParams>(params_);
  if (spec_.kind != MapKind::fourier || f.frequencies.rows() != spec_.nu ||
      f.frequencies.cols() != spec_.input_dim || f.phases.size() != spec_.nu)
    throw ContractError("FeatureMapModel: inconsistent fourier parameters");
}

FeatureMapModel::FeatureMapModel(MapSpec spec, FastfoodParams params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const auto& f = std::get<FastfoodParams>(params_);
  if (spec_.kind != MapKind::fastfood ||
      static_cast<long>(f.blocks.size()) * f.padded_dim != spec_.nu || f.phases.size() != spec_.nu)
    throw ContractError("FeatureMapModel: inconsistent fastfood parameters");
}

FeatureMapModel::FeatureMapModel(MapSpec spec, PerceptronParams params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const auto& p = std::get<PerceptronParams>(params_);
  if (spec_.kind != MapKind::perceptron || p.weights.rows() != spec_.nu || p.weights.cols() != spec_.input_dim ||
      p.bias.size() != spec_.nu)
    throw ContractError("FeatureMapModel: inconsistent perceptron parameters");
}

const ProductParams& FeatureMapModel::product_params() const {
  if (auto* p = std::get_if<ProductParams>(&params_)) return *p;
  throw ContractError("FeatureMapModel: not a product-type map");
}

const FourierParams& FeatureMapModel::fourier_params() const {
  if (auto* p = std::get_if<FourierParams>(&params_)) return *p;
  throw ContractError("FeatureMapModel: not a fourier map");
}

const FastfoodParams& FeatureMapModel::fastfood_params() const {
  if (auto* p = std::get_if<FastfoodParams>(&params_)) return *p;
  throw ContractError("FeatureMapModel: not a fastfood map");
}

const PerceptronParams& FeatureMapModel::perceptron_params() const {
  if (auto* p = std::get_if<PerceptronParams>(&params_)) return *p;
  throw ContractError("FeatureMapModel: not a perceptron map");
}

void FeatureMapModel::check_input(const Matrix& x) const {
  if (takes_matrix_input(spec_.kind)) {
    if (x.rows() != spec_.input_dim || x.cols() != spec_.input_dim)
      throw ContractError("feature map " + std::string(to_string(spec_.kind)) + ": expected a " +
                          std::to_string(spec_.input_dim) + "x" + std::to_string(spec_.input_dim) + " input, got " +
                          std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  } else if (x.size() != spec_.input_dim) {
    throw ContractError("feature map " + std::string(to_string(spec_.kind)) + ": expected " +
                        std::to_string(spec_.input_dim) + " input entries, got " + std::to_string(x.size()));
  }
}

Vector FeatureMapModel::apply(const Matrix& x) const {
  check_input(x);
  Vector out(spec_.nu);
  switch (spec_.kind) {
    case MapKind::kron_pi:
    case MapKind::kron_e: {
      // kron_e contracts V = ⊗V^(κ) with X^{⊗n}; tr(Vᵀ X^{⊗n}) = Π tr(V^(κ)ᵀ X).
      const auto& comps = std::get<ProductParams>(params_).components;
      for (int j = 0; j < spec_.nu; ++j) out(j) = comps[j].coef * kron_trace(comps[j].factors, x);
      break;
    }
    case MapKind::taylor: {
      const auto& comps = std::get<ProductParams>(params_).components;
      const Vector v = vec(x);
      for (int j = 0; j < spec_.nu; ++j) {
        double prod = comps[j].coef;
        for (const Matrix& s : comps[j].factors) prod *= s.col(0).dot(v);
        out(j) = prod;
      }
      break;
    }
    case MapKind::fourier: {
      const auto& f = std::get<FourierParams>(params_);
      const double scale = std::sqrt(2.0 / spec_.nu);
      out = ((f.frequencies * vec(x)) + f.phases).array().cos() * scale;
      break;
    }
    case MapKind::fastfood: {
      const auto& f = std::get<FastfoodParams>(params_);
      const int dp = f.padded_dim;
      Vector padded = Vector::Zero(dp);
      padded.head(spec_.input_dim) = vec(x);
      const double pre = 1.0 / (spec_.sigma * std::sqrt(static_cast<double>(dp)));
      const double post = std::sqrt(2.0 / spec_.nu);
      Vector work(dp), permuted(dp);
      for (std::size_t b = 0; b < f.blocks.size(); ++b) {
        const FastfoodBlock& blk = f.blocks[b];
        work = blk.binary.cwiseProduct(padded);
        fwht(std::span<double>(work.data(), dp));
        for (int i = 0; i < dp; ++i) permuted(i) = work(blk.permutation[i]) * blk.gaussian(i);
        fwht(std::span<double>(permuted.data(), dp));
        for (int i = 0; i < dp; ++i) {
          const std::size_t j = b * dp + i;
          out(j) = post * std::cos(pre * blk.scaling(i) * permuted(i) + f.phases(j));
        }
      }
      break;
    }
    case MapKind::perceptron: {
      const auto& p = std::get<PerceptronParams>(params_);
      out = p.weights * vec(x);
      if (p.keep_bias) out += p.bias;
      if (p.apply_sigmoid) out = out.unaryExpr([](double z) { return sigmoid(z); });
      break;
    }
  }
  return out;
}

Matrix FeatureMapModel::apply_batch(std::span<const Matrix> xs) const {
  Matrix out(static_cast<Eigen::Index>(xs.size()), spec_.nu);
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(i) = apply(xs[i]).transpose();
  return out;
}

double rbf_exact(const Matrix& x, const Matrix& y, const RbfParams& p) {
  p.validate();
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ContractError("rbf_exact: dimension mismatch");
  double dist2 = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double diff = x.data()[k] - y.data()[k];
    dist2 += diff * diff;
  }
  return std::exp(-dist2 / (2.0 * p.sigma * p.sigma));
}

double rbf_exact(const LogCovDescriptor& x, const LogCovDescriptor& y, const RbfParams& p) {
  return rbf_exact(x.matrix(), y.matrix(), p);
}

double product_coefficient(int degree, double log_rho, double sigma, int nu) {
  const double log_coef = -2.0 * degree * std::log(sigma) +
                          0.5 * (-1.0 / (sigma * sigma) - std::log(static_cast<double>(nu)) - log_rho -
                                 std::lgamma(degree + 1.0));
  return std::exp(log_coef);
}

FeatureMapModel sample_kron_pi(int nu, int d, const RbfParams& p, const DegreeDistribution& rho,
                               std::uint64_t seed) {
  return sample_kron(MapSpec{MapKind::kron_pi, nu, d, p.sigma, rho.theta, seed, 20, std::nullopt});
}

FeatureMapModel sample_kron_e(int nu, int d, const RbfParams& p, const DegreeDistribution& rho,
                              std::uint64_t seed) {
  return sample_kron(MapSpec{MapKind::kron_e, nu, d, p.sigma, rho.theta, seed, 20, std::nullopt});
}

FeatureMapModel sample_fourier(int nu, int input_dim, const RbfParams& p, std::uint64_t seed) {
  check_nu(nu);
  check_dim(input_dim, "input dimension");
  p.validate();
  const std::uint64_t stream = sub_seed(seed, kFourierSalt);
  FourierParams params{Matrix(nu, input_dim), Vector(nu)};
  for (int j = 0; j < nu; ++j) {
    Rng rng = make_rng(stream, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, 1.0 / p.sigma);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < input_dim; ++k) params.frequencies(j, k) = normal(rng);
    params.phases(j) = phase(rng);
  }
  return FeatureMapModel(MapSpec{MapKind::fourier, nu, input_dim, p.sigma, 0.0, seed, 20, std::nullopt}, std::move(params));
}

static FeatureMapModel sample_taylor_spec(MapSpec spec) {
  validate_product_spec(spec);
  const int nu = spec.nu;
  const int input_dim = spec.input_dim;
  const std::uint64_t stream = sub_seed(spec.seed, kTaylorSalt);
  const double s2 = spec.sigma * spec.sigma;
  ProductParams params;
  params.components.reserve(nu);
  for (int j = 0; j < nu; ++j) {
    Rng rng = make_rng(stream, static_cast<std::uint64_t>(j));
    std::bernoulli_distribution coin(0.5);
    ProductComponent comp;
    comp.degree = draw_degree(rng, spec);
    // sqrt(a_n / (ν ρ(n))) with a_n = exp(-1/σ²) / (σ^{2n} n!)
    const double log_an = -1.0 / s2 - comp.degree * std::log(s2) - std::lgamma(comp.degree + 1.0);
    comp.coef = std::exp(0.5 * (log_an - std::log(static_cast<double>(nu)) - degree_log_rho(spec, comp.degree)));
    for (int k = 0; k < comp.degree; ++k) {
      Matrix s(input_dim, 1);
      for (int e = 0; e < input_dim; ++e) s(e, 0) = coin(rng) ? 1.0 : -1.0;
      comp.factors.push_back(std::move(s));
    }
    params.components.push_back(std::move(comp));
  }
  return FeatureMapModel(std::move(spec), std::move(params));
}

FeatureMapModel sample_taylor(int nu, int input_dim, const RbfParams& p, const DegreeDistribution& rho,
                              std::uint64_t seed) {
  return sample_taylor_spec(MapSpec{MapKind::taylor, nu, input_dim, p.sigma, rho.theta, seed, 20, std::nullopt});
}

FeatureMapModel sample_fastfood(int nu, int input_dim, const RbfParams& p, std::uint64_t seed) {
  check_nu(nu);
  check_dim(input_dim, "input dimension");
  p.validate();
  const int dp = next_pow2(input_dim);
  if (nu % dp != 0)
    throw ContractError("sample_fastfood: nu=" + std::to_string(nu) + " must be a multiple of the padded input dimension " +
                        std::to_string(dp) + " (minimum valid nu is " + std::to_string(dp) + ")");
  const std::uint64_t stream = sub_seed(seed, kFastfoodSalt);
  FastfoodParams params;
  params.padded_dim = dp;
  params.phases.resize(nu);
  const int blocks = nu / dp;
  for (int b = 0; b < blocks; ++b) {
    Rng rng = make_rng(stream, static_cast<std::uint64_t>(b));
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(static_cast<double>(dp));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    FastfoodBlock blk{Vector(dp), std::vector<int>(dp), Vector(dp), Vector(dp)};
    for (int i = 0; i < dp; ++i) blk.binary(i) = coin(rng) ? 1.0 : -1.0;
    std::iota(blk.permutation.begin(), blk.permutation.end(), 0);
    // Fisher–Yates with an explicit uniform draw keeps the result independent
    // of the standard library's shuffle implementation.
    for (int i = dp - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(blk.permutation[i], blk.permutation[pick(rng)]);
    }
    for (int i = 0; i < dp; ++i) blk.gaussian(i) = normal(rng);
    const double gnorm = blk.gaussian.norm();
    for (int i = 0; i < dp; ++i) blk.scaling(i) = std::sqrt(chi2(rng)) / gnorm;
    for (int i = 0; i < dp; ++i) params.phases(b * dp + i) = phase(rng);
    params.blocks.push_back(std::move(blk));
  }
  return FeatureMapModel(MapSpec{MapKind::fastfood, nu, input_dim, p.sigma, 0.0, seed, 20, std::nullopt}, std::move(params));
}

FeatureMapModel sample_map(const MapSpec& spec) {
  switch (spec.kind) {
    case MapKind::kron_pi:
    case MapKind::kron_e:
      return sample_kron(spec);
    case MapKind::taylor:
      return sample_taylor_spec(spec);
    case MapKind::fourier:
      return sample_fourier(spec.nu, spec.input_dim, RbfParams{spec.sigma}, spec.seed);
    case MapKind::fastfood:
      return sample_fastfood(spec.nu, spec.input_dim, RbfParams{spec.sigma}, spec.seed);
    case MapKind::perceptron:
      throw ContractError("sample_map: perceptron maps are trained, not sampled");
  }
  throw ContractError("sample_map: unknown kind");
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fwht(std::span<double> data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ContractError("fwht: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t i = 0; i < n; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
}

Vector exact_taylor_map(const Vector& x, int max_degree, const RbfParams& p) {
  p.validate();
  const int m = static_cast<int>(x.size());
  if (m < 1 || m > 6) throw ContractError("exact_taylor_map: input size must be in [1, 6]");
  if (max_degree < 0 || max_degree > 8) throw ContractError("exact_taylor_map: max_degree must be in [0, 8]");
  const double s2 = p.sigma * p.sigma;

  std::vector<double> feats;
  std::array<int, 6> alpha{};
  // Enumerates all α with |α| = n in lexicographic order.
  auto emit = [&](auto&& self, int pos, int remaining, int n) -> void {
    if (pos == m - 1) {
      alpha[pos] = remaining;
      double log_coef = -1.0 / s2 - n * std::log(s2);  // exp(-1/σ²) σ^{-2n}
      double mono = 1.0;
      for (int i = 0; i < m; ++i) {
        log_coef -= std::lgamma(alpha[i] + 1.0);  // n!/Πα! · 1/n!
        mono *= std::pow(x(i), alpha[i]);
      }
      feats.push_back(std::exp(0.5 * log_coef) * mono);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[pos] = a;
      self(self, pos + 1, remaining - a, n);
    }
  };
  for (int n = 0; n <= max_degree; ++n) emit(emit, 0, n, n);
  return Eigen::Map<const Vector>(feats.data(), static_cast<Eigen::Index>(feats.size()));
}

}  // namespace kronfeat
