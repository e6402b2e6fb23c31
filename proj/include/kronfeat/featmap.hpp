#pragma once

// Explicit feature maps approximating the Gaussian RBF kernel
//   K(X, Y) = exp(-‖X - Y‖²_F / (2σ²))
// on unit-Frobenius-norm matrices.
//
// kron_pi and kron_e draw, per component, a degree n from a geometric law and
// n Gaussian weight matrices; the component is
//   σ^{-2n} · sqrt(exp(-1/σ²) / (ν ρ(n) n!)) · Π_κ tr(W^(κ)ᵀ X).
// For kron_e the weight tensor V = ⊗_κ V^(κ) is contracted with X^{⊗n},
// which factorizes into the same product of traces.
//
// fourier, taylor and fastfood are reconstructions of the standard random
// Fourier, random Maclaurin and Fastfood constructions. perceptron wraps a
// learned hidden layer (see perceptron.hpp).

#include "kronfeat/descriptor.hpp"
#include "kronfeat/linalg.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kronfeat {

struct RbfParams {
  double sigma = 1.0;

  /// Throws ContractError unless sigma > 0 and finite.
  void validate() const;
};

/// ρ(n) = (1-θ)ⁿ θ on n = 0, 1, 2, ...
struct DegreeDistribution {
  double theta = 0.9;

  void validate() const;
  double log_pmf(int n) const;
  double pmf(int n) const;
};

enum class MapKind { kron_pi, kron_e, fourier, taylor, fastfood, perceptron };

std::string_view to_string(MapKind kind);
/// Throws ContractError for unknown names.
MapKind parse_map_kind(std::string_view name);
/// True for kinds whose input is the d×d matrix (input_dim = d) rather than
/// its D = d² vectorization.
bool takes_matrix_input(MapKind kind);

/// One randomized component of a product-of-projections map (kron_pi,
/// kron_e, taylor). For kron maps the factors are d×d matrices; for taylor
/// they are D×1 Rademacher vectors.
struct ProductComponent {
  int degree = 0;
  double coef = 0.0;  // includes the 1/sqrt(ν) factor
  std::vector<Matrix> factors;
};

struct ProductParams {
  std::vector<ProductComponent> components;
};

struct FourierParams {
  Matrix frequencies;  // ν×D
  Vector phases;       // ν
};

struct FastfoodBlock {
  Vector binary;             // B: ±1
  std::vector<int> permutation;  // Π
  Vector gaussian;           // G
  Vector scaling;            // S
};

struct FastfoodParams {
  int padded_dim = 0;
  std::vector<FastfoodBlock> blocks;
  Vector phases;  // ν
};

struct PerceptronParams {
  Matrix weights;  // ν×D
  Vector bias;     // ν
  bool keep_bias = false;
  bool apply_sigmoid = false;
};

/// Sampling hyperparameters shared by all random kinds.
struct MapSpec {
  MapKind kind = MapKind::kron_pi;
  int nu = 1;
  int input_dim = 1;  // d for kron kinds, D for vectorized kinds
  double sigma = 1.0;
  double theta = 0.9;
  std::uint64_t seed = 0;
  /// Degrees above this are rejected and redrawn.
  int max_degree = 20;
  /// When set, every component uses this degree and ρ is the point mass.
  std::optional<int> forced_degree;
};

class FeatureMapModel {
 public:
  FeatureMapModel(MapSpec spec, ProductParams params);
  FeatureMapModel(MapSpec spec, FourierParams params);
  FeatureMapModel(MapSpec spec, FastfoodParams params);
  FeatureMapModel(MapSpec spec, PerceptronParams params);

  MapKind kind() const noexcept { return spec_.kind; }
  int nu() const noexcept { return spec_.nu; }
  int input_dim() const noexcept { return spec_.input_dim; }
  const MapSpec& spec() const noexcept { return spec_; }

  /// Maps one input. Matrix kinds need a d×d matrix; vectorized kinds accept
  /// any matrix (or vector) with D entries. Throws ContractError otherwise.
  Vector apply(const Matrix& x) const;
  Vector apply(const LogCovDescriptor& x) const { return apply(x.matrix()); }

  /// N×ν feature matrix, one row per input.
  Matrix apply_batch(std::span<const Matrix> xs) const;

  const ProductParams& product_params() const;
  const FourierParams& fourier_params() const;
  const FastfoodParams& fastfood_params() const;
  const PerceptronParams& perceptron_params() const;

 private:
  void check_input(const Matrix& x) const;

  MapSpec spec_;
  std::variant<ProductParams, FourierParams, FastfoodParams, PerceptronParams> params_;
};

/// Exact kernel exp(-‖X-Y‖²_F / (2σ²)).
double rbf_exact(const Matrix& x, const Matrix& y, const RbfParams& p);
double rbf_exact(const LogCovDescriptor& x, const LogCovDescriptor& y, const RbfParams& p);

/// σ^{-2n} · sqrt(exp(-1/σ²) / (ν ρ(n) n!)), evaluated in log space. `log_rho`
/// is log ρ(n).
double product_coefficient(int degree, double log_rho, double sigma, int nu);

FeatureMapModel sample_kron_pi(int nu, int d, const RbfParams& p, const DegreeDistribution& rho,
                               std::uint64_t seed);
FeatureMapModel sample_kron_e(int nu, int d, const RbfParams& p, const DegreeDistribution& rho,
                              std::uint64_t seed);
FeatureMapModel sample_fourier(int nu, int input_dim, const RbfParams& p, std::uint64_t seed);
FeatureMapModel sample_taylor(int nu, int input_dim, const RbfParams& p, const DegreeDistribution& rho,
                              std::uint64_t seed);
/// Throws ContractError unless nu is a positive multiple of the padded input
/// dimension (next power of two ≥ input_dim).
FeatureMapModel sample_fastfood(int nu, int input_dim, const RbfParams& p, std::uint64_t seed);

/// Dispatches on spec.kind. perceptron cannot be sampled (ContractError).
FeatureMapModel sample_map(const MapSpec& spec);

/// Smallest power of two ≥ n.
int next_pow2(int n);

/// In-place unnormalized fast Walsh–Hadamard transform; size must be a power
/// of two. Applying it twice multiplies by the length.
void fwht(std::span<double> data);

/// Explicit truncated Taylor feature map of exp(-1/σ²)·exp(⟨x,y⟩/σ²): one
/// coordinate per multi-index α with |α| ≤ max_degree. Only for tiny inputs
/// (size ≤ 6, max_degree ≤ 8); otherwise ContractError.
Vector exact_taylor_map(const Vector& x, int max_degree, const RbfParams& p);

}  // namespace kronfeat
