#pragma once

// One-vs-rest L2-regularized hinge-loss SVMs solved by dual coordinate
// descent: a linear machine on explicit features and an exact-Gram RBF
// kernel machine.

#include "kronfeat/featmap.hpp"
#include "kronfeat/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kronfeat {

struct SvmOptions {
  double c = 1.0;
  /// Stop when max - min projected gradient over a pass drops below tol.
  double tol = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LinearSvmModel {
  std::vector<std::string> classes;
  Matrix weights;  // K×ν
  Vector bias;     // K
  double c = 1.0;
  /// Dual variables per class (K×N), kept for inspection.
  Matrix alphas;
};

struct KernelSvmModel {
  std::vector<std::string> classes;
  Matrix dual_coefs;  // K×N, entries y_i α_i
  std::vector<Matrix> support_inputs;
  double sigma = 1.0;
  double c = 1.0;
};

/// Hard cap on the Gram matrix side.
inline constexpr std::size_t kMaxKernelSamples = 20000;

/// `features` is N×ν. Throws ContractError for N < 2, fewer than two
/// classes, or a label/row count mismatch.
LinearSvmModel train_linear_svm(const Matrix& features, std::span<const std::string> labels,
                                const SvmOptions& opts = {});

/// K×N class scores wₖ·x + bₖ, transposed to N×K.
Matrix linear_scores(const LinearSvmModel& model, const Matrix& features);
std::vector<std::string> predict_linear(const LinearSvmModel& model, const Matrix& features);

/// Throws TooLargeError above kMaxKernelSamples inputs.
KernelSvmModel train_kernel_svm(std::span<const Matrix> inputs, std::span<const std::string> labels,
                                const RbfParams& p, const SvmOptions& opts = {});
Matrix kernel_scores(const KernelSvmModel& model, std::span<const Matrix> inputs);
std::vector<std::string> predict_kernel(const KernelSvmModel& model, std::span<const Matrix> inputs);

/// Fraction of equal entries.
double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth);

/// Row-wise argmax with ties going to the lowest column index.
std::vector<int> argmax_rows(const Matrix& scores);

}  // namespace kronfeat
