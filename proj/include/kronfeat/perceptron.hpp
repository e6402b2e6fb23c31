#pragma once

// One-hidden-layer perceptron whose hidden weights become a learned,
// deterministic feature map φ_P(X) = W_hidden · vec(X).

#include "kronfeat/featmap.hpp"
#include "kronfeat/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kronfeat {

struct MlpConfig {
  int hidden_size = 64;
  int max_epochs = 2000;
  /// Initial step of full-batch gradient descent (adapted by line search).
  double learn_rate = 0.5;
  /// Step size of the mini-batch Adam path.
  double adam_learn_rate = 1e-3;
  /// 0 selects the default: full batch up to 10,000 samples, 1024 above.
  int batch_size = 0;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  /// Early stop when the loss improves by less than this over `plateau_epochs`.
  double plateau_tol = 1e-7;
  int plateau_epochs = 20;

  void validate() const;
};

struct MlpModel {
  std::vector<std::string> classes;
  Matrix w_hidden;  // ν×D
  Vector b_hidden;  // ν
  Matrix w_out;     // K×ν
  Vector b_out;     // K
  /// Objective after initialization and after every accepted step.
  std::vector<double> loss_history;

  int hidden_size() const noexcept { return static_cast<int>(w_hidden.rows()); }
  int input_dim() const noexcept { return static_cast<int>(w_hidden.cols()); }
};

struct MlpGradient {
  double loss = 0.0;
  Matrix w_hidden;
  Vector b_hidden;
  Matrix w_out;
  Vector b_out;
};

/// Glorot-uniform initialization, seeded.
MlpModel init_mlp(int input_dim, int hidden_size, std::vector<std::string> classes, std::uint64_t seed);

/// Mean softmax cross-entropy of softmax(W_out·sigmoid(W_hidden·x + b_hidden) + b_out)
/// plus (l2/2)(‖W_hidden‖² + ‖W_out‖²). `inputs` is N×D; `targets` are class indices.
double mlp_loss(const MlpModel& m, const Matrix& inputs, std::span<const int> targets, double l2);

/// Loss and its analytic gradient (backpropagation).
MlpGradient mlp_gradient(const MlpModel& m, const Matrix& inputs, std::span<const int> targets, double l2);

/// Trains on vectorized descriptors. Full-batch gradient descent with
/// backtracking line search up to 10,000 samples; mini-batch Adam above.
/// Throws ContractError for fewer than 2 classes or mismatched dimensions,
/// DivergenceError if the loss becomes non-finite.
MlpModel train_mlp(std::span<const Matrix> inputs, std::span<const std::string> labels, const MlpConfig& cfg);

/// Predicted class labels.
std::vector<std::string> predict_mlp(const MlpModel& m, std::span<const Matrix> inputs);

struct PhiPOptions {
  bool apply_sigmoid = false;
  bool keep_bias = false;
};

/// Wraps the hidden layer as a perceptron-kind FeatureMapModel.
FeatureMapModel extract_phi_p(const MlpModel& m, const PhiPOptions& opts = {});

/// Trains one model per grid entry and returns the hidden size with the
/// lowest final training objective (ties: smallest size).
int select_hidden_size(std::span<const Matrix> inputs, std::span<const std::string> labels, MlpConfig cfg,
                       std::span<const int> grid);

/// Default hidden-size grid 2^5 … 2^10.
std::vector<int> default_hidden_grid();

}  // namespace kronfeat
