#include "kronfeat/learn.hpp"

#include "kronfeat/errors.hpp"
#include "kronfeat/labels.hpp"
#include "kronfeat/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace kronfeat {

namespace {

void shuffle(std::vector<int>& order, Rng& rng) {
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
}

// Projected gradient of the box-constrained dual at coordinate value a.
double projected(double g, double a, double c) {
  if (a <= 0.0) return std::min(g, 0.0);
  if (a >= c) return std::max(g, 0.0);
  return g;
}

constexpr Eigen::Index kWideGramLimit = 4096;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ClassProblem {
  std::vector<std::string> classes;
  std::vector<int> targets;
};

ClassProblem prepare(std::size_t rows, std::span<const std::string> labels, const SvmOptions& opts) {
  opts.validate();
  if (rows != labels.size()) throw ContractError("svm: feature rows and labels differ in length");
  if (rows < 2) throw ContractError("svm: need at least 2 samples");
  ClassProblem p{sorted_classes(labels), {}};
  if (p.classes.size() < 2) throw ContractError("svm: need at least 2 classes, got a single-class training set");
  p.targets = encode_labels(labels, p.classes);
  return p;
}

// Binary dual coordinate descent on explicit (bias-augmented) features.
// Returns α; w is accumulated in place.
Vector solve_linear_binary(const RowMatrix& xa, const Vector& qii, const std::vector<double>& y, const SvmOptions& opts,
                           Rng& rng, Vector& w) {
  const int n = static_cast<int>(xa.rows());
  Vector alpha = Vector::Zero(n);
  w = Vector::Zero(xa.cols());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    shuffle(order, rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (int i : order) {
      if (qii(i) <= 0.0) continue;
      const double g = y[i] * xa.row(i).dot(w) - 1.0;
      const double pg = projected(g, alpha(i), opts.c);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double updated = std::clamp(alpha(i) - g / qii(i), 0.0, opts.c);
      const double delta = updated - alpha(i);
      alpha(i) = updated;
      if (delta != 0.0) w.noalias() += (delta * y[i]) * xa.row(i).transpose();
    }
    if (pg_max - pg_min <= opts.tol) break;
  }
  return alpha;
}

// Binary dual coordinate descent on a precomputed (bias-augmented) Gram.
Vector solve_kernel_binary(const Matrix& gram, const std::vector<double>& y, const SvmOptions& opts, Rng& rng) {
  const int n = static_cast<int>(gram.rows());
  Vector alpha = Vector::Zero(n);
  Vector f = Vector::Zero(n);  // f_i = Σ_j y_j α_j G_ij
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    shuffle(order, rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (int i : order) {
      const double qii = gram(i, i);
      if (qii <= 0.0) continue;
      const double g = y[i] * f(i) - 1.0;
      const double pg = projected(g, alpha(i), opts.c);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double updated = std::clamp(alpha(i) - g / qii, 0.0, opts.c);
      const double delta = updated - alpha(i);
      alpha(i) = updated;
      if (delta != 0.0) f.noalias() += (delta * y[i]) * gram.col(i);
    }
    if (pg_max - pg_min <= opts.tol) break;
  }
  return alpha;
}

std::vector<double> binary_targets(const std::vector<int>& targets, int k) {
  std::vector<double> y(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) y[i] = targets[i] == k ? 1.0 : -1.0;
  return y;
}

std::vector<std::string> labels_of(const std::vector<int>& idx, const std::vector<std::string>& classes) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int k : idx) out.push_back(classes[k]);
  return out;
}

}  // namespace

void SvmOptions::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ContractError("SvmOptions: c must be positive");
  if (!(tol > 0.0)) throw ContractError("SvmOptions: tol must be positive");
  if (max_epochs < 1) throw ContractError("SvmOptions: max_epochs must be >= 1");
}

LinearSvmModel train_linear_svm(const Matrix& features, std::span<const std::string> labels, const SvmOptions& opts) {
  const ClassProblem prob = prepare(static_cast<std::size_t>(features.rows()), labels, opts);
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();

  RowMatrix xa(n, dim + 1);
  xa.leftCols(dim) = features;
  xa.col(dim).setOnes();
  const Vector qii = xa.rowwise().squaredNorm();

  const int k_count = static_cast<int>(prob.classes.size());
  LinearSvmModel model{prob.classes, Matrix(k_count, dim), Vector(k_count), opts.c, Matrix(k_count, n)};
  // Wide problems run the same coordinate descent on the sample Gram.
  const bool wide = n <= dim && n <= kWideGramLimit;
  const Matrix gram = wide ? Matrix(xa * xa.transpose()) : Matrix();
  for (int k = 0; k < k_count; ++k) {
    Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(k));
    const std::vector<double> y = binary_targets(prob.targets, k);
    Vector w;
    if (wide) {
      const Vector alpha = solve_kernel_binary(gram, y, opts, rng);
      w = xa.transpose() * (alpha.array() * Eigen::Map<const Vector>(y.data(), n).array()).matrix();
      model.alphas.row(k) = alpha.transpose();
    } else {
      model.alphas.row(k) = solve_linear_binary(xa, qii, y, opts, rng, w).transpose();
    }
    model.weights.row(k) = w.head(dim).transpose();
    model.bias(k) = w(dim);
  }
  return model;
}

Matrix linear_scores(const LinearSvmModel& model, const Matrix& features) {
  if (features.cols() != model.weights.cols())
    throw ContractError("predict_linear: feature width " + std::to_string(features.cols()) + " does not match model width " +
                        std::to_string(model.weights.cols()));
  Matrix s = features * model.weights.transpose();
  s.rowwise() += model.bias.transpose();
  return s;
}

std::vector<std::string> predict_linear(const LinearSvmModel& model, const Matrix& features) {
  return labels_of(argmax_rows(linear_scores(model, features)), model.classes);
}

KernelSvmModel train_kernel_svm(std::span<const Matrix> inputs, std::span<const std::string> labels,
                                const RbfParams& p, const SvmOptions& opts) {
  p.validate();
  if (inputs.size() > kMaxKernelSamples)
    throw TooLargeError("train_kernel_svm: " + std::to_string(inputs.size()) + " samples exceed the Gram-matrix limit of " +
                        std::to_string(kMaxKernelSamples));
  const ClassProblem prob = prepare(inputs.size(), labels, opts);
  const int n = static_cast<int>(inputs.size());

  Matrix gram(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) gram(i, j) = gram(j, i) = rbf_exact(inputs[i], inputs[j], p) + 1.0;

  const int k_count = static_cast<int>(prob.classes.size());
  KernelSvmModel model{prob.classes, Matrix(k_count, n), std::vector<Matrix>(inputs.begin(), inputs.end()), p.sigma,
                       opts.c};
  for (int k = 0; k < k_count; ++k) {
    Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(k));
    const std::vector<double> y = binary_targets(prob.targets, k);
    const Vector alpha = solve_kernel_binary(gram, y, opts, rng);
    for (int i = 0; i < n; ++i) model.dual_coefs(k, i) = y[i] * alpha(i);
  }
  return model;
}

Matrix kernel_scores(const KernelSvmModel& model, std::span<const Matrix> inputs) {
  const RbfParams p{model.sigma};
  const auto n_sv = static_cast<Eigen::Index>(model.support_inputs.size());
  Matrix g(static_cast<Eigen::Index>(inputs.size()), n_sv);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (Eigen::Index j = 0; j < n_sv; ++j) g(i, j) = rbf_exact(inputs[i], model.support_inputs[j], p) + 1.0;
  return g * model.dual_coefs.transpose();
}

std::vector<std::string> predict_kernel(const KernelSvmModel& model, std::span<const Matrix> inputs) {
  return labels_of(argmax_rows(kernel_scores(model, inputs)), model.classes);
}

double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth) {
  if (predicted.size() != truth.size()) throw ContractError("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(i, k) > scores(i, best)) best = static_cast<int>(k);
    out[i] = best;
  }
  return out;
}

}  // namespace kronfeat
