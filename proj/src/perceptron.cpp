#include "kronfeat/perceptron.hpp"

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

constexpr int kFullBatchLimit = 10000;
constexpr int kDefaultMiniBatch = 1024;

Matrix stack_inputs(std::span<const Matrix> inputs) {
  if (inputs.empty()) throw ContractError("perceptron: no training inputs");
  const Eigen::Index dim = inputs.front().size();
  Matrix x(static_cast<Eigen::Index>(inputs.size()), dim);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) throw ContractError("perceptron: inputs have different dimensions");
    x.row(i) = vec(inputs[i]).transpose();
  }
  return x;
}

Matrix hidden_activations(const MlpModel& m, const Matrix& inputs) {
  Matrix a = inputs * m.w_hidden.transpose();
  a.rowwise() += m.b_hidden.transpose();
  return a.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

// Row-wise softmax of the output logits, computed stably.
Matrix output_probabilities(const MlpModel& m, const Matrix& hidden) {
  Matrix z = hidden * m.w_out.transpose();
  z.rowwise() += m.b_out.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double top = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - top).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

double regularizer(const MlpModel& m, double l2) {
  return 0.5 * l2 * (m.w_hidden.squaredNorm() + m.w_out.squaredNorm());
}

double cross_entropy(const Matrix& probs, std::span<const int> targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) s -= std::log(std::max(probs(i, targets[i]), 1e-300));
  return s / static_cast<double>(targets.size());
}

void axpy(MlpModel& m, double step, const MlpGradient& g) {
  m.w_hidden.noalias() -= step * g.w_hidden;
  m.b_hidden.noalias() -= step * g.b_hidden;
  m.w_out.noalias() -= step * g.w_out;
  m.b_out.noalias() -= step * g.b_out;
}

double squared_norm(const MlpGradient& g) {
  return g.w_hidden.squaredNorm() + g.b_hidden.squaredNorm() + g.w_out.squaredNorm() + g.b_out.squaredNorm();
}

void check_finite(double loss) {
  if (!std::isfinite(loss))
    throw DivergenceError("train_mlp: loss became non-finite; try a smaller learn_rate");
}

bool plateaued(const std::vector<double>& history, const MlpConfig& cfg) {
  const auto n = history.size();
  if (n <= static_cast<std::size_t>(cfg.plateau_epochs)) return false;
  return history[n - 1 - cfg.plateau_epochs] - history.back() < cfg.plateau_tol;
}

void train_full_batch(MlpModel& m, const Matrix& x, std::span<const int> y, const MlpConfig& cfg) {
  double step = cfg.learn_rate;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const MlpGradient g = mlp_gradient(m, x, y, cfg.l2);
    check_finite(g.loss);
    const double gnorm2 = squared_norm(g);
    if (gnorm2 == 0.0) break;

    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      MlpModel trial = m;
      axpy(trial, step, g);
      const double loss = mlp_loss(trial, x, y, cfg.l2);
      // Armijo sufficient decrease.
      if (std::isfinite(loss) && loss <= g.loss - 1e-4 * step * gnorm2) {
        m = std::move(trial);
        m.loss_history.push_back(loss);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || plateaued(m.loss_history, cfg)) break;
    step *= 1.25;
  }
}

void train_adam(MlpModel& m, const Matrix& x, std::span<const int> y, const MlpConfig& cfg, int batch) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  MlpGradient m1{0.0, Matrix::Zero(m.w_hidden.rows(), m.w_hidden.cols()), Vector::Zero(m.b_hidden.size()),
                 Matrix::Zero(m.w_out.rows(), m.w_out.cols()), Vector::Zero(m.b_out.size())};
  MlpGradient m2 = m1;
  const Eigen::Index n = x.rows();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(cfg.seed, 0xada3ULL);
  long t = 0;

  auto update = [&](auto& param, auto& mom1, auto& mom2, const auto& grad, double lr_t) {
    mom1 = beta1 * mom1 + (1.0 - beta1) * grad;
    mom2 = beta2 * mom2 + (1.0 - beta2) * grad.cwiseProduct(grad);
    param.array() -= lr_t * mom1.array() / (mom2.array().sqrt() + eps);
  };

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<Eigen::Index> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min<Eigen::Index>(batch, n - start);
      Matrix xb(len, x.cols());
      std::vector<int> yb(len);
      for (Eigen::Index k = 0; k < len; ++k) {
        xb.row(k) = x.row(order[start + k]);
        yb[k] = y[order[start + k]];
      }
      const MlpGradient g = mlp_gradient(m, xb, yb, cfg.l2);
      check_finite(g.loss);
      ++t;
      const double lr_t = cfg.adam_learn_rate * std::sqrt(1.0 - std::pow(beta2, t)) / (1.0 - std::pow(beta1, t));
      update(m.w_hidden, m1.w_hidden, m2.w_hidden, g.w_hidden, lr_t);
      update(m.b_hidden, m1.b_hidden, m2.b_hidden, g.b_hidden, lr_t);
      update(m.w_out, m1.w_out, m2.w_out, g.w_out, lr_t);
      update(m.b_out, m1.b_out, m2.b_out, g.b_out, lr_t);
    }
    const double loss = mlp_loss(m, x, y, cfg.l2);
    check_finite(loss);
    m.loss_history.push_back(loss);
    if (plateaued(m.loss_history, cfg)) break;
  }
}

}  // namespace

void MlpConfig::validate() const {
  if (hidden_size < 1) throw ContractError("MlpConfig: hidden_size must be >= 1");
  if (max_epochs < 0) throw ContractError("MlpConfig: max_epochs must be >= 0");
  if (!(learn_rate >= 0.0) || !std::isfinite(learn_rate)) throw ContractError("MlpConfig: learn_rate must be >= 0");
  if (batch_size < 0) throw ContractError("MlpConfig: batch_size must be >= 0");
  if (!(adam_learn_rate > 0.0) || !std::isfinite(adam_learn_rate))
    throw ContractError("MlpConfig: adam_learn_rate must be > 0");
  if (!(l2 >= 0.0)) throw ContractError("MlpConfig: l2 must be >= 0");
  if (plateau_epochs < 1) throw ContractError("MlpConfig: plateau_epochs must be >= 1");
}

MlpModel init_mlp(int input_dim, int hidden_size, std::vector<std::string> classes, std::uint64_t seed) {
  const int k = static_cast<int>(classes.size());
  MlpModel m;
  m.classes = std::move(classes);
  Rng rng = make_rng(seed, 0x1a17ULL);
  auto glorot = [&rng](Matrix& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index e = 0; e < w.size(); ++e) w.data()[e] = u(rng);
  };
  m.w_hidden.resize(hidden_size, input_dim);
  glorot(m.w_hidden, input_dim, hidden_size);
  m.b_hidden = Vector::Zero(hidden_size);
  m.w_out.resize(k, hidden_size);
  glorot(m.w_out, hidden_size, k);
  m.b_out = Vector::Zero(k);
  return m;
}

double mlp_loss(const MlpModel& m, const Matrix& inputs, std::span<const int> targets, double l2) {
  const Matrix probs = output_probabilities(m, hidden_activations(m, inputs));
  return cross_entropy(probs, targets) + regularizer(m, l2);
}

MlpGradient mlp_gradient(const MlpModel& m, const Matrix& inputs, std::span<const int> targets, double l2) {
  const Matrix h = hidden_activations(m, inputs);
  Matrix dz = output_probabilities(m, h);
  const double n = static_cast<double>(targets.size());

  MlpGradient g;
  g.loss = cross_entropy(dz, targets) + regularizer(m, l2);
  for (std::size_t i = 0; i < targets.size(); ++i) dz(i, targets[i]) -= 1.0;
  dz /= n;

  g.w_out = dz.transpose() * h + l2 * m.w_out;
  g.b_out = dz.colwise().sum().transpose();
  Matrix da = (dz * m.w_out).cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
  g.w_hidden = da.transpose() * inputs + l2 * m.w_hidden;
  g.b_hidden = da.colwise().sum().transpose();
  return g;
}

MlpModel train_mlp(std::span<const Matrix> inputs, std::span<const std::string> labels, const MlpConfig& cfg) {
  cfg.validate();
  if (inputs.size() != labels.size()) throw ContractError("train_mlp: inputs and labels differ in length");
  const Matrix x = stack_inputs(inputs);
  auto classes = sorted_classes(labels);
  if (classes.size() < 2) throw ContractError("train_mlp: need at least 2 classes");
  const std::vector<int> y = encode_labels(labels, classes);

  MlpModel m = init_mlp(static_cast<int>(x.cols()), cfg.hidden_size, std::move(classes), cfg.seed);
  const double initial = mlp_loss(m, x, y, cfg.l2);
  check_finite(initial);
  m.loss_history.push_back(initial);
  if (cfg.learn_rate == 0.0 || cfg.max_epochs == 0) return m;

  int batch = cfg.batch_size;
  if (batch == 0) batch = x.rows() <= kFullBatchLimit ? static_cast<int>(x.rows()) : kDefaultMiniBatch;
  if (batch >= x.rows())
    train_full_batch(m, x, y, cfg);
  else
    train_adam(m, x, y, cfg, batch);
  return m;
}

std::vector<std::string> predict_mlp(const MlpModel& m, std::span<const Matrix> inputs) {
  const Matrix x = stack_inputs(inputs);
  if (x.cols() != m.input_dim()) throw ContractError("predict_mlp: input dimension mismatch");
  const Matrix probs = output_probabilities(m, hidden_activations(m, x));
  std::vector<std::string> out;
  out.reserve(inputs.size());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    out.push_back(m.classes[best]);
  }
  return out;
}

FeatureMapModel extract_phi_p(const MlpModel& m, const PhiPOptions& opts) {
  MapSpec spec;
  spec.kind = MapKind::perceptron;
  spec.nu = m.hidden_size();
  spec.input_dim = m.input_dim();
  return FeatureMapModel(spec, PerceptronParams{m.w_hidden, m.b_hidden, opts.keep_bias, opts.apply_sigmoid});
}

int select_hidden_size(std::span<const Matrix> inputs, std::span<const std::string> labels, MlpConfig cfg,
                       std::span<const int> grid) {
  if (grid.empty()) throw ContractError("select_hidden_size: empty grid");
  int best = -1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int size : grid) {
    cfg.hidden_size = size;
    const MlpModel m = train_mlp(inputs, labels, cfg);
    const double loss = m.loss_history.back();
    if (loss < best_loss || (loss == best_loss && size < best)) {
      best_loss = loss;
      best = size;
    }
  }
  return best;
}

std::vector<int> default_hidden_grid() { return {32, 64, 128, 256, 512, 1024}; }

}  // namespace kronfeat
