#pragma once

// Fully connected feedforward regressor: tanh hidden layers, one linear
// output neuron, trained by full-batch gradient descent with momentum on the
// mean squared error and stopped early on validation loss.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cycletime/error.hpp"
#include "cycletime/log.hpp"
#include "cycletime/normalization.hpp"

namespace cycletime::mlp {

struct LayerSpec {
  std::vector<std::size_t> sizes;  // input, hidden..., output

  std::size_t inputs() const { return sizes.front(); }
  std::size_t layer_count() const { return sizes.size() - 1; }

  void validate() const {
    if (sizes.size() < 3) {
      throw Error(ErrorKind::InvalidSpec, "need an input, at least one hidden and an output layer");
    }
    for (std::size_t s : sizes) {
      if (s < 1) throw Error(ErrorKind::InvalidSpec, "layer sizes must be at least 1");
    }
    if (sizes.back() != 1) throw Error(ErrorKind::InvalidSpec, "output layer must have size 1");
  }

  bool operator==(const LayerSpec&) const = default;
};

/// Row-major dense matrix, rows = destination neurons, cols = sources.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

struct Layer {
  Matrix weights;
  std::vector<double> biases;

  bool operator==(const Layer&) const = default;
};

/// Flattened training batch: `inputs` holds `size()` rows of `width` values.
struct Samples {
  std::size_t width = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(inputs).subspan(i * width, width);
  }
  void push_back(std::span<const double> x, double y) {
    if (width == 0) width = x.size();
    if (x.size() != width) throw Error(ErrorKind::ShapeMismatch, "sample width mismatch");
    inputs.insert(inputs.end(), x.begin(), x.end());
    targets.push_back(y);
  }
};

/// Parameter-shaped container, used for gradients and momentum buffers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

class Mlp {
 public:
  Mlp() = default;

  /// Weights uniform in +-1/sqrt(fan_in) from a seeded mt19937_64, zero biases.
  static Mlp init(const LayerSpec& spec, std::uint64_t seed) {
    spec.validate();
    Mlp m;
    m.spec_ = spec;
    m.seed_ = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      const std::size_t fan_in = spec.sizes[l];
      const std::size_t fan_out = spec.sizes[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      Layer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
      for (double& w : layer.weights.data) w = dist(rng);
      m.layers_.push_back(std::move(layer));
    }
    return m;
  }

  /// Builds a model from explicit parameters, checking that shapes chain.
  static Mlp from_parameters(const LayerSpec& spec, std::vector<Layer> layers,
                             std::uint64_t seed = 0) {
    spec.validate();
    if (layers.size() != spec.layer_count()) {
      throw Error(ErrorKind::ShapeMismatch, "layer count does not match spec");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& w = layers[l].weights;
      if (w.rows != spec.sizes[l + 1] || w.cols != spec.sizes[l] ||
          w.data.size() != w.rows * w.cols || layers[l].biases.size() != w.rows) {
        throw Error(ErrorKind::ShapeMismatch,
                    "layer " + std::to_string(l) + " shape does not match spec");
      }
    }
    Mlp m;
    m.spec_ = spec;
    m.layers_ = std::move(layers);
    m.seed_ = seed;
    return m;
  }

  const LayerSpec& spec() const { return spec_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::uint64_t seed() const { return seed_; }
  const Normalization& normalization() const { return normalization_; }
  void set_normalization(Normalization n) { normalization_ = std::move(n); }

  /// Output for one input in the normalized domain.
  double forward(std::span<const double> input) const {
    check_input(input);
    std::vector<double> current(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      next.assign(layer.weights.rows, 0.0);
      for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        double sum = layer.biases[r];
        const double* w = &layer.weights.data[r * layer.weights.cols];
        for (std::size_t c = 0; c < layer.weights.cols; ++c) sum += w[c] * current[c];
        next[r] = is_output(l) ? sum : std::tanh(sum);
      }
      current.swap(next);
    }
    // Sum over output neurons; a single neuron here.
    double q = 0.0;
    for (double v : current) q += v;
    return q;
  }

  /// Hidden activations of every layer for one input (output layer excluded).
  std::vector<std::vector<double>> hidden_activations(std::span<const double> input) const {
    check_input(input);
    std::vector<std::vector<double>> acts;
    std::vector<double> current(input.begin(), input.end());
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      std::vector<double> next(layer.weights.rows);
      for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        double sum = layer.biases[r];
        for (std::size_t c = 0; c < layer.weights.cols; ++c) sum += layer.weights(r, c) * current[c];
        next[r] = std::tanh(sum);
      }
      acts.push_back(next);
      current = std::move(next);
    }
    return acts;
  }

  /// Prediction in physical units: normalizes raw features with the stored
  /// maps, runs forward and denormalizes the output.
  double predict(std::span<const double> raw_features) const {
    const auto x = normalization_.normalize_features(raw_features);
    return normalization_.target.denormalize(forward(x));
  }

  Gradients zeros_like() const {
    Gradients g;
    for (const auto& layer : layers_) {
      g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
      g.biases.emplace_back(layer.biases.size(), 0.0);
    }
    return g;
  }

  bool operator==(const Mlp&) const = default;

 private:
  bool is_output(std::size_t l) const { return l + 1 == layers_.size(); }

  void check_input(std::span<const double> input) const {
    if (layers_.empty()) throw Error(ErrorKind::ShapeMismatch, "model has no layers");
    if (input.size() != spec_.inputs()) {
      throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(spec_.inputs()) +
                                                " inputs, got " + std::to_string(input.size()));
    }
  }

  LayerSpec spec_;
  std::vector<Layer> layers_;
  Normalization normalization_;
  std::uint64_t seed_ = 0;
};

inline double mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw Error(ErrorKind::LengthMismatch, "predictions and targets differ in length");
  }
  if (predictions.empty()) throw Error(ErrorKind::Empty, "mse of an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

inline std::vector<double> predict_all(const Mlp& m, const Samples& batch) {
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = m.forward(batch.row(i));
  return out;
}

inline double batch_mse(const Mlp& m, const Samples& batch) {
  return mse(predict_all(m, batch), batch.targets);
}

/// Analytic gradient of the batch MSE by reverse-mode accumulation. Writes
/// into `grad` (which must be shaped like the model) and returns the loss.
inline double accumulate_gradients(const Mlp& m, const Samples& batch, Gradients& grad) {
  if (batch.size() == 0) throw Error(ErrorKind::Empty, "gradient of an empty batch");
  if (batch.width != m.spec().inputs()) {
    throw Error(ErrorKind::ShapeMismatch, "batch width does not match model inputs");
  }
  const auto& layers = m.layers();
  const std::size_t depth = layers.size();
  for (std::size_t l = 0; l < depth; ++l) {
    std::fill(grad.weights[l].data.begin(), grad.weights[l].data.end(), 0.0);
    std::fill(grad.biases[l].begin(), grad.biases[l].end(), 0.0);
  }

  // acts[0] is the input, acts[l + 1] the output of layer l.
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<std::vector<double>> delta(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    acts[l + 1].resize(layers[l].weights.rows);
    delta[l].resize(layers[l].weights.rows);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto x = batch.row(s);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& w = layers[l].weights;
      const auto& in = acts[l];
      auto& out = acts[l + 1];
      for (std::size_t r = 0; r < w.rows; ++r) {
        double sum = layers[l].biases[r];
        const double* wr = &w.data[r * w.cols];
        for (std::size_t c = 0; c < w.cols; ++c) sum += wr[c] * in[c];
        out[r] = (l + 1 == depth) ? sum : std::tanh(sum);
      }
    }
    const double residual = acts[depth][0] - batch.targets[s];
    loss += residual * residual;

    delta[depth - 1][0] = 2.0 * residual * inv_n;
    for (std::size_t l = depth; l-- > 0;) {
      const auto& w = layers[l].weights;
      auto& gw = grad.weights[l];
      const auto& in = acts[l];
      for (std::size_t r = 0; r < w.rows; ++r) {
        const double d = delta[l][r];
        grad.biases[l][r] += d;
        double* gr = &gw.data[r * w.cols];
        for (std::size_t c = 0; c < w.cols; ++c) gr[c] += d * in[c];
      }
      if (l == 0) break;
      auto& prev = delta[l - 1];
      for (std::size_t c = 0; c < w.cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < w.rows; ++r) sum += w(r, c) * delta[l][r];
        const double a = in[c];
        prev[c] = sum * (1.0 - a * a);
      }
    }
  }
  return loss * inv_n;
}

inline Gradients gradients(const Mlp& m, const Samples& batch) {
  Gradients g = m.zeros_like();
  accumulate_gradients(m, batch, g);
  return g;
}

struct TrainConfig {
  std::size_t max_epochs = 5000;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t patience = 50;
  double min_delta = 1e-8;
  std::uint64_t seed = 42;

  void validate() const {
    if (max_epochs < 1) throw Error(ErrorKind::InvalidConfig, "max_epochs must be at least 1");
    if (patience < 1) throw Error(ErrorKind::InvalidConfig, "patience must be at least 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "momentum must lie in [0, 1)");
    }
  }
};

struct TrainReport {
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
  std::size_t stopped_epoch = 0;  // 1-based epoch at which training ended
  std::size_t best_epoch = 0;     // 1-based epoch of the returned snapshot
  double best_validation_mse = std::numeric_limits<double>::infinity();

  bool operator==(const TrainReport&) const = default;
};

struct TrainResult {
  Mlp model;
  TrainReport report;
};

/// One gradient step with momentum: v <- mu v - lr g; p <- p + v.
inline void momentum_step(Mlp& m, const Gradients& g, Gradients& velocity, double lr, double mu) {
  auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weights.data;
    auto& vw = velocity.weights[l].data;
    const auto& gw = g.weights[l].data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      vw[i] = mu * vw[i] - lr * gw[i];
      w[i] += vw[i];
    }
    auto& b = layers[l].biases;
    auto& vb = velocity.biases[l];
    const auto& gb = g.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) {
      vb[i] = mu * vb[i] - lr * gb[i];
      b[i] += vb[i];
    }
  }
}

/// Trains a copy of `initial`; returns the best-validation snapshot.
inline TrainResult train(const Mlp& initial, const Samples& train_set, const Samples& val_set,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw Error(ErrorKind::EmptySet, "training and validation sets must be non-empty");
  }
  Mlp model = initial;
  Gradients grad = model.zeros_like();
  Gradients velocity = model.zeros_like();

  TrainResult result{model, {}};
  auto& report = result.report;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double loss = accumulate_gradients(model, train_set, grad);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::DivergenceDetected,
                  "training loss became non-finite at epoch " + std::to_string(epoch));
    }
    momentum_step(model, grad, velocity, cfg.learning_rate, cfg.momentum);
    const double train_loss = batch_mse(model, train_set);
    const double val_loss = batch_mse(model, val_set);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw Error(ErrorKind::DivergenceDetected,
                  "loss became non-finite at epoch " + std::to_string(epoch));
    }
    report.train_mse.push_back(train_loss);
    report.validation_mse.push_back(val_loss);
    report.stopped_epoch = epoch;

    if (val_loss < report.best_validation_mse - cfg.min_delta) {
      report.best_validation_mse = val_loss;
      report.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      logger()->debug("early stop at epoch {} (best {})", epoch, report.best_epoch);
      break;
    }
  }
  return result;
}

}  // namespace cycletime::mlp
