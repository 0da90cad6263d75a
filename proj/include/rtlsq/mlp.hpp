#ifndef RTLSQ_MLP_HPP
#define RTLSQ_MLP_HPP

// Dense feedforward classifiers trained with mini-batch SGD + momentum.
// Hidden layers use the configured activation and inverted dropout; the
// output layer is affine and feeds a softmax cross-entropy loss.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rtlsq/data.hpp"
#include "rtlsq/error.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq::mlp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { relu, swish, tanh };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::swish: return "swish";
    case Activation::tanh: return "tanh";
  }
  return "relu";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "swish") return Activation::swish;
  if (s == "tanh") return Activation::tanh;
  throw ArgumentError("unknown activation: " + s);
}

struct ActivationValue {
  double value;
  double derivative;
};

inline ActivationValue activation_eval(Activation kind, double x) {
  switch (kind) {
    case Activation::relu:
      return {x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0};
    case Activation::swish: {
      double s = 1.0 / (1.0 + std::exp(-x));
      return {x * s, s + x * s * (1.0 - s)};
    }
    case Activation::tanh: {
      double t = std::tanh(x);
      return {t, 1.0 - t * t};
    }
  }
  return {0.0, 0.0};
}

struct DenseLayer {
  MatrixXd weights;  // out x in
  VectorXd bias;
};

struct MlpModel {
  std::vector<int> layer_sizes;
  Activation activation = Activation::relu;
  double dropout_rate = 0.0;
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  int input_width() const { return layer_sizes.front(); }
  int class_count() const { return layer_sizes.back(); }

  void validate() const {
    require(layer_sizes.size() >= 2, "mlp: need at least input and output sizes");
    for (int s : layer_sizes) require(s >= 1, "mlp: layer sizes must be positive");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, "mlp: dropout rate must be in [0, 1)");
    require(layers.size() + 1 == layer_sizes.size(), "mlp: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      require(layers[l].weights.rows() == layer_sizes[l + 1] &&
                  layers[l].weights.cols() == layer_sizes[l] &&
                  layers[l].bias.size() == layer_sizes[l + 1],
              "mlp: parameter shapes do not match layer sizes");
      if (!layers[l].weights.allFinite() || !layers[l].bias.allFinite())
        throw NumericError("mlp: non-finite parameters");
    }
  }
};

inline MlpModel init_mlp(std::vector<int> sizes, Activation act, double dropout, std::uint64_t seed) {
  MlpModel m{std::move(sizes), act, dropout, {}, seed};
  require(m.layer_sizes.size() >= 2, "mlp: need at least input and output sizes");
  Rng rng = substream(seed, "init", 2);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    int in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{MatrixXd(out, in), VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weights(r, c) = uniform(rng, -limit, limit);
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

// Named presets for the three dense tiers.
inline std::vector<int> preset_sizes(const std::string& kind, int input_width, int classes = kClassCount) {
  if (kind == "nn" || kind == "dnn_shallow") return {input_width, 16, classes};
  if (kind == "dnn") return {input_width, 64, 32, 16, classes};
  throw ArgumentError("unknown dense model kind: " + kind);
}

struct ForwardCache {
  std::vector<VectorXd> inputs;      // input to each layer (post-dropout)
  std::vector<VectorXd> pre;         // pre-activation of each layer
  std::vector<VectorXd> masks;       // dropout scale per hidden layer (empty when inactive)
  VectorXd scores;                   // output logits
};

/// Forward pass. With training = true and a dropout rate > 0, hidden
/// activations are masked and kept units scaled by 1/(1-p); rng is required
/// then. Inference is mask-free.
inline ForwardCache forward(const MlpModel& model, std::span<const double> features, bool training,
                            Rng* rng = nullptr) {
  if (features.size() != static_cast<std::size_t>(model.input_width()))
    throw ArgumentError("mlp forward: expected " + std::to_string(model.input_width()) +
                        " features, got " + std::to_string(features.size()));
  const bool drop = training && model.dropout_rate > 0.0;
  require(!drop || rng != nullptr, "mlp forward: dropout in training mode needs an rng");
  ForwardCache cache;
  VectorXd a = Eigen::Map<const VectorXd>(features.data(), static_cast<Eigen::Index>(features.size()));
  const double keep_scale = 1.0 / (1.0 - model.dropout_rate);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    cache.inputs.push_back(a);
    VectorXd z = model.layers[l].weights * a + model.layers[l].bias;
    cache.pre.push_back(z);
    if (l + 1 == model.layers.size()) {
      cache.scores = z;
      break;
    }
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a(i) = activation_eval(model.activation, z(i)).value;
    if (drop) {
      VectorXd mask(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        mask(i) = uniform01(*rng) < model.dropout_rate ? 0.0 : keep_scale;
      a = a.cwiseProduct(mask);
      cache.masks.push_back(std::move(mask));
    } else {
      cache.masks.emplace_back();
    }
  }
  return cache;
}

inline VectorXd softmax(const VectorXd& scores) {
  VectorXd e = (scores.array() - scores.maxCoeff()).exp();
  return e / e.sum();
}

struct LossResult {
  double loss;
  VectorXd grad;  // d loss / d scores
};

inline LossResult loss_softmax_ce(const VectorXd& scores, int label) {
  if (label < 0 || label >= scores.size())
    throw ArgumentError("loss: label " + std::to_string(label) + " out of range");
  double m = scores.maxCoeff();
  double lse = m + std::log((scores.array() - m).exp().sum());
  VectorXd p = softmax(scores);
  VectorXd g = p;
  g(label) -= 1.0;
  return {lse - scores(label), std::move(g)};
}

struct Gradients {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> bias;

  static Gradients zeros_like(const MlpModel& m) {
    Gradients g;
    for (const auto& l : m.layers) {
      g.weights.push_back(MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      g.bias.push_back(VectorXd::Zero(l.bias.size()));
    }
    return g;
  }
};

// Accumulates parameter gradients for one sample into `acc`, given the
// gradient of the loss with respect to the output scores.
inline void backward(const MlpModel& model, const ForwardCache& cache, const VectorXd& grad_scores,
                     Gradients& acc) {
  VectorXd delta = grad_scores;
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    acc.weights[li] += delta * cache.inputs[li].transpose();
    acc.bias[li] += delta;
    if (li == 0) break;
    VectorXd up = model.layers[li].weights.transpose() * delta;
    const VectorXd& z = cache.pre[li - 1];
    const VectorXd& mask = cache.masks[li - 1];
    for (Eigen::Index i = 0; i < up.size(); ++i) {
      up(i) *= activation_eval(model.activation, z(i)).derivative;
      if (mask.size()) up(i) *= mask(i);
    }
    delta = std::move(up);
  }
}

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 42;

  void validate() const {
    require(epochs >= 1, "train config: epochs must be at least 1");
    require(batch_size >= 1, "train config: batch size must be at least 1");
    require(learning_rate >= 0.0, "train config: learning rate must be non-negative");
    require(momentum >= 0.0 && momentum < 1.0, "train config: momentum must be in [0, 1)");
  }
};

struct MomentumState {
  Gradients velocity;
};

inline MomentumState init_momentum(const MlpModel& m) { return {Gradients::zeros_like(m)}; }

inline void sgd_update(MlpModel& model, MomentumState& state, const Gradients& g, double scale,
                       const TrainConfig& cfg) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    state.velocity.weights[l] = cfg.momentum * state.velocity.weights[l] - cfg.learning_rate * scale * g.weights[l];
    state.velocity.bias[l] = cfg.momentum * state.velocity.bias[l] - cfg.learning_rate * scale * g.bias[l];
    model.layers[l].weights += state.velocity.weights[l];
    model.layers[l].bias += state.velocity.bias[l];
  }
}

/// One pass over the data in a seeded shuffled order. Returns the mean
/// training loss of the epoch.
inline double train_epoch(MlpModel& model, MomentumState& state, const LabeledSet& data,
                          const TrainConfig& cfg, int epoch) {
  cfg.validate();
  if (data.empty()) throw DataError("train_epoch: dataset is empty");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = substream(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
  Rng dropout_rng = substream(cfg.seed, "dropout", static_cast<std::uint64_t>(epoch));
  shuffle(order, shuffle_rng);
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
    std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
    Gradients g = Gradients::zeros_like(model);
    for (std::size_t k = start; k < end; ++k) {
      std::size_t i = order[k];
      auto cache = forward(model, data.rows[i], true, &dropout_rng);
      auto loss = loss_softmax_ce(cache.scores, data.labels[i]);
      total += loss.loss;
      backward(model, cache, loss.grad, g);
    }
    sgd_update(model, state, g, 1.0 / static_cast<double>(end - start), cfg);
  }
  return total / static_cast<double>(data.size());
}

inline std::vector<double> train_mlp(MlpModel& model, const LabeledSet& data, const TrainConfig& cfg) {
  cfg.validate();
  auto state = init_momentum(model);
  std::vector<double> losses;
  for (int e = 0; e < cfg.epochs; ++e) losses.push_back(train_epoch(model, state, data, cfg, e));
  return losses;
}

struct Prediction {
  int label;
  std::vector<double> probabilities;
};

// Lowest index wins ties.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

inline Prediction predict(const MlpModel& model, std::span<const double> features) {
  VectorXd p = softmax(forward(model, features, false).scores);
  std::vector<double> probs(p.data(), p.data() + p.size());
  return {argmax(probs), std::move(probs)};
}

inline double mean_loss(const MlpModel& model, const LabeledSet& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += loss_softmax_ce(forward(model, data.rows[i], false).scores, data.labels[i]).loss;
  return total / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Text parameter format, version 1:
//
//   rtlsq-mlp 1
//   activation <relu|swish|tanh>
//   dropout <rate>
//   seed <seed>
//   sizes <count> <s0> <s1> ...
//   layer <index> <rows> <cols>
//   <rows lines of cols weights, row-major>
//   <one line of rows biases>
//   ... one block per layer

inline void save_mlp(std::ostream& os, const MlpModel& m) {
  os.precision(17);
  os << "rtlsq-mlp 1\n"
     << "activation " << to_string(m.activation) << '\n'
     << "dropout " << m.dropout_rate << '\n'
     << "seed " << m.seed << '\n'
     << "sizes " << m.layer_sizes.size();
  for (int s : m.layer_sizes) os << ' ' << s;
  os << '\n';
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    os << "layer " << l << ' ' << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) os << (c ? " " : "") << layer.weights(r, c);
      os << '\n';
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) os << (r ? " " : "") << layer.bias(r);
    os << '\n';
  }
}

inline MlpModel load_mlp(std::istream& is) {
  auto expect = [&](const std::string& key) {
    std::string tok;
    if (!(is >> tok) || tok != key) throw DataError("mlp file: expected '" + key + "'");
  };
  int version = 0;
  expect("rtlsq-mlp");
  if (!(is >> version) || version != 1) throw DataError("mlp file: unsupported version");
  MlpModel m;
  std::string act;
  expect("activation");
  is >> act;
  m.activation = parse_activation(act);
  expect("dropout");
  is >> m.dropout_rate;
  expect("seed");
  is >> m.seed;
  expect("sizes");
  std::size_t n = 0;
  is >> n;
  m.layer_sizes.resize(n);
  for (auto& s : m.layer_sizes) is >> s;
  if (!is || n < 2) throw DataError("mlp file: malformed header");
  for (std::size_t l = 0; l + 1 < n; ++l) {
    std::size_t idx = 0;
    Eigen::Index rows = 0, cols = 0;
    expect("layer");
    is >> idx >> rows >> cols;
    if (!is || idx != l || rows != m.layer_sizes[l + 1] || cols != m.layer_sizes[l])
      throw DataError("mlp file: malformed layer header " + std::to_string(l));
    DenseLayer layer{MatrixXd(rows, cols), VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) is >> layer.weights(r, c);
    for (Eigen::Index r = 0; r < rows; ++r) is >> layer.bias(r);
    if (!is) throw DataError("mlp file: truncated layer " + std::to_string(l));
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

}  // namespace rtlsq::mlp

#endif  // RTLSQ_MLP_HPP
