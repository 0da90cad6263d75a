#ifndef RTLSQ_DQNN_HPP
#define RTLSQ_DQNN_HPP

// Layered quantum perceptron networks trained on the fidelity cost.
//
// Layer l maps a state on w[l-1] qubits to a state on w[l] qubits: append
// w[l] ancillas in |0>, apply perceptrons U_1 ... U_m (U_1 first), and trace
// out the w[l-1] input qubits. Perceptron j of layer l acts on all w[l-1]
// input qubits plus output qubit j, in that order.

#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rtlsq/error.hpp"
#include "rtlsq/linalg.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq::dqnn {

using quantum::Complex;
using quantum::ComplexMatrix;
using quantum::ComplexVector;
using quantum::DensityMatrix;
using quantum::PureState;

inline constexpr int kWorkspaceCap = 10;
inline constexpr double kReunitarizeThreshold = 1e-8;

struct Architecture {
  std::vector<int> widths;

  int layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  int total_qubits() const { return std::accumulate(widths.begin(), widths.end(), 0); }

  void validate() const {
    require(widths.size() >= 2, "architecture needs at least an input and an output layer");
    for (int w : widths) require(w >= 1, "architecture layer widths must be positive");
    for (std::size_t l = 1; l < widths.size(); ++l)
      if (widths[l - 1] + widths[l] > kWorkspaceCap)
        throw ArgumentError("architecture exceeds the " + std::to_string(kWorkspaceCap) +
                            "-qubit layer workspace cap");
  }
};

inline std::string to_string(const Architecture& a) {
  std::string s;
  for (std::size_t i = 0; i < a.widths.size(); ++i) s += (i ? "," : "") + std::to_string(a.widths[i]);
  return s;
}

struct Network {
  Architecture arch;
  // perceptrons[l - 1][j] is perceptron j of layer l, a unitary on
  // (w[l-1] + 1) qubits.
  std::vector<std::vector<ComplexMatrix>> perceptrons;

  std::size_t perceptron_count() const {
    std::size_t n = 0;
    for (const auto& layer : perceptrons) n += layer.size();
    return n;
  }
};

struct TrainingPair {
  PureState input;
  PureState target;
};

using Dataset = std::vector<TrainingPair>;

inline Network init_network(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng = substream(seed, "init");
  Network net{arch, {}};
  for (int l = 1; l <= arch.layers(); ++l) {
    std::size_t dim = std::size_t{1} << (arch.widths[l - 1] + 1);
    std::vector<ComplexMatrix> layer;
    for (int j = 0; j < arch.widths[l]; ++j) layer.push_back(quantum::haar_unitary(dim, rng));
    net.perceptrons.push_back(std::move(layer));
  }
  return net;
}

// Network whose every perceptron is the identity.
inline Network identity_network(const Architecture& arch) {
  arch.validate();
  Network net{arch, {}};
  for (int l = 1; l <= arch.layers(); ++l) {
    auto dim = static_cast<Eigen::Index>(std::size_t{1} << (arch.widths[l - 1] + 1));
    net.perceptrons.emplace_back(static_cast<std::size_t>(arch.widths[l]),
                                 ComplexMatrix::Identity(dim, dim));
  }
  return net;
}

namespace detail {

inline std::vector<int> perceptron_qubits(int in_width, int j) {
  std::vector<int> q(static_cast<std::size_t>(in_width));
  std::iota(q.begin(), q.end(), 0);
  q.push_back(in_width + j);
  return q;
}

inline int infer_input_width(std::span<const ComplexMatrix> layer) {
  require(!layer.empty(), "layer has no perceptrons");
  int q = quantum::log2_exact(static_cast<std::size_t>(layer.front().rows()));
  for (const auto& u : layer)
    require(u.rows() == u.cols() && quantum::log2_exact(static_cast<std::size_t>(u.rows())) == q,
            "perceptrons in a layer must share one size");
  return q - 1;
}

inline std::vector<ComplexMatrix> embedded_layer(std::span<const ComplexMatrix> layer,
                                                 int in_width) {
  const int out_width = static_cast<int>(layer.size());
  std::vector<ComplexMatrix> e;
  e.reserve(layer.size());
  for (int j = 0; j < out_width; ++j)
    e.push_back(quantum::embed_operator(layer[static_cast<std::size_t>(j)],
                                        perceptron_qubits(in_width, j), in_width + out_width));
  return e;
}

inline ComplexMatrix zero_projector(int qubits) {
  auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  p(0, 0) = 1.0;
  return p;
}

inline std::set<int> range_set(int first, int count) {
  std::set<int> s;
  for (int q = first; q < first + count; ++q) s.insert(q);
  return s;
}

}  // namespace detail

inline DensityMatrix layer_channel(const DensityMatrix& state, std::span<const ComplexMatrix> layer) {
  const int in_width = detail::infer_input_width(layer);
  const int out_width = static_cast<int>(layer.size());
  require(state.qubits() == in_width && state.dim() == (std::size_t{1} << in_width),
          "layer_channel: state dimension does not match layer input width");
  ComplexMatrix work = quantum::tensor_product(state.matrix(), detail::zero_projector(out_width));
  for (const auto& e : detail::embedded_layer(layer, in_width)) work = e * work * e.adjoint();
  return quantum::validate_density(quantum::partial_trace_matrix(
      work, in_width + out_width, detail::range_set(in_width, out_width)));
}

// Heisenberg-picture dual of layer_channel: maps an operator on the layer's
// output qubits to one on its input qubits.
inline ComplexMatrix adjoint_channel(const ComplexMatrix& chi, std::span<const ComplexMatrix> layer) {
  const int in_width = detail::infer_input_width(layer);
  const int out_width = static_cast<int>(layer.size());
  require(chi.rows() == chi.cols() &&
              static_cast<std::size_t>(chi.rows()) == (std::size_t{1} << out_width),
          "adjoint_channel: operator dimension does not match layer output width");
  auto in_dim = static_cast<Eigen::Index>(std::size_t{1} << in_width);
  auto out_dim = static_cast<Eigen::Index>(std::size_t{1} << out_width);
  ComplexMatrix work = quantum::tensor_product(ComplexMatrix::Identity(in_dim, in_dim), chi);
  auto embedded = detail::embedded_layer(layer, in_width);
  for (auto it = embedded.rbegin(); it != embedded.rend(); ++it) work = it->adjoint() * work * *it;
  // <0|_out work |0>_out: output ancillas are the low-order bits.
  ComplexMatrix out(in_dim, in_dim);
  for (Eigen::Index a = 0; a < in_dim; ++a)
    for (Eigen::Index b = 0; b < in_dim; ++b) out(a, b) = work(a * out_dim, b * out_dim);
  return out;
}

struct FeedforwardResult {
  DensityMatrix output;
  std::vector<DensityMatrix> layer_states;  // [0] is the input, back() the output
};

inline FeedforwardResult feedforward(const Network& net, const DensityMatrix& rho_in) {
  require(rho_in.qubits() == net.arch.input_width(),
          "feedforward: input state does not match input layer width");
  std::vector<DensityMatrix> states{rho_in};
  for (const auto& layer : net.perceptrons) states.push_back(layer_channel(states.back(), layer));
  DensityMatrix out = states.back();
  return {std::move(out), std::move(states)};
}

namespace detail {

// Permutation operator on n qubits taking qubit `from[k]` to position k.
// Independent of the bit-scatter helpers used by the layered path.
inline ComplexMatrix swap_two(int a, int b, int n) {
  auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    auto ba = (idx >> (n - 1 - a)) & 1;
    auto bb = (idx >> (n - 1 - b)) & 1;
    Eigen::Index out = idx;
    if (ba != bb) out ^= (Eigen::Index{1} << (n - 1 - a)) | (Eigen::Index{1} << (n - 1 - b));
    p(out, idx) = 1.0;
  }
  return p;
}

// Embeds a k-qubit operator into n qubits by padding with identities
// (U (x) I) and conjugating with a sequence of qubit swaps that moves
// positions 0..k-1 onto the requested qubits.
inline ComplexMatrix embed_by_swaps(const ComplexMatrix& op, const std::vector<int>& qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  auto rest = static_cast<Eigen::Index>(std::size_t{1} << (n - k));
  ComplexMatrix padded = quantum::tensor_product(op, ComplexMatrix::Identity(rest, rest));
  // Track where each logical slot currently sits and build the routing.
  std::vector<int> slot_at(static_cast<std::size_t>(n));
  std::iota(slot_at.begin(), slot_at.end(), 0);
  auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix route = ComplexMatrix::Identity(dim, dim);
  for (int p = 0; p < k; ++p) {
    int target = qubits[static_cast<std::size_t>(p)];
    int cur = static_cast<int>(std::find(slot_at.begin(), slot_at.end(), p) - slot_at.begin());
    if (cur != target) {
      route = swap_two(cur, target, n) * route;
      std::swap(slot_at[static_cast<std::size_t>(cur)], slot_at[static_cast<std::size_t>(target)]);
    }
  }
  return route * padded * route.adjoint();
}

}  // namespace detail

// Builds the single global unitary over every register, conjugates
// rho_in (x) |0...0>, and traces out everything but the output layer.
inline DensityMatrix feedforward_full_circuit(const Network& net, const DensityMatrix& rho_in) {
  const auto& w = net.arch.widths;
  const int total = net.arch.total_qubits();
  if (total > kWorkspaceCap)
    throw ArgumentError("feedforward_full_circuit: " + std::to_string(total) +
                        " qubits exceed the workspace cap");
  require(rho_in.qubits() == w.front(), "feedforward_full_circuit: input width mismatch");
  auto dim = static_cast<Eigen::Index>(std::size_t{1} << total);
  ComplexMatrix global = ComplexMatrix::Identity(dim, dim);
  int offset_prev = 0;
  for (std::size_t l = 1; l < w.size(); ++l) {
    int offset_cur = offset_prev + w[l - 1];
    for (int j = 0; j < w[l]; ++j) {
      std::vector<int> qubits;
      for (int q = 0; q < w[l - 1]; ++q) qubits.push_back(offset_prev + q);
      qubits.push_back(offset_cur + j);
      global = detail::embed_by_swaps(net.perceptrons[l - 1][static_cast<std::size_t>(j)], qubits,
                                      total) *
               global;
    }
    offset_prev = offset_cur;
  }
  ComplexMatrix start =
      quantum::tensor_product(rho_in.matrix(), detail::zero_projector(total - w.front()));
  ComplexMatrix evolved = global * start * global.adjoint();
  return quantum::validate_density(quantum::partial_trace_matrix(
      evolved, total, detail::range_set(total - w.back(), w.back())));
}

inline double cost(const Network& net, const Dataset& data) {
  if (data.empty()) throw ArgumentError("cost: training data is empty");
  double sum = 0.0;
  for (const auto& pair : data)
    sum += quantum::fidelity(pair.target,
                             feedforward(net, DensityMatrix::from_pure(pair.input)).output);
  return sum / static_cast<double>(data.size());
}

/// Update generators K for every perceptron, plus the cost at the current
/// parameters. K_j^l is the Pauli-basis gradient of the cost along
/// U -> e^{i eps P} U, scaled by eta: K = eta * sum_P (dC/deps_P) P.
struct Directions {
  std::vector<std::vector<ComplexMatrix>> k;
  double cost = 0.0;
};

inline Directions update_directions(const Network& net, const Dataset& data, double eta) {
  if (data.empty()) throw ArgumentError("update_directions: training data is empty");
  const auto& w = net.arch.widths;
  const int layers = net.arch.layers();
  const Complex i_unit(0.0, 1.0);

  std::vector<std::vector<ComplexMatrix>> embedded;
  std::vector<std::vector<ComplexMatrix>> grad;
  for (int l = 1; l <= layers; ++l) {
    embedded.push_back(detail::embedded_layer(net.perceptrons[l - 1], w[l - 1]));
    auto dim = static_cast<Eigen::Index>(std::size_t{1} << (w[l - 1] + w[l]));
    grad.emplace_back(static_cast<std::size_t>(w[l]), ComplexMatrix::Zero(dim, dim));
  }

  double cost_sum = 0.0;
  for (const auto& pair : data) {
    auto fwd = feedforward(net, DensityMatrix::from_pure(pair.input));
    cost_sum += quantum::fidelity(pair.target, fwd.output);

    // chi[l] is the adjoint-propagated target on layer l's output qubits.
    std::vector<ComplexMatrix> chi(static_cast<std::size_t>(layers + 1));
    chi[static_cast<std::size_t>(layers)] = pair.target.projector();
    for (int l = layers; l >= 2; --l)
      chi[static_cast<std::size_t>(l - 1)] =
          adjoint_channel(chi[static_cast<std::size_t>(l)], net.perceptrons[l - 1]);

    for (int l = 1; l <= layers; ++l) {
      const auto& e = embedded[static_cast<std::size_t>(l - 1)];
      const int m = w[l];
      auto in_dim = static_cast<Eigen::Index>(std::size_t{1} << w[l - 1]);
      std::vector<ComplexMatrix> fwd_ops(static_cast<std::size_t>(m));
      ComplexMatrix a = quantum::tensor_product(fwd.layer_states[static_cast<std::size_t>(l - 1)].matrix(),
                                                detail::zero_projector(m));
      for (int j = 0; j < m; ++j) {
        a = e[static_cast<std::size_t>(j)] * a * e[static_cast<std::size_t>(j)].adjoint();
        fwd_ops[static_cast<std::size_t>(j)] = a;
      }
      ComplexMatrix back = quantum::tensor_product(ComplexMatrix::Identity(in_dim, in_dim),
                                                   chi[static_cast<std::size_t>(l)]);
      for (int j = m - 1; j >= 0; --j) {
        const auto& aj = fwd_ops[static_cast<std::size_t>(j)];
        grad[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)] +=
            i_unit * (aj * back - back * aj);
        back = e[static_cast<std::size_t>(j)].adjoint() * back * e[static_cast<std::size_t>(j)];
      }
    }
  }

  const double n = static_cast<double>(data.size());
  Directions out;
  out.cost = cost_sum / n;
  for (int l = 1; l <= layers; ++l) {
    std::vector<ComplexMatrix> layer_k;
    const int ws = w[l - 1] + w[l];
    auto keep_vec = detail::perceptron_qubits(w[l - 1], 0);
    const double basis_dim = static_cast<double>(std::size_t{1} << (w[l - 1] + 1));
    for (int j = 0; j < w[l]; ++j) {
      keep_vec.back() = w[l - 1] + j;
      std::set<int> keep(keep_vec.begin(), keep_vec.end());
      ComplexMatrix g = quantum::partial_trace_matrix(
          grad[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(j)] / n, ws, keep);
      // sum_P Tr(P g) P = d * g for the full Pauli basis; Tr(g) = 0 here.
      ComplexMatrix k = eta * basis_dim * g;
      layer_k.push_back(0.5 * (k + k.adjoint()));
    }
    out.k.push_back(std::move(layer_k));
  }
  return out;
}

inline ComplexMatrix update_direction(const Network& net, const Dataset& data, int layer, int node,
                                      double eta) {
  require(layer >= 1 && layer <= net.arch.layers(), "update_direction: layer out of range");
  require(node >= 0 && node < net.arch.widths[static_cast<std::size_t>(layer)],
          "update_direction: node out of range");
  return update_directions(net, data, eta).k[static_cast<std::size_t>(layer - 1)]
                                           [static_cast<std::size_t>(node)];
}

// Pauli-basis gradient coefficients dC/deps_P recovered from a generator K
// built with learning rate eta.
inline std::vector<double> pauli_coefficients(const ComplexMatrix& k, double eta) {
  int q = quantum::log2_exact(static_cast<std::size_t>(k.rows()));
  std::vector<double> out;
  const double d = static_cast<double>(k.rows());
  for (std::size_t p = 1; p < quantum::pauli::count(q); ++p)
    out.push_back((quantum::pauli::string(p, q) * k).trace().real() / (eta * d));
  return out;
}

inline void apply_update(Network& net, const std::vector<std::vector<ComplexMatrix>>& k, double eps) {
  if (eps == 0.0) return;
  for (std::size_t l = 0; l < net.perceptrons.size(); ++l)
    for (std::size_t j = 0; j < net.perceptrons[l].size(); ++j) {
      ComplexMatrix& u = net.perceptrons[l][j];
      u = quantum::hermitian_exp(k[l][j], eps) * u;
      if (quantum::unitarity_error(u) > kReunitarizeThreshold) u = quantum::polar_unitary(u);
    }
}

struct StepResult {
  Network network;
  double cost;
};

inline StepResult train_step(const Network& net, const Dataset& data, double eps, double eta) {
  require(eps >= 0.0, "train_step: eps must be non-negative");
  Network next = net;
  apply_update(next, update_directions(net, data, eta).k, eps);
  double c = cost(next, data);
  return {std::move(next), c};
}

struct TrainOptions {
  int steps = 1000;
  double eps = 0.01;
  double eta = 1.0;
  int log_every = 1;
};

struct TrajectoryPoint {
  int step;
  double cost;
};

struct TrainResult {
  Network network;
  std::vector<TrajectoryPoint> trajectory;  // cost before step 0 ... after the last step
  double final_cost;
};

inline TrainResult train(Network net, const Dataset& data, const TrainOptions& opt) {
  require(opt.steps >= 1, "train: steps must be at least 1");
  require(opt.log_every >= 1, "train: log_every must be at least 1");
  std::vector<TrajectoryPoint> traj;
  for (int step = 0; step < opt.steps; ++step) {
    Directions dir = update_directions(net, data, opt.eta);
    if (step % opt.log_every == 0) traj.push_back({step, dir.cost});
    apply_update(net, dir.k, opt.eps);
  }
  double final_cost = cost(net, data);
  traj.push_back({opt.steps, final_cost});
  return {std::move(net), std::move(traj), final_cost};
}

// ---------------------------------------------------------------------------
// Data

inline Dataset gen_unitary_dataset(const ComplexMatrix& v, std::size_t n_pairs, std::uint64_t seed) {
  if (!quantum::is_unitary(v)) throw NumericError("gen_unitary_dataset: target is not unitary");
  int qubits = quantum::log2_exact(static_cast<std::size_t>(v.rows()));
  Rng rng = substream(seed, "pairs");
  Dataset data;
  data.reserve(n_pairs);
  for (std::size_t x = 0; x < n_pairs; ++x) {
    PureState in = quantum::haar_state(qubits, rng);
    ComplexVector out = v * in.amplitudes();
    data.push_back({in, PureState::normalized(out)});
  }
  return data;
}

struct CorruptedData {
  Dataset data;
  std::vector<bool> corrupted;
};

inline CorruptedData corrupt_pairs(const Dataset& data, std::size_t n_corrupt, std::uint64_t seed) {
  if (n_corrupt > data.size())
    throw ArgumentError("corrupt_pairs: cannot corrupt more pairs than exist");
  Rng rng = substream(seed, "corruption");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  CorruptedData out{data, std::vector<bool>(data.size(), false)};
  for (std::size_t c = 0; c < n_corrupt; ++c) {
    std::size_t idx = order[c];
    out.corrupted[idx] = true;
    out.data[idx] = {quantum::haar_state(data[idx].input.qubits(), rng),
                     quantum::haar_state(data[idx].target.qubits(), rng)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct CurveRow {
  std::size_t n;                 // training pairs, or corrupted pairs
  std::optional<double> cost;    // empty when the row is skipped
  std::uint64_t seed;
  int steps;
  double eps;
  double eta;
};

struct ExperimentConfig {
  Architecture arch{{1, 2, 1}};
  std::uint64_t seed = 42;  // drives target unitary, pairs, init and corruption
  TrainOptions train{};
};

inline ComplexMatrix target_unitary(int qubits, std::uint64_t seed) {
  Rng rng = substream(seed, "target");
  return quantum::haar_unitary(std::size_t{1} << qubits, rng);
}

// Trains on n pairs for each grid point and scores on eval_pairs fresh pairs
// from the same target.
inline std::vector<CurveRow> generalization_experiment(const ExperimentConfig& cfg,
                                                       const std::vector<std::size_t>& n_pairs_grid,
                                                       std::size_t eval_pairs) {
  require(!n_pairs_grid.empty(), "generalization_experiment: grid is empty");
  require(eval_pairs > 0, "generalization_experiment: eval_pairs must be positive");
  cfg.arch.validate();
  require(cfg.arch.input_width() == cfg.arch.output_width(),
          "generalization_experiment: unitary learning needs equal input and output widths");
  ComplexMatrix v = target_unitary(cfg.arch.input_width(), cfg.seed);
  Dataset held_out = gen_unitary_dataset(v, eval_pairs, splitmix64(cfg.seed ^ 0xe7a1ULL));
  std::vector<CurveRow> rows;
  for (std::size_t n : n_pairs_grid) {
    if (n == 0) throw ArgumentError("generalization_experiment: empty training set (n = 0)");
    Dataset train_set = gen_unitary_dataset(v, n, cfg.seed);
    auto result = train(init_network(cfg.arch, cfg.seed), train_set, cfg.train);
    rows.push_back({n, cost(result.network, held_out), cfg.seed, cfg.train.steps, cfg.train.eps,
                    cfg.train.eta});
  }
  return rows;
}

inline std::vector<CurveRow> robustness_experiment(const ExperimentConfig& cfg, std::size_t n_total,
                                                   const std::vector<std::size_t>& corrupt_grid) {
  require(!corrupt_grid.empty(), "robustness_experiment: grid is empty");
  require(n_total > 0, "robustness_experiment: n_total must be positive");
  cfg.arch.validate();
  require(cfg.arch.input_width() == cfg.arch.output_width(),
          "robustness_experiment: unitary learning needs equal input and output widths");
  ComplexMatrix v = target_unitary(cfg.arch.input_width(), cfg.seed);
  Dataset clean = gen_unitary_dataset(v, n_total, cfg.seed);
  std::vector<CurveRow> rows;
  for (std::size_t c : corrupt_grid) {
    auto corrupted = corrupt_pairs(clean, c, cfg.seed);
    Dataset clean_subset;
    for (std::size_t i = 0; i < clean.size(); ++i)
      if (!corrupted.corrupted[i]) clean_subset.push_back(corrupted.data[i]);
    CurveRow row{c, std::nullopt, cfg.seed, cfg.train.steps, cfg.train.eps, cfg.train.eta};
    if (!clean_subset.empty()) {
      auto result = train(init_network(cfg.arch, cfg.seed), corrupted.data, cfg.train);
      row.cost = cost(result.network, clean_subset);
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows,
                            const std::string& n_column) {
  os << n_column << ",cost,seed,steps,eps,eta\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.n << ',';
    if (r.cost) os << *r.cost; else os << "skipped";
    os << ',' << r.seed << ',' << r.steps << ',' << r.eps << ',' << r.eta << '\n';
  }
}

// ---------------------------------------------------------------------------
// Controlled-unitary perceptron

// rho_out = sum_a <a|rho_in|a> U(a)|0><0|U(a)^dag. Only the diagonal of
// rho_in survives.
inline DensityMatrix controlled_unitary_channel(const DensityMatrix& rho_in,
                                                const std::vector<ComplexMatrix>& branches) {
  if (branches.size() != rho_in.dim())
    throw ArgumentError("controlled_unitary_channel: need one branch unitary per input basis state");
  auto out_dim = branches.front().rows();
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (std::size_t a = 0; a < branches.size(); ++a) {
    const auto& u = branches[a];
    require(u.rows() == out_dim && u.cols() == out_dim,
            "controlled_unitary_channel: branch unitaries must share one size");
    if (!quantum::is_unitary(u)) throw NumericError("controlled_unitary_channel: branch is not unitary");
    ComplexVector col = u.col(0);
    double weight = rho_in.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)).real();
    out += weight * (col * col.adjoint());
  }
  return quantum::validate_density(out);
}

}  // namespace rtlsq::dqnn

#endif  // RTLSQ_DQNN_HPP
