#ifndef RTLSQ_HYBRID_HPP
#define RTLSQ_HYBRID_HPP

// Hybrid detector: a VQC branch and a dense branch joined by a trainable
// affine fusion layer over [mlp class scores, vqc <Z> readouts].

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlsq/data.hpp"
#include "rtlsq/error.hpp"
#include "rtlsq/mlp.hpp"
#include "rtlsq/rng.hpp"
#include "rtlsq/vqc.hpp"

namespace rtlsq::hybrid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class FusionInit { mlp_passthrough, zero };

inline std::string to_string(FusionInit f) { return f == FusionInit::zero ? "concat" : "affine"; }

inline FusionInit parse_fusion(const std::string& s) {
  if (s == "affine") return FusionInit::mlp_passthrough;
  if (s == "concat") return FusionInit::zero;
  throw ConfigError("unknown fusion mode: " + s);
}

struct HybridModel {
  vqc::VqcModel vqc;
  mlp::MlpModel mlp;
  // Phase-1 readout head of the VQC branch: classes x qubits.
  MatrixXd vqc_head_w;
  VectorXd vqc_head_b;
  // classes x (classes + qubits), input order [mlp scores, vqc <Z>].
  MatrixXd fusion_w;
  VectorXd fusion_b;

  int classes() const { return mlp.layer_sizes.back(); }
  int fusion_width() const { return classes() + vqc.n_qubits; }

  void validate() const {
    mlp.validate();
    vqc.validate();
    require(fusion_w.rows() == classes() && fusion_w.cols() == fusion_width(), "hybrid: fusion weight shape");
    require(fusion_b.size() == classes(), "hybrid: fusion bias width");
    require(vqc_head_w.rows() == classes() && vqc_head_w.cols() == vqc.n_qubits, "hybrid: vqc head shape");
    require(vqc_head_b.size() == classes(), "hybrid: vqc head bias width");
  }
};

// Identity on the mlp slice, zero on the vqc slice: predictions equal the mlp's.
inline void set_mlp_passthrough(HybridModel& h) {
  h.fusion_w = MatrixXd::Zero(h.classes(), h.fusion_width());
  h.fusion_w.leftCols(h.classes()).setIdentity();
  h.fusion_b = VectorXd::Zero(h.classes());
}

inline HybridModel make_hybrid(vqc::VqcModel v, mlp::MlpModel m, FusionInit init = FusionInit::mlp_passthrough) {
  HybridModel h{std::move(v), std::move(m), {}, {}, {}, {}};
  h.vqc_head_w = MatrixXd::Zero(h.classes(), h.vqc.n_qubits);
  h.vqc_head_b = VectorXd::Zero(h.classes());
  if (init == FusionInit::mlp_passthrough) {
    set_mlp_passthrough(h);
  } else {
    h.fusion_w = MatrixXd::Zero(h.classes(), h.fusion_width());
    h.fusion_b = VectorXd::Zero(h.classes());
  }
  h.validate();
  return h;
}

struct BranchScores {
  VectorXd mlp;  // pre-softmax class scores
  VectorXd vqc;  // per-qubit <Z>
};

inline BranchScores branch_scores(const HybridModel& h, std::span<const double> features) {
  auto z = vqc::vqc_scores(h.vqc, features);
  return {mlp::forward(h.mlp, features, false).scores, Eigen::Map<const VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()))};
}

inline VectorXd concat(const BranchScores& b) {
  VectorXd u(b.mlp.size() + b.vqc.size());
  u << b.mlp, b.vqc;
  return u;
}

struct HybridOutput {
  int label = 0;
  std::vector<double> probabilities;
  BranchScores branches;
};

inline VectorXd fuse_scores(const HybridModel& h, const VectorXd& u) { return h.fusion_w * u + h.fusion_b; }

inline HybridOutput fuse_forward(const HybridModel& h, std::span<const double> features) {
  require(features.size() == static_cast<std::size_t>(h.mlp.layer_sizes.front()),
          "fuse_forward: feature width does not match the model");
  auto b = branch_scores(h, features);
  VectorXd p = mlp::softmax(fuse_scores(h, concat(b)));
  std::vector<double> probs(p.data(), p.data() + p.size());
  return {mlp::argmax(probs), std::move(probs), std::move(b)};
}

inline std::vector<int> predict_hybrid(const HybridModel& h, const LabeledSet& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& r : data.rows) out.push_back(fuse_forward(h, r).label);
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct HybridTrainConfig {
  mlp::TrainConfig mlp{};
  int vqc_epochs = 8;
  double vqc_learning_rate = 0.1;
  int fusion_epochs = 40;
  double fusion_learning_rate = 0.05;
  int fine_tune_epochs = 1;
  double fine_tune_learning_rate = 0.005;
  FusionInit fusion_init = FusionInit::mlp_passthrough;
  bool train_branches = true;  // false: phase 2 only, branches stay as given

  void validate() const {
    mlp.validate();
    require(vqc_epochs >= 0 && fusion_epochs >= 0 && fine_tune_epochs >= 0, "hybrid config: epochs must be >= 0");
    require(vqc_learning_rate >= 0 && fusion_learning_rate >= 0 && fine_tune_learning_rate >= 0,
            "hybrid config: learning rates must be >= 0");
  }
};

struct TrainCurves {
  std::vector<double> mlp;
  std::vector<double> vqc;
  std::vector<double> fusion;
  std::vector<double> fine_tune;
};

namespace detail {

struct Affine {
  MatrixXd w;
  VectorXd b;
  MatrixXd vw;
  VectorXd vb;

  Affine(MatrixXd w0, VectorXd b0)
      : w(std::move(w0)), b(std::move(b0)), vw(MatrixXd::Zero(w.rows(), w.cols())), vb(VectorXd::Zero(b.size())) {}

  void step(const MatrixXd& gw, const VectorXd& gb, double lr, double momentum) {
    vw = momentum * vw - lr * gw;
    vb = momentum * vb - lr * gb;
    w += vw;
    b += vb;
  }
};

inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, const std::string& name, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = substream(seed, name, static_cast<std::uint64_t>(epoch));
  shuffle(order, rng);
  return order;
}

template <typename PerSample, typename Apply>
double minibatch_epoch(std::size_t n, int batch, std::uint64_t seed, const std::string& name, int epoch,
                       PerSample&& per_sample, Apply&& apply) {
  auto order = epoch_order(n, seed, name, epoch);
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch)) {
    std::size_t end = std::min(n, start + static_cast<std::size_t>(batch));
    for (std::size_t k = start; k < end; ++k) total += per_sample(order[k]);
    apply(1.0 / static_cast<double>(end - start));
  }
  return total / static_cast<double>(n);
}

}  // namespace detail

/// VQC branch with its own linear head, trained by parameter shift.
inline std::vector<double> train_vqc_branch(HybridModel& h, const LabeledSet& data, const HybridTrainConfig& cfg) {
  const int n = h.vqc.n_qubits;
  Rng init = substream(cfg.mlp.seed, "init", 3);
  double limit = std::sqrt(6.0 / static_cast<double>(n + h.classes()));
  for (Eigen::Index r = 0; r < h.vqc_head_w.rows(); ++r)
    for (Eigen::Index c = 0; c < h.vqc_head_w.cols(); ++c) h.vqc_head_w(r, c) = uniform(init, -limit, limit);
  h.vqc_head_b.setZero();

  detail::Affine head(h.vqc_head_w, h.vqc_head_b);
  std::vector<double> theta_v(h.vqc.params.size(), 0.0);
  std::vector<double> curve;
  for (int e = 0; e < cfg.vqc_epochs; ++e) {
    MatrixXd gw = MatrixXd::Zero(head.w.rows(), head.w.cols());
    VectorXd gb = VectorXd::Zero(head.b.size());
    std::vector<double> gt(theta_v.size(), 0.0);
    auto per_sample = [&](std::size_t i) {
      auto z = vqc::vqc_scores(h.vqc, data.rows[i]);
      VectorXd zv = Eigen::Map<const VectorXd>(z.data(), n);
      auto loss = mlp::loss_softmax_ce(head.w * zv + head.b, data.labels[i]);
      gw += loss.grad * zv.transpose();
      gb += loss.grad;
      VectorXd down = head.w.transpose() * loss.grad;
      auto g = vqc::param_shift_grad(h.vqc, data.rows[i], std::span<const double>(down.data(), static_cast<std::size_t>(n)));
      for (std::size_t k = 0; k < gt.size(); ++k) gt[k] += g[k];
      return loss.loss;
    };
    auto apply = [&](double scale) {
      head.step(gw * scale, gb * scale, cfg.vqc_learning_rate, cfg.mlp.momentum);
      for (std::size_t k = 0; k < gt.size(); ++k) {
        theta_v[k] = cfg.mlp.momentum * theta_v[k] - cfg.vqc_learning_rate * scale * gt[k];
        h.vqc.params[k] += theta_v[k];
      }
      gw.setZero();
      gb.setZero();
      std::fill(gt.begin(), gt.end(), 0.0);
    };
    curve.push_back(detail::minibatch_epoch(data.size(), cfg.mlp.batch_size, cfg.mlp.seed, "shuffle-vqc", e,
                                            per_sample, apply));
  }
  h.vqc_head_w = head.w;
  h.vqc_head_b = head.b;
  return curve;
}

// Loss and gradient of the fusion layer on one cached branch input.
inline mlp::LossResult fusion_loss(const HybridModel& h, const VectorXd& u, int label) {
  return mlp::loss_softmax_ce(fuse_scores(h, u), label);
}

inline double fusion_mean_loss(const HybridModel& h, const LabeledSet& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += fusion_loss(h, concat(branch_scores(h, data.rows[i])), data.labels[i]).loss;
  return total / static_cast<double>(data.size());
}

/// Phase 2: branches frozen, fusion trained on cached branch outputs.
inline std::vector<double> train_fusion(HybridModel& h, const LabeledSet& data, const HybridTrainConfig& cfg) {
  std::vector<VectorXd> cache;
  cache.reserve(data.size());
  for (const auto& r : data.rows) cache.push_back(concat(branch_scores(h, r)));
  detail::Affine fusion(h.fusion_w, h.fusion_b);
  MatrixXd gw = MatrixXd::Zero(fusion.w.rows(), fusion.w.cols());
  VectorXd gb = VectorXd::Zero(fusion.b.size());
  std::vector<double> curve;
  for (int e = 0; e < cfg.fusion_epochs; ++e) {
    auto per_sample = [&](std::size_t i) {
      auto loss = mlp::loss_softmax_ce(fusion.w * cache[i] + fusion.b, data.labels[i]);
      gw += loss.grad * cache[i].transpose();
      gb += loss.grad;
      return loss.loss;
    };
    auto apply = [&](double scale) {
      fusion.step(gw * scale, gb * scale, cfg.fusion_learning_rate, cfg.mlp.momentum);
      gw.setZero();
      gb.setZero();
    };
    curve.push_back(detail::minibatch_epoch(data.size(), cfg.mlp.batch_size, cfg.mlp.seed, "shuffle-fusion", e,
                                            per_sample, apply));
  }
  h.fusion_w = fusion.w;
  h.fusion_b = fusion.b;
  return curve;
}

/// Joint pass: fusion, mlp (backprop through fusion) and vqc (parameter
/// shift through fusion) all step together.
inline std::vector<double> fine_tune(HybridModel& h, const LabeledSet& data, const HybridTrainConfig& cfg) {
  const int c = h.classes();
  const int n = h.vqc.n_qubits;
  const double lr = cfg.fine_tune_learning_rate;
  mlp::TrainConfig mcfg = cfg.mlp;
  mcfg.learning_rate = lr;
  auto mstate = mlp::init_momentum(h.mlp);
  detail::Affine fusion(h.fusion_w, h.fusion_b);
  std::vector<double> theta_v(h.vqc.params.size(), 0.0);
  std::vector<double> curve;
  for (int e = 0; e < cfg.fine_tune_epochs; ++e) {
    Rng dropout_rng = substream(cfg.mlp.seed, "dropout-fine-tune", static_cast<std::uint64_t>(e));
    MatrixXd gw = MatrixXd::Zero(fusion.w.rows(), fusion.w.cols());
    VectorXd gb = VectorXd::Zero(fusion.b.size());
    auto mg = mlp::Gradients::zeros_like(h.mlp);
    std::vector<double> gt(theta_v.size(), 0.0);
    auto per_sample = [&](std::size_t i) {
      const auto& x = data.rows[i];
      auto mc = mlp::forward(h.mlp, x, true, &dropout_rng);
      auto z = vqc::vqc_scores(h.vqc, x);
      VectorXd u(c + n);
      u << mc.scores, Eigen::Map<const VectorXd>(z.data(), n);
      auto loss = mlp::loss_softmax_ce(fusion.w * u + fusion.b, data.labels[i]);
      gw += loss.grad * u.transpose();
      gb += loss.grad;
      VectorXd du = fusion.w.transpose() * loss.grad;
      mlp::backward(h.mlp, mc, du.head(c), mg);
      VectorXd dz = du.tail(n);
      auto g = vqc::param_shift_grad(h.vqc, x, std::span<const double>(dz.data(), static_cast<std::size_t>(n)));
      for (std::size_t k = 0; k < gt.size(); ++k) gt[k] += g[k];
      return loss.loss;
    };
    auto apply = [&](double scale) {
      fusion.step(gw * scale, gb * scale, lr, cfg.mlp.momentum);
      mlp::sgd_update(h.mlp, mstate, mg, scale, mcfg);
      for (std::size_t k = 0; k < gt.size(); ++k) {
        theta_v[k] = cfg.mlp.momentum * theta_v[k] - lr * scale * gt[k];
        h.vqc.params[k] += theta_v[k];
      }
      gw.setZero();
      gb.setZero();
      mg = mlp::Gradients::zeros_like(h.mlp);
      std::fill(gt.begin(), gt.end(), 0.0);
    };
    curve.push_back(detail::minibatch_epoch(data.size(), cfg.mlp.batch_size, cfg.mlp.seed, "shuffle-fine-tune", e,
                                            per_sample, apply));
  }
  h.fusion_w = fusion.w;
  h.fusion_b = fusion.b;
  return curve;
}

/// Phase 1 trains both branches independently, phase 2 the fusion layer
/// with branches frozen, phase 3 an optional joint fine-tune.
inline TrainCurves train_hybrid(HybridModel& h, const LabeledSet& data, const HybridTrainConfig& cfg) {
  cfg.validate();
  h.validate();
  if (data.empty()) throw DataError("train_hybrid: dataset is empty");
  data.validate(h.classes());
  TrainCurves curves;
  if (cfg.train_branches) {
    curves.mlp = mlp::train_mlp(h.mlp, data, cfg.mlp);
    curves.vqc = train_vqc_branch(h, data, cfg);
    if (cfg.fusion_init == FusionInit::mlp_passthrough) set_mlp_passthrough(h);
  }
  curves.fusion = train_fusion(h, data, cfg);
  if (cfg.fine_tune_epochs > 0) curves.fine_tune = fine_tune(h, data, cfg);
  return curves;
}

// ---------------------------------------------------------------------------
// Persistence: mlp.txt, vqc.txt, fusion.txt and manifest.json in one directory.

inline void save_vqc(std::ostream& os, const HybridModel& h) {
  os.precision(17);
  const auto& v = h.vqc;
  os << "rtlsq-vqc 1\nqubits " << v.n_qubits << "\ndepth " << v.depth << "\nencoding " << vqc::to_string(v.encoding)
     << "\nentanglement " << vqc::to_string(v.entanglement) << "\nparams " << v.params.size() << '\n';
  for (std::size_t i = 0; i < v.params.size(); ++i) os << (i ? " " : "") << v.params[i];
  os << "\nhead " << h.vqc_head_w.rows() << ' ' << h.vqc_head_w.cols() << '\n' << h.vqc_head_w << '\n'
     << h.vqc_head_b.transpose() << '\n';
}

inline void save_fusion(std::ostream& os, const HybridModel& h) {
  os.precision(17);
  os << "rtlsq-fusion 1\nweights " << h.fusion_w.rows() << ' ' << h.fusion_w.cols() << '\n'
     << h.fusion_w << '\n' << h.fusion_b.transpose() << '\n';
}

namespace detail {

inline void expect_token(std::istream& is, const std::string& key, const std::string& what) {
  std::string tok;
  if (!(is >> tok) || tok != key) throw DataError(what + ": expected '" + key + "'");
}

inline void read_matrix(std::istream& is, MatrixXd& m, VectorXd& b, const std::string& what) {
  Eigen::Index rows = 0, cols = 0;
  is >> rows >> cols;
  if (!is || rows <= 0 || cols <= 0) throw DataError(what + ": malformed shape");
  m.resize(rows, cols);
  b.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) is >> m(r, c);
  for (Eigen::Index r = 0; r < rows; ++r) is >> b(r);
  if (!is) throw DataError(what + ": truncated");
}

}  // namespace detail

inline void load_vqc(std::istream& is, HybridModel& h) {
  const std::string what = "vqc file";
  int version = 0;
  detail::expect_token(is, "rtlsq-vqc", what);
  is >> version;
  if (version != 1) throw DataError(what + ": unsupported version");
  std::string enc, ent;
  std::size_t count = 0;
  detail::expect_token(is, "qubits", what);
  is >> h.vqc.n_qubits;
  detail::expect_token(is, "depth", what);
  is >> h.vqc.depth;
  detail::expect_token(is, "encoding", what);
  is >> enc;
  detail::expect_token(is, "entanglement", what);
  is >> ent;
  detail::expect_token(is, "params", what);
  is >> count;
  if (!is) throw DataError(what + ": malformed header");
  h.vqc.encoding = vqc::parse_encoding(enc);
  h.vqc.entanglement = vqc::parse_entanglement(ent);
  h.vqc.params.resize(count);
  for (double& p : h.vqc.params) is >> p;
  detail::expect_token(is, "head", what);
  detail::read_matrix(is, h.vqc_head_w, h.vqc_head_b, what);
}

struct Manifest {
  std::string model_kind;
  std::uint64_t seed = 0;
  std::string config_hash;
};

inline void save_hybrid(const std::filesystem::path& dir, const HybridModel& h, const Manifest& m) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw DataError("cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("mlp.txt");
    mlp::save_mlp(os, h.mlp);
  }
  {
    auto os = open("vqc.txt");
    save_vqc(os, h);
  }
  {
    auto os = open("fusion.txt");
    save_fusion(os, h);
  }
  nlohmann::ordered_json j;
  j["format"] = "rtlsq-hybrid";
  j["version"] = 1;
  j["model"] = m.model_kind;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["files"] = {{"mlp", "mlp.txt"}, {"vqc", "vqc.txt"}, {"fusion", "fusion.txt"}};
  j["qubits"] = h.vqc.n_qubits;
  j["depth"] = h.vqc.depth;
  j["classes"] = h.classes();
  auto os = open("manifest.json");
  os << j.dump(2) << '\n';
}

inline HybridModel load_hybrid(const std::filesystem::path& dir, Manifest* manifest = nullptr) {
  auto open = [&](const std::string& name) {
    std::ifstream is(dir / name);
    if (!is) throw DataError("missing hybrid file: " + (dir / name).string());
    return is;
  };
  nlohmann::json j;
  try {
    auto is = open("manifest.json");
    j = nlohmann::json::parse(is);
    if (j.at("format") != "rtlsq-hybrid" || j.at("version") != 1) throw DataError("unsupported hybrid manifest");
    if (manifest)
      *manifest = {j.at("model").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                   j.at("config_hash").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("hybrid manifest: ") + e.what());
  }
  HybridModel h;
  {
    auto is = open(j["files"]["mlp"].get<std::string>());
    h.mlp = mlp::load_mlp(is);
  }
  {
    auto is = open(j["files"]["vqc"].get<std::string>());
    load_vqc(is, h);
  }
  {
    auto is = open(j["files"]["fusion"].get<std::string>());
    detail::expect_token(is, "rtlsq-fusion", "fusion file");
    int version = 0;
    is >> version;
    detail::expect_token(is, "weights", "fusion file");
    detail::read_matrix(is, h.fusion_w, h.fusion_b, "fusion file");
  }
  try {
    h.validate();
  } catch (const ArgumentError& e) {
    throw DataError(std::string("hybrid files inconsistent: ") + e.what());
  }
  return h;
}

}  // namespace rtlsq::hybrid

#endif  // RTLSQ_HYBRID_HPP
