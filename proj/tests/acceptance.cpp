// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 3 8        run a subset
//
// Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "rtlsq/config.hpp"
#include "rtlsq/dqnn.hpp"
#include "rtlsq/experiments.hpp"
#include "rtlsq/hybrid.hpp"
#include "rtlsq/metrics.hpp"
#include "rtlsq/mlp.hpp"
#include "rtlsq/privacy.hpp"
#include "rtlsq/telemetry.hpp"
#include "rtlsq/vqc.hpp"

#ifndef RTLSQ_CLI_PATH
#define RTLSQ_CLI_PATH "rtlsq"
#endif

namespace fs = std::filesystem;
namespace q = rtlsq::quantum;
namespace dq = rtlsq::dqnn;
namespace vq = rtlsq::vqc;
namespace nn = rtlsq::mlp;
namespace hy = rtlsq::hybrid;
namespace ev = rtlsq::eval;
namespace pv = rtlsq::privacy;
namespace tel = rtlsq::telemetry;
using q::ComplexMatrix;
using q::DensityMatrix;

namespace {

// Regression baseline: attack F1 of hybrid_dnn (4 qubits), seed 42, default
// config, recorded on the first full run.
constexpr double kHybridAttackF1Baseline = 0.9938658781;
constexpr double kBaselineTolerance = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared oracles

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
}

// cost through the global unitary, independent of the layered code path
double oracle_cost(const dq::Network& net, const dq::Dataset& data) {
  double s = 0.0;
  for (const auto& p : data)
    s += q::fidelity(p.target, dq::feedforward_full_circuit(net, DensityMatrix::from_pure(p.input)));
  return s / static_cast<double>(data.size());
}

std::vector<double> dqnn_fd_gradient(const dq::Network& net, const dq::Dataset& data, int layer, int node, double h) {
  const ComplexMatrix& u = net.perceptrons[layer - 1][node];
  int qubits = q::log2_exact(static_cast<std::size_t>(u.rows()));
  std::vector<double> g;
  for (std::size_t p = 1; p < q::pauli::count(qubits); ++p) {
    ComplexMatrix pm = q::pauli::string(p, qubits);
    dq::Network plus = net, minus = net;
    plus.perceptrons[layer - 1][node] = q::hermitian_exp(pm, h) * u;
    minus.perceptrons[layer - 1][node] = q::hermitian_exp(pm, -h) * u;
    g.push_back((oracle_cost(plus, data) - oracle_cost(minus, data)) / (2 * h));
  }
  return g;
}

// Per-sample brute-force metrics.
struct Brute {
  std::vector<double> p, r, f1;
  double accuracy = 0, macro = 0, weighted = 0, attack = 0;
};

Brute brute_metrics(const std::vector<int>& t, const std::vector<int>& y, int k, const std::set<int>& attack) {
  Brute b;
  double correct = 0, n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) correct += t[i] == y[i];
  b.accuracy = correct / n;
  std::vector<double> support;
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp += t[i] == c && y[i] == c;
      fp += t[i] != c && y[i] == c;
      fn += t[i] == c && y[i] != c;
    }
    double p = tp + fp > 0 ? tp / (tp + fp) : 0, r = tp + fn > 0 ? tp / (tp + fn) : 0;
    b.p.push_back(p);
    b.r.push_back(r);
    b.f1.push_back(p + r > 0 ? 2 * p * r / (p + r) : 0);
    support.push_back(tp + fn);
  }
  double as = 0, af = 0;
  for (int c = 0; c < k; ++c) {
    auto u = static_cast<std::size_t>(c);
    b.macro += b.f1[u] / k;
    b.weighted += b.f1[u] * support[u] / n;
    if (attack.count(c)) {
      as += support[u];
      af += b.f1[u] * support[u];
    }
  }
  if (attack.size() == 1) b.attack = b.f1[static_cast<std::size_t>(*attack.begin())];
  else if (as > 0) b.attack = af / as;
  else
    for (int c : attack) b.attack += b.f1[static_cast<std::size_t>(c)] / static_cast<double>(attack.size());
  return b;
}

const tel::FeatureTable& default_features() {
  static const tel::FeatureTable t = [] {
    rtlsq::config::RunConfig cfg;
    return tel::featurize_runs(tel::generate_runs(cfg.telemetry, cfg.seed), cfg.telemetry.window,
                               cfg.telemetry.sim.radio);
  }();
  return t;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome oracle_equivalence() {
  const std::vector<dq::Architecture> archs{{{1, 1}}, {{1, 2, 1}}, {{2, 2}}, {{2, 3, 2}}};
  rtlsq::Rng rng = rtlsq::substream(1001, "acceptance");
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto& arch = archs[rtlsq::uniform_index(rng, archs.size())];
    auto net = dq::init_network(arch, 5000 + static_cast<std::uint64_t>(i));
    auto rho = q::random_density(arch.input_width(), rng);
    worst = std::max(worst, q::max_abs(dq::feedforward(net, rho).output.matrix() -
                                       dq::feedforward_full_circuit(net, rho).matrix()));
  }
  return {worst <= 1e-10, "50 networks, max |layered - global| = " + fmt("%.3g", worst)};
}

Outcome quantum_gradients() {
  double dq_worst = 0.0;
  rtlsq::Rng rng = rtlsq::substream(1002, "acceptance");
  for (const dq::Architecture& arch : {dq::Architecture{{1, 1}}, dq::Architecture{{1, 2, 1}}}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      auto net = dq::init_network(arch, 200 + s);
      auto data = dq::gen_unitary_dataset(q::haar_unitary(2, rng), 4, 300 + s);
      auto dirs = dq::update_directions(net, data, 1.0);
      for (int l = 1; l <= arch.layers(); ++l)
        for (int j = 0; j < arch.widths[static_cast<std::size_t>(l)]; ++j)
          dq_worst = std::max(dq_worst, relative_error(dq::pauli_coefficients(dirs.k[l - 1][j], 1.0),
                                                       dqnn_fd_gradient(net, data, l, j, 1e-5)));
    }
  }

  double vqc_worst = 0.0;
  const double h = 1e-5;
  for (int draw = 0; draw < 100; ++draw) {
    int n = 2 + 2 * static_cast<int>(rtlsq::uniform_index(rng, 3));
    auto m = vq::init_vqc(n, 1 + static_cast<int>(rtlsq::uniform_index(rng, 3)), 700 + draw, vq::Encoding::angle,
                          draw % 2 ? vq::Entanglement::ring : vq::Entanglement::linear);
    std::vector<double> f(10), g(static_cast<std::size_t>(n));
    for (double& x : f) x = rtlsq::uniform01(rng);
    for (double& x : g) x = rtlsq::gaussian(rng);
    auto projected = [&](const vq::VqcModel& mm) {
      auto s = vq::vqc_scores(mm, f);
      double acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) acc += g[i] * s[i];
      return acc;
    };
    auto analytic = vq::param_shift_grad(m, f, g);
    std::vector<double> numeric;
    for (std::size_t k = 0; k < m.params.size(); ++k) {
      auto plus = m, minus = m;
      plus.params[k] += h;
      minus.params[k] -= h;
      numeric.push_back((projected(plus) - projected(minus)) / (2 * h));
    }
    vqc_worst = std::max(vqc_worst, relative_error(numeric, analytic));
  }
  return {dq_worst <= 1e-5 && vqc_worst <= 1e-6,
          "dqnn rel err " + fmt("%.3g", dq_worst) + " (<= 1e-5), vqc rel err " + fmt("%.3g", vqc_worst) +
              " (<= 1e-6)"};
}

Outcome unitary_learning() {
  dq::ExperimentConfig cfg;  // [1,2,1], seed 42, 1000 steps
  auto v = dq::target_unitary(1, cfg.seed);
  auto train_set = dq::gen_unitary_dataset(v, 10, cfg.seed);
  auto result = dq::train(dq::init_network(cfg.arch, cfg.seed), train_set, cfg.train);
  auto held = dq::gen_unitary_dataset(v, 10, rtlsq::splitmix64(cfg.seed ^ 0xe7a1ULL));
  double held_cost = dq::cost(result.network, held);
  bool ok = result.final_cost >= 0.95 && std::abs(held_cost - result.final_cost) <= 0.05;
  return {ok, "train cost " + fmt("%.6f", result.final_cost) + " (>= 0.95), held-out " + fmt("%.6f", held_cost) +
                  " (gap " + fmt("%.4f", std::abs(held_cost - result.final_cost)) + " <= 0.05)"};
}

Outcome corruption_robustness() {
  dq::ExperimentConfig cfg;
  auto rows = dq::robustness_experiment(cfg, 10, {0, 2, 8});
  double base = *rows[0].cost, c20 = *rows[1].cost, c80 = *rows[2].cost;
  bool ok = c20 >= c80 && c20 >= 0.85 * base;
  return {ok, "clean-subset cost: 0% " + fmt("%.6f", base) + ", 20% " + fmt("%.6f", c20) + ", 80% " +
                  fmt("%.6f", c80) + " (20% >= 80% and >= 0.85 x baseline)"};
}

Outcome metrics_oracle() {
  rtlsq::Rng rng(2025);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int k = 2 + static_cast<int>(rtlsq::uniform_index(rng, 4));
    std::size_t n = 1 + rtlsq::uniform_index(rng, 200);
    std::vector<int> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rtlsq::uniform_index(rng, static_cast<std::size_t>(k)) * (trial % 5 != 0));
      y[i] = static_cast<int>(rtlsq::uniform_index(rng, static_cast<std::size_t>(k)));
    }
    std::set<int> attack;
    for (int c = 1; c < k; ++c)
      if (rtlsq::uniform01(rng) < 0.6) attack.insert(c);
    if (attack.empty()) attack.insert(k - 1);
    auto cm = ev::confusion(t, y, k);
    auto m = ev::class_metrics(cm);
    auto a = ev::aggregate_f1(cm, attack);
    auto b = brute_metrics(t, y, k, attack);
    auto upd = [&](double x, double o) { worst = std::max(worst, std::abs(x - o)); };
    upd(m.accuracy, b.accuracy);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      upd(m.per_class[c].precision, b.p[c]);
      upd(m.per_class[c].recall, b.r[c]);
      upd(m.per_class[c].f1, b.f1[c]);
    }
    upd(a.macro_f1, b.macro);
    upd(a.weighted_f1, b.weighted);
    upd(a.attack_f1, b.attack);
  }
  return {worst <= 1e-12, "1000 matrices, max deviation " + fmt("%.3g", worst) + " (<= 1e-12)"};
}

Outcome classical_gradients() {
  double worst = 0.0;
  rtlsq::Rng rng(6);
  for (auto act : {nn::Activation::relu, nn::Activation::swish, nn::Activation::tanh}) {
    auto m = nn::init_mlp({10, 16, 8, 3}, act, 0.0, 17);
    for (auto& l : m.layers) l.bias.setConstant(0.05);
    std::vector<double> x(10);
    for (double& v : x) v = rtlsq::uniform01(rng);
    const int y = 1;
    auto loss = [&](const nn::MlpModel& mm) { return nn::loss_softmax_ce(nn::forward(mm, x, false).scores, y).loss; };
    auto cache = nn::forward(m, x, false);
    auto g = nn::Gradients::zeros_like(m);
    nn::backward(m, cache, nn::loss_softmax_ce(cache.scores, y).grad, g);
    const double h = 1e-6;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      std::vector<double> analytic, numeric;
      for (Eigen::Index r = 0; r < m.layers[l].weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.layers[l].weights.cols(); ++c) {
          auto p = m, mm = m;
          p.layers[l].weights(r, c) += h;
          mm.layers[l].weights(r, c) -= h;
          numeric.push_back((loss(p) - loss(mm)) / (2 * h));
          analytic.push_back(g.weights[l](r, c));
        }
        auto p = m, mm = m;
        p.layers[l].bias(r) += h;
        mm.layers[l].bias(r) -= h;
        numeric.push_back((loss(p) - loss(mm)) / (2 * h));
        analytic.push_back(g.bias[l](r));
      }
      worst = std::max(worst, relative_error(analytic, numeric));
    }
  }
  return {worst <= 1e-5, "relu/swish/tanh, max per-layer rel err " + fmt("%.3g", worst) + " (<= 1e-5)"};
}

Outcome hybrid_reduction() {
  ev::ExperimentSettings s;
  s.train.epochs = 10;
  auto data = ev::prepare(pv::apply_profile(default_features(), pv::PrivacyProfile::table2()), s);
  const int width = static_cast<int>(data.split.train.width());
  bool ok = true;
  int checked = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto m = nn::init_mlp(nn::preset_sizes("dnn", width, s.classes()), s.activation, 0.0, seed);
    auto tc = s.train;
    tc.seed = seed;
    nn::train_mlp(m, data.split.train, tc);
    auto h = hy::make_hybrid(vq::init_vqc(4, 3, seed + 100), m, hy::FusionInit::mlp_passthrough);
    for (double& p : h.vqc.params) p += 0.37 * static_cast<double>(seed);  // the VQC must not matter

    std::vector<int> standalone;
    for (const auto& r : data.split.test.rows) standalone.push_back(nn::predict(m, r).label);
    auto fused = hy::predict_hybrid(h, data.split.test);
    auto a = ev::make_report("r", "mlp", 0, ev::confusion(data.split.test.labels, standalone), s.attack_classes(), 0,
                             seed, "");
    auto b = ev::make_report("r", "mlp", 0, ev::confusion(data.split.test.labels, fused), s.attack_classes(), 0, seed,
                             "");
    std::ostringstream oa, ob;
    ev::write_reports_csv(oa, {a});
    ev::write_reports_csv(ob, {b});
    ok = ok && fused == standalone && oa.str() == ob.str();
    for (const auto& r : data.split.test.rows)
      ok = ok && hy::fuse_forward(h, r).probabilities == nn::predict(m, r).probabilities;
    ++checked;
  }
  return {ok, std::to_string(checked) + " seeded MLPs, predictions, probabilities and metrics " +
                  (ok ? "identical" : "DIFFER")};
}

Outcome end_to_end() {
  rtlsq::config::RunConfig cfg;  // defaults: seed 42, table2 profile, hybrid_dnn
  auto s = cfg.experiment_settings(rtlsq::config::digest(cfg));
  auto table = pv::apply_profile(default_features(), cfg.privacy);
  auto data = ev::prepare(table, s);
  auto hybrid = ev::run_model(ev::ModelKind::hybrid_dnn, 4, data, "table2", s);
  auto other = ev::run_model(ev::ModelKind::hybrid_nn, 4, data, "table2", s);
  const double f1 = hybrid.aggregates.attack_f1;
  bool ok = f1 >= 0.85 && std::abs(f1 - kHybridAttackF1Baseline) <= kBaselineTolerance;
  return {ok, std::to_string(default_features().data.size()) + " windows, columns " +
                  std::to_string(table.columns.size()) + "; hybrid_dnn(4q) attack F1 " + fmt("%.10g", f1) +
                  " (>= 0.85; baseline " + fmt("%.10g", kHybridAttackF1Baseline) + "), hybrid_nn(4q) " +
                  fmt("%.10g", other.aggregates.attack_f1)};
}

Outcome privacy_invariants() {
  auto bits = [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; };
  std::vector<pv::PrivacyProfile> profiles{pv::PrivacyProfile::identity(), pv::PrivacyProfile::table2()};
  auto heavy = pv::PrivacyProfile::table2();
  heavy.deleted = {3, 4, 5, 6, 10};
  heavy.encode_residual = heavy.zone_distance = heavy.bucketize_jitter = true;
  profiles.push_back(heavy);
  auto light = pv::PrivacyProfile::identity();
  light.zone_distance = light.bucketize_jitter = light.encode_residual = light.encode_velocity = true;
  profiles.push_back(light);

  bool sa = true;
  const auto& raw = default_features();
  for (std::size_t i = 0; i < raw.data.size(); ++i)
    for (const auto& p : profiles) {
      auto out = pv::apply_profile(raw.data.rows[i], p);
      for (std::size_t c = 0; c < out.source.size(); ++c)
        if (pv::kAttackSubset.count(out.source[c]))
          sa = sa && bits(out.values[c], raw.data.rows[i][static_cast<std::size_t>(out.source[c] - 1)]);
    }

  auto t2 = pv::apply_profile(raw, pv::PrivacyProfile::table2());
  bool no_raw = true;
  for (const auto& c : t2.columns) no_raw = no_raw && c != "x4" && c != "x5" && c != "x6";

  auto p = pv::PrivacyProfile::table2();
  int unstable = 0, repeated = 0;
  for (int k = 0; k < 10000; ++k) {
    std::string id = "A" + std::to_string(k % 6);
    double t = p.hash_epoch_s * k + 0.25 * p.hash_epoch_s;
    auto tok = pv::hash_beacon_rotating(id, t, p);
    if (tok != pv::hash_beacon_rotating(id, t + 0.5 * p.hash_epoch_s, p)) ++unstable;
    if (tok == pv::hash_beacon_rotating(id, t + p.hash_epoch_s, p)) ++repeated;
  }
  bool ok = sa && no_raw && unstable == 0 && repeated == 0;
  return {ok, std::string("S_a bit-identical over ") + std::to_string(raw.data.size()) + " rows x " +
                  std::to_string(profiles.size()) + " profiles: " + (sa ? "yes" : "NO") +
                  "; no raw x4/x5/x6: " + (no_raw ? "yes" : "NO") + "; 10^4 trials unstable " +
                  std::to_string(unstable) + ", cross-epoch repeats " + std::to_string(repeated)};
}

std::string strip_time_column(const fs::path& csv) {
  std::ifstream is(csv);
  std::string line, out;
  long drop = -1;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') {
      out += line + '\n';
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (drop < 0)
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "train_time_s") drop = static_cast<long>(i);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (static_cast<long>(i) != drop) out += cells[i] + ',';
    out += '\n';
  }
  return out;
}

Outcome determinism() {
  fs::path root = fs::temp_directory_path() / ("rtlsq_acceptance_" + std::to_string(::getpid()));
  std::vector<std::string> runs;
  for (const char* name : {"a", "b"}) {
    fs::path dir = root / name;
    std::string cmd = std::string("\"") + RTLSQ_CLI_PATH + "\" bench-table2 -o \"" + dir.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      fs::remove_all(root);
      return {false, "bench-table2 failed: " + cmd};
    }
    runs.push_back(strip_time_column(dir / "table2.csv"));
  }
  fs::remove_all(root);
  long rows = std::count(runs[0].begin(), runs[0].end(), '\n');
  bool ok = !runs[0].empty() && runs[0] == runs[1];
  return {ok, "two bench-table2 runs, " + std::to_string(rows) + " lines, identical without train_time_s: " +
                  (ok ? "yes" : "NO")};
}

Outcome density_hygiene() {
  std::size_t checked = 0;
  double worst_trace = 0, worst_herm = 0, worst_eig = 0;
  bool ok = true;
  auto inspect = [&](const ComplexMatrix& m) {
    ++checked;
    if (q::check_density(m)) ok = false;
    worst_trace = std::max(worst_trace, std::abs(m.trace() - q::Complex(1.0, 0.0)));
    worst_herm = std::max(worst_herm, q::hermiticity_error(m));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
  };

  rtlsq::Rng rng = rtlsq::substream(1011, "acceptance");
  const std::vector<dq::Architecture> archs{{{1, 1}}, {{1, 2, 1}}, {{2, 2}}, {{2, 3, 2}}, {{1, 2, 2, 1}}};
  for (int i = 0; i < 60; ++i) {
    const auto& arch = archs[static_cast<std::size_t>(i) % archs.size()];
    auto net = dq::init_network(arch, 9000 + static_cast<std::uint64_t>(i));
    auto rho = i % 2 ? q::random_density(arch.input_width(), rng)
                     : DensityMatrix::from_pure(q::haar_state(arch.input_width(), rng));
    for (const auto& s : dq::feedforward(net, rho).layer_states) inspect(s.matrix());
    inspect(dq::feedforward_full_circuit(net, rho).matrix());
    int n = arch.input_width();
    if (n >= 2) inspect(q::partial_trace(rho, n, {0}).matrix());
  }

  // states along a training run
  dq::ExperimentConfig cfg;
  auto data = dq::gen_unitary_dataset(dq::target_unitary(1, 7), 5, 7);
  auto net = dq::init_network(cfg.arch, 7);
  for (int step = 0; step < 25; ++step) {
    auto dirs = dq::update_directions(net, data, 1.0);
    dq::apply_update(net, dirs.k, 0.05);
    for (const auto& p : data)
      for (const auto& s : dq::feedforward(net, DensityMatrix::from_pure(p.input)).layer_states) inspect(s.matrix());
  }

  // controlled-unitary perceptron
  for (int i = 0; i < 20; ++i) {
    std::vector<ComplexMatrix> branches;
    for (int a = 0; a < 4; ++a) branches.push_back(q::haar_unitary(2, rng));
    inspect(dq::controlled_unitary_channel(q::random_density(2, rng), branches).matrix());
  }

  ok = ok && worst_trace <= 1e-9 && worst_herm <= 1e-10 && worst_eig >= -1e-9;
  return {ok, std::to_string(checked) + " channel outputs; max |Tr-1| " + fmt("%.2g", worst_trace) + ", max herm " +
                  fmt("%.2g", worst_herm) + ", min eig " + fmt("%.2g", worst_eig)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "CP-map oracle equivalence", 60, oracle_equivalence},
      {2, "quantum gradient check", 120, quantum_gradients},
      {3, "unitary learning", 300, unitary_learning},
      {4, "corruption robustness", 600, corruption_robustness},
      {5, "metrics oracle", 5, metrics_oracle},
      {6, "classical gradient check", 30, classical_gradients},
      {7, "hybrid reduction", 900, hybrid_reduction},
      {8, "end-to-end privacy pipeline", 900, end_to_end},
      {9, "privacy invariants", 900, privacy_invariants},
      {10, "bench-table2 determinism", 900, determinism},
      {11, "density-matrix hygiene", 900, density_hygiene},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.1f s / %.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failed;
}
