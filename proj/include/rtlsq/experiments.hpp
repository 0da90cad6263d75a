#ifndef RTLSQ_EXPERIMENTS_HPP
#define RTLSQ_EXPERIMENTS_HPP

// Seeded train/evaluate drivers: single model runs, the privacy trade-off,
// dropout/activation sweeps and the qubit benchmark table.

#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rtlsq/data.hpp"
#include "rtlsq/hybrid.hpp"
#include "rtlsq/metrics.hpp"
#include "rtlsq/mlp.hpp"
#include "rtlsq/privacy.hpp"
#include "rtlsq/telemetry.hpp"
#include "rtlsq/vqc.hpp"

namespace rtlsq::eval {

enum class ModelKind { nn, dnn, dnn_shallow, hybrid_nn, hybrid_dnn };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::nn: return "nn";
    case ModelKind::dnn: return "dnn";
    case ModelKind::dnn_shallow: return "dnn_shallow";
    case ModelKind::hybrid_nn: return "hybrid_nn";
    case ModelKind::hybrid_dnn: return "hybrid_dnn";
  }
  return "nn";
}

inline ModelKind parse_model_kind(const std::string& s) {
  for (auto k : {ModelKind::nn, ModelKind::dnn, ModelKind::dnn_shallow, ModelKind::hybrid_nn, ModelKind::hybrid_dnn})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown model kind: " + s);
}

inline bool is_hybrid(ModelKind k) { return k == ModelKind::hybrid_nn || k == ModelKind::hybrid_dnn; }

// Dense tier behind each kind; hybrids reuse nn / dnn.
inline std::string mlp_preset(ModelKind k) {
  switch (k) {
    case ModelKind::dnn:
    case ModelKind::hybrid_dnn: return "dnn";
    case ModelKind::dnn_shallow: return "dnn_shallow";
    default: return "nn";
  }
}

struct ExperimentSettings {
  mlp::Activation activation = mlp::Activation::relu;
  double dropout = 0.0;
  mlp::TrainConfig train{};
  int shallow_epochs = 15;
  int qubits = 4;
  int depth = 3;
  vqc::Encoding encoding = vqc::Encoding::angle;
  vqc::Entanglement entanglement = vqc::Entanglement::ring;
  hybrid::HybridTrainConfig hybrid{};  // its mlp field is overwritten by `train`
  bool binary = false;
  double train_fraction = 0.7;
  std::string config_hash;

  std::uint64_t seed() const { return train.seed; }
  int classes() const { return binary ? 2 : kClassCount; }
  std::set<int> attack_classes() const { return binary ? std::set<int>{1} : default_attack_classes(kClassCount); }
};

struct PreparedData {
  Split split;  // min-max scaled with training statistics
  std::vector<std::string> columns;
  MinMaxScaler scaler;
};

inline PreparedData prepare(const telemetry::FeatureTable& table, const ExperimentSettings& s) {
  table.data.validate();
  LabeledSet data = s.binary ? binary_collapse(table.data) : table.data;
  Split raw = stratified_split(data, s.train_fraction, s.seed());
  if (raw.train.empty()) throw DataError("prepare: training split is empty");
  if (raw.test.empty()) throw DataError("prepare: test split is empty");
  auto scaler = MinMaxScaler::fit(raw.train);
  return {{scaler.transform(raw.train), scaler.transform(raw.test)}, table.columns, scaler};
}

struct TrainedModel {
  ModelKind kind = ModelKind::nn;
  std::optional<mlp::MlpModel> mlp;
  std::optional<hybrid::HybridModel> hybrid;
  double train_time_s = 0.0;

  std::vector<int> predict(const LabeledSet& data) const {
    if (hybrid) return hybrid::predict_hybrid(*hybrid, data);
    std::vector<int> out;
    for (const auto& r : data.rows) out.push_back(mlp::predict(*mlp, r).label);
    return out;
  }
};

/// Trains one model on the prepared training split; the wall clock covers
/// the training call only.
inline TrainedModel train_model(ModelKind kind, int qubits, const LabeledSet& train, const ExperimentSettings& s) {
  const int width = static_cast<int>(train.width());
  auto sizes = mlp::preset_sizes(mlp_preset(kind), width, s.classes());
  auto m = mlp::init_mlp(sizes, s.activation, s.dropout, s.seed());
  mlp::TrainConfig tc = s.train;
  if (kind == ModelKind::dnn_shallow) tc.epochs = s.shallow_epochs;

  TrainedModel out;
  out.kind = kind;
  const auto t0 = std::chrono::steady_clock::now();
  if (is_hybrid(kind)) {
    require(qubits >= 1, "hybrid models need at least one qubit");
    auto h = hybrid::make_hybrid(vqc::init_vqc(qubits, s.depth, s.seed(), s.encoding, s.entanglement), std::move(m),
                                 s.hybrid.fusion_init);
    auto hc = s.hybrid;
    hc.mlp = tc;
    hybrid::train_hybrid(h, train, hc);
    out.hybrid = std::move(h);
  } else {
    mlp::train_mlp(m, train, tc);
    out.mlp = std::move(m);
  }
  out.train_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline EvaluationReport evaluate(const TrainedModel& model, int qubits, const LabeledSet& test,
                                 const std::string& condition, const ExperimentSettings& s) {
  auto cm = confusion(test.labels, model.predict(test), s.classes());
  return make_report(condition, to_string(model.kind), is_hybrid(model.kind) ? qubits : 0, cm, s.attack_classes(),
                     model.train_time_s, s.seed(), s.config_hash);
}

inline EvaluationReport run_model(ModelKind kind, int qubits, const PreparedData& data, const std::string& condition,
                                  const ExperimentSettings& s) {
  return evaluate(train_model(kind, qubits, data.split.train, s), qubits, data.split.test, condition, s);
}

struct TradeoffResult {
  EvaluationReport raw;
  EvaluationReport transformed;
  double attack_f1_delta = 0.0;  // transformed - raw
};

/// Two independent seeded instances, raw width vs profiled width, evaluated
/// on the same row split.
inline TradeoffResult privacy_tradeoff(ModelKind kind, const telemetry::FeatureTable& raw,
                                       const privacy::PrivacyProfile& profile, const ExperimentSettings& s) {
  auto raw_data = prepare(raw, s);
  auto sanitized = prepare(privacy::apply_profile(raw, profile), s);
  auto a = run_model(kind, s.qubits, raw_data, "raw", s);
  auto b = run_model(kind, s.qubits, sanitized, "privacy", s);
  return {a, b, b.aggregates.attack_f1 - a.aggregates.attack_f1};
}

struct SweepRow {
  std::string activation;
  double dropout = 0.0;
  EvaluationReport report;
};

inline std::vector<SweepRow> dropout_sweep(ModelKind kind, const PreparedData& data, const std::vector<double>& rates,
                                           const ExperimentSettings& s) {
  std::vector<SweepRow> rows;
  for (double r : rates) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
    auto local = s;
    local.dropout = r;
    rows.push_back({mlp::to_string(s.activation), r,
                    run_model(kind, s.qubits, data, "dropout=" + format_number(r), local)});
  }
  return rows;
}

inline std::vector<SweepRow> activation_sweep(ModelKind kind, const PreparedData& data,
                                              const std::vector<mlp::Activation>& activations,
                                              const std::vector<double>& rates, const ExperimentSettings& s) {
  if (activations.empty() || rates.empty()) throw ConfigError("activation sweep needs nonempty grids");
  std::vector<SweepRow> rows;
  for (auto a : activations) {
    auto local = s;
    local.activation = a;
    for (auto& row : dropout_sweep(kind, data, rates, local)) {
      row.report.condition = mlp::to_string(a) + "/" + row.report.condition;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Radar/plot data: one line per (activation, dropout).
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "model,activation,dropout,accuracy,macro_f1,weighted_f1,attack_f1,train_time_s,seed,config_hash\n";
  for (const auto& r : rows)
    os << r.report.model << ',' << r.activation << ',' << format_number(r.dropout) << ','
       << format_number(r.report.metrics.accuracy) << ',' << format_number(r.report.aggregates.macro_f1) << ','
       << format_number(r.report.aggregates.weighted_f1) << ',' << format_number(r.report.aggregates.attack_f1)
       << ',' << format_number(r.report.train_time_s) << ',' << r.report.seed << ',' << r.report.config_hash << '\n';
}

/// Classical rows (qubits 0) followed by each hybrid at every qubit count.
inline std::vector<EvaluationReport> qubit_depth_benchmark(const PreparedData& data, const std::vector<int>& qubit_grid,
                                                           const ExperimentSettings& s,
                                                           const std::string& condition = "table2") {
  if (qubit_grid.empty()) throw ConfigError("qubit grid is empty");
  std::vector<EvaluationReport> rows;
  for (auto k : {ModelKind::nn, ModelKind::dnn, ModelKind::dnn_shallow}) rows.push_back(run_model(k, 0, data, condition, s));
  for (auto k : {ModelKind::hybrid_nn, ModelKind::hybrid_dnn})
    for (int q : qubit_grid) rows.push_back(run_model(k, q, data, condition, s));
  return rows;
}

}  // namespace rtlsq::eval

#endif  // RTLSQ_EXPERIMENTS_HPP
