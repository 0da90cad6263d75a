#ifndef RTLSQ_METRICS_HPP
#define RTLSQ_METRICS_HPP

// Confusion matrices, one-vs-rest precision/recall/F1 and the macro,
// weighted and attack-class aggregates.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rtlsq/data.hpp"
#include "rtlsq/error.hpp"

namespace rtlsq::eval {

struct ConfusionMatrix {
  int k = 0;
  std::vector<std::vector<std::int64_t>> counts;  // [true][predicted]

  explicit ConfusionMatrix(int classes = kClassCount)
      : k(classes), counts(static_cast<std::size_t>(classes), std::vector<std::int64_t>(static_cast<std::size_t>(classes), 0)) {
    require(classes >= 1, "confusion matrix needs at least one class");
  }

  std::int64_t at(int t, int p) const { return counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]; }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (const auto& r : counts)
      for (auto c : r) s += c;
    return s;
  }
  std::int64_t support(int c) const {
    std::int64_t s = 0;
    for (auto v : counts[static_cast<std::size_t>(c)]) s += v;
    return s;
  }
  std::int64_t predicted(int c) const {
    std::int64_t s = 0;
    for (const auto& r : counts) s += r[static_cast<std::size_t>(c)];
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred, int k = kClassCount) {
  if (truth.size() != pred.size())
    throw ArgumentError("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                        std::to_string(pred.size()) + " predictions");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || pred[i] < 0 || pred[i] >= k)
      throw ArgumentError("confusion: label out of range at index " + std::to_string(i));
    ++cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }
  return cm;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  // Set when the corresponding ratio had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
};

inline Metrics class_metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw ArgumentError("class_metrics: empty confusion matrix");
  Metrics m;
  std::int64_t diag = 0;
  for (int c = 0; c < cm.k; ++c) {
    const auto tp = cm.at(c, c);
    diag += tp;
    const auto pred = cm.predicted(c);
    const auto sup = cm.support(c);
    ClassMetrics r;
    r.support = sup;
    if (pred > 0) r.precision = static_cast<double>(tp) / static_cast<double>(pred);
    else r.precision_undefined = true;
    if (sup > 0) r.recall = static_cast<double>(tp) / static_cast<double>(sup);
    else r.recall_undefined = true;
    if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else r.f1_undefined = true;
    m.per_class.push_back(r);
  }
  m.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  return m;
}

struct Aggregates {
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double attack_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
};

inline std::set<int> default_attack_classes(int k) {
  std::set<int> a;
  for (int c = 1; c < k; ++c) a.insert(c);
  return a;
}

/// Macro = plain mean over classes, weighted = support-weighted mean, attack =
/// support-weighted mean over the attack classes (plain mean if none occur).
inline Aggregates aggregate_f1(const ConfusionMatrix& cm, const std::set<int>& attack_classes) {
  if (attack_classes.empty()) throw ArgumentError("aggregate_f1: attack class set is empty");
  for (int c : attack_classes)
    if (c < 0 || c >= cm.k) throw ArgumentError("aggregate_f1: attack class out of range");
  const auto m = class_metrics(cm);
  const double k = static_cast<double>(cm.k);
  const double total = static_cast<double>(cm.total());
  Aggregates a;
  for (const auto& c : m.per_class) {
    const double w = static_cast<double>(c.support) / total;
    a.macro_f1 += c.f1 / k;
    a.macro_precision += c.precision / k;
    a.macro_recall += c.recall / k;
    a.weighted_f1 += w * c.f1;
    a.weighted_precision += w * c.precision;
    a.weighted_recall += w * c.recall;
  }
  double attack_support = 0.0, attack_sum = 0.0, plain = 0.0;
  for (int c : attack_classes) {
    const auto& r = m.per_class[static_cast<std::size_t>(c)];
    attack_support += static_cast<double>(r.support);
    attack_sum += static_cast<double>(r.support) * r.f1;
    plain += r.f1;
  }
  if (attack_classes.size() == 1) a.attack_f1 = plain;
  else if (attack_support > 0.0) a.attack_f1 = attack_sum / attack_support;
  else a.attack_f1 = plain / static_cast<double>(attack_classes.size());
  return a;
}

inline Aggregates aggregate_f1(const ConfusionMatrix& cm) { return aggregate_f1(cm, default_attack_classes(cm.k)); }

// ---------------------------------------------------------------------------
// Reports

struct EvaluationReport {
  std::string condition;
  std::string model;
  int qubits = 0;
  Metrics metrics;
  Aggregates aggregates;
  ConfusionMatrix cm;
  double train_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

inline EvaluationReport make_report(std::string condition, std::string model, int qubits, const ConfusionMatrix& cm,
                                    const std::set<int>& attack_classes, double train_time_s, std::uint64_t seed,
                                    std::string config_hash) {
  return {std::move(condition), std::move(model), qubits, class_metrics(cm), aggregate_f1(cm, attack_classes),
          cm, train_time_s, seed, std::move(config_hash)};
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::vector<std::string> class_names(int k) {
  if (k == kClassCount) return kClassNames;
  if (k == 2) return {"Normal", "Attack"};
  std::vector<std::string> out;
  for (int c = 0; c < k; ++c) out.push_back("class" + std::to_string(c));
  return out;
}

/// CSV, one row per report; train_time_s is the only wall-clock column.
inline void write_reports_csv(std::ostream& os, const std::vector<EvaluationReport>& reports) {
  const int k = reports.empty() ? kClassCount : reports.front().cm.k;
  os << "condition,model,qubits,accuracy,precision_macro,recall_macro,f1_macro,precision_weighted,"
        "recall_weighted,f1_weighted,attack_f1";
  for (const auto& n : class_names(k)) os << ",precision_" << n << ",recall_" << n << ",f1_" << n << ",support_" << n;
  os << ",train_time_s,seed,config_hash\n";
  for (const auto& r : reports) {
    const auto& a = r.aggregates;
    os << r.condition << ',' << r.model << ',' << r.qubits << ',' << format_number(r.metrics.accuracy) << ','
       << format_number(a.macro_precision) << ',' << format_number(a.macro_recall) << ','
       << format_number(a.macro_f1) << ',' << format_number(a.weighted_precision) << ','
       << format_number(a.weighted_recall) << ',' << format_number(a.weighted_f1) << ','
       << format_number(a.attack_f1);
    for (const auto& c : r.metrics.per_class)
      os << ',' << format_number(c.precision) << ',' << format_number(c.recall) << ',' << format_number(c.f1) << ','
         << c.support;
    os << ',' << format_number(r.train_time_s) << ',' << r.seed << ',' << r.config_hash << '\n';
  }
}

}  // namespace rtlsq::eval

#endif  // RTLSQ_METRICS_HPP
