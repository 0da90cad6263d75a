// Smallest end-to-end use of the library: simulate telemetry, apply the
// default privacy profile, train the 4-qubit hybrid and print its metrics.

#include <iostream>

#include "rtlsq/experiments.hpp"
#include "rtlsq/privacy.hpp"
#include "rtlsq/telemetry.hpp"

int main() {
  namespace tel = rtlsq::telemetry;
  namespace ev = rtlsq::eval;

  auto cfg = tel::DatasetConfig::defaults();
  cfg.repetitions = 4;  // keep it quick
  auto table = tel::featurize_runs(tel::generate_runs(cfg, 42), cfg.window);
  auto sanitized = rtlsq::privacy::apply_profile(table, rtlsq::privacy::PrivacyProfile::table2());

  ev::ExperimentSettings s;
  auto data = ev::prepare(sanitized, s);
  auto report = ev::run_model(ev::ModelKind::hybrid_dnn, 4, data, "quickstart", s);

  std::cout << table.data.size() << " windows, " << sanitized.columns.size() << " features after sanitizing\n";
  std::cout << "accuracy " << report.metrics.accuracy << ", attack F1 " << report.aggregates.attack_f1 << '\n';
  auto names = ev::class_names(report.cm.k);
  for (std::size_t c = 0; c < names.size(); ++c)
    std::cout << "  " << names[c] << ": f1 " << report.metrics.per_class[c].f1 << " (support "
              << report.metrics.per_class[c].support << ")\n";
}
