// rtlsq command-line driver.
//
// Exit codes: 0 success, 1 internal error, 2 config/usage error, 3 data
// error, 4 numeric-invariant violation. Errors are a single line on stderr:
//   rtlsq: error: <kind>: <message>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlsq/config.hpp"
#include "rtlsq/dqnn.hpp"
#include "rtlsq/experiments.hpp"
#include "rtlsq/hybrid.hpp"
#include "rtlsq/privacy.hpp"
#include "rtlsq/telemetry.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rtlsq;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  long long seed = -1;
};

struct Context {
  config::RunConfig cfg;
  std::string digest;
  fs::path out;

  std::string stamp() const { return "seed=" + std::to_string(cfg.seed) + " digest=" + digest; }

  fs::path path(const fs::path& rel) const {
    fs::path p = out / rel;
    fs::create_directories(p.parent_path());
    return p;
  }

  std::ofstream open(const fs::path& rel) const {
    auto p = path(rel);
    std::ofstream os(p);
    if (!os) throw DataError("cannot write " + p.string());
    return os;
  }

  json header() const {
    json j;
    j["seed"] = cfg.seed;
    j["config_digest"] = digest;
    return j;
  }
};

Context load_context(const CommonOptions& o, const std::vector<std::string>& extra_overrides = {}) {
  json user = json::object();
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw ConfigError("cannot open config file: " + o.config_path);
    std::stringstream ss;
    ss << is.rdbuf();
    user = config::parse_json_text(ss.str(), o.config_path);
  }
  for (const auto& a : o.overrides) config::apply_override(user, a);
  for (const auto& a : extra_overrides) config::apply_override(user, a);
  if (o.seed >= 0) user["seed"] = o.seed;

  Context ctx;
  ctx.cfg = config::from_json(user);
  ctx.digest = config::digest(ctx.cfg);
  ctx.out = o.output_dir.empty() ? fs::path(config::resolve_output_dir(ctx.cfg)) : fs::path(o.output_dir);
  fs::create_directories(ctx.out);
  return ctx;
}

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("-c,--config", o.config_path, "JSON run configuration");
  sub->add_option("--set", o.overrides, "override a config key, e.g. --set training.epochs=20")->allow_extra_args(false);
  sub->add_option("-o,--output-dir", o.output_dir, "output directory (overrides config and RTLSQ_OUTPUT_DIR)");
  sub->add_option("--seed", o.seed, "global seed override");
}

std::string read_header_line(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw DataError("cannot open " + p.string());
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') return line;
  return {};
}

telemetry::FeatureTable read_features(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw DataError("cannot open feature file " + p.string());
  try {
    return telemetry::csv::load_features(is);
  } catch (const DataError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

std::vector<telemetry::TelemetrySample> read_samples(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw DataError("cannot open sample file " + p.string());
  try {
    return telemetry::csv::load_samples(is);
  } catch (const DataError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

void write_features(const Context& ctx, const fs::path& rel, const telemetry::FeatureTable& t) {
  auto os = ctx.open(rel);
  telemetry::csv::write_features(os, t,
                                 ctx.stamp() + " window_len=" + std::to_string(ctx.cfg.telemetry.window.window_len) +
                                     " stride=" + std::to_string(ctx.cfg.telemetry.window.stride));
}

void write_reports(const Context& ctx, const std::string& stem, const std::vector<eval::EvaluationReport>& reports) {
  {
    auto os = ctx.open(stem + ".csv");
    telemetry::csv::write_comment(os, ctx.stamp());
    eval::write_reports_csv(os, reports);
  }
  json j = ctx.header();
  j["config"] = config::to_json(ctx.cfg, false);
  j["privacy_profile"] = config::profile_json(ctx.cfg.privacy, false);
  j["reports"] = json::array();
  for (const auto& r : reports) {
    json row;
    row["condition"] = r.condition;
    row["model"] = r.model;
    row["qubits"] = r.qubits;
    row["accuracy"] = r.metrics.accuracy;
    row["macro_f1"] = r.aggregates.macro_f1;
    row["weighted_f1"] = r.aggregates.weighted_f1;
    row["attack_f1"] = r.aggregates.attack_f1;
    row["macro_precision"] = r.aggregates.macro_precision;
    row["macro_recall"] = r.aggregates.macro_recall;
    row["weighted_precision"] = r.aggregates.weighted_precision;
    row["weighted_recall"] = r.aggregates.weighted_recall;
    json per = json::array();
    auto names = eval::class_names(r.cm.k);
    for (std::size_t c = 0; c < r.metrics.per_class.size(); ++c) {
      const auto& m = r.metrics.per_class[c];
      per.push_back({{"class", names[c]},
                     {"precision", m.precision},
                     {"recall", m.recall},
                     {"f1", m.f1},
                     {"support", m.support},
                     {"undefined", m.precision_undefined || m.recall_undefined || m.f1_undefined}});
    }
    row["per_class"] = per;
    row["confusion"] = r.cm.counts;
    row["train_time_s"] = r.train_time_s;
    j["reports"].push_back(row);
  }
  auto os = ctx.open(stem + ".json");
  os << j.dump(2) << '\n';
}

telemetry::FeatureTable default_dataset(const Context& ctx) {
  return telemetry::featurize_runs(telemetry::generate_runs(ctx.cfg.telemetry, ctx.cfg.seed), ctx.cfg.telemetry.window,
                                   ctx.cfg.telemetry.sim.radio);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_generate(const CommonOptions& o) {
  auto ctx = load_context(o);
  auto runs = telemetry::generate_runs(ctx.cfg.telemetry, ctx.cfg.seed);
  json manifest = ctx.header();
  manifest["runs"] = json::array();
  for (const auto& run : runs) {
    const std::string file = "samples/" + run.name + ".csv";
    {
      auto os = ctx.open(file);
      telemetry::csv::write_samples(os, run.samples, ctx.stamp() + " run=" + run.name);
    }
    std::vector<std::string> affected(run.scenario.affected_beacons.begin(), run.scenario.affected_beacons.end());
    manifest["runs"].push_back({{"name", run.name},
                                {"file", file},
                                {"kind", telemetry::to_string(run.scenario.kind)},
                                {"intensity", run.scenario.intensity},
                                {"affected_beacons", affected},
                                {"start", run.scenario.start},
                                {"end", run.scenario.end}});
  }
  auto os = ctx.open("runs.json");
  os << manifest.dump(2) << '\n';
  std::cout << "generated " << runs.size() << " runs in " << ctx.out.string() << '\n';
  return 0;
}

int cmd_featurize(const CommonOptions& o, const std::string& input, int label) {
  auto ctx = load_context(o);
  fs::path in = input.empty() ? ctx.out : fs::path(input);
  if (!fs::exists(in)) throw DataError("no such input: " + in.string());
  std::vector<telemetry::Run> runs;
  if (fs::is_directory(in)) {
    std::ifstream ms(in / "runs.json");
    if (!ms) throw DataError("missing run manifest " + (in / "runs.json").string());
    json manifest;
    try {
      manifest = json::parse(ms);
      for (const auto& r : manifest.at("runs")) {
        telemetry::AttackScenario sc;
        sc.kind = telemetry::parse_attack(r.at("kind").get<std::string>());
        sc.intensity = r.at("intensity").get<double>();
        for (const auto& b : r.at("affected_beacons")) sc.affected_beacons.insert(b.get<std::string>());
        sc.start = r.at("start").get<double>();
        sc.end = r.at("end").get<double>();
        runs.push_back({r.at("name").get<std::string>(), sc, read_samples(in / r.at("file").get<std::string>())});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("run manifest: " + std::string(e.what()));
    } catch (const ConfigError& e) {
      throw DataError("run manifest: " + std::string(e.what()));
    }
  } else {
    if (label < 0 || label >= kClassCount) throw ConfigError("--label must be 0, 1 or 2 for a single sample file");
    telemetry::AttackScenario sc;
    sc.kind = static_cast<telemetry::AttackKind>(label);
    sc.start = -1e300;
    sc.end = 1e300;
    runs.push_back({in.stem().string(), sc, read_samples(in)});
  }
  auto table = telemetry::featurize_runs(runs, ctx.cfg.telemetry.window, ctx.cfg.telemetry.sim.radio);
  write_features(ctx, "features.csv", table);
  std::cout << "featurized " << table.data.size() << " windows into " << (ctx.out / "features.csv").string() << '\n';
  return 0;
}

int cmd_sanitize(const CommonOptions& o, const std::string& input) {
  auto ctx = load_context(o);
  fs::path in = input.empty() ? ctx.out / "features.csv" : fs::path(input);
  const std::string header = read_header_line(in);
  if (header.find("beacon_id") != std::string::npos) {
    auto clean = privacy::sanitize_samples(read_samples(in), ctx.cfg.privacy);
    auto os = ctx.open("samples_sanitized.csv");
    telemetry::csv::write_samples(os, clean, ctx.stamp());
    std::cout << "sanitized " << clean.size() << " samples\n";
    return 0;
  }
  auto table = privacy::apply_profile(read_features(in), ctx.cfg.privacy);
  write_features(ctx, "features_sanitized.csv", table);
  std::cout << "sanitized " << table.data.size() << " rows to " << table.columns.size() << " features\n";
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& input, const std::string& model_dir) {
  auto ctx = load_context(o);
  fs::path in = input.empty() ? ctx.out / "features.csv" : fs::path(input);
  auto table = read_features(in);
  auto s = ctx.cfg.experiment_settings(ctx.digest);
  auto data = eval::prepare(table, s);
  auto model = eval::train_model(ctx.cfg.model, s.qubits, data.split.train, s);

  fs::path dir = ctx.out / model_dir;
  fs::create_directories(dir);
  json m = ctx.header();
  m["format"] = "rtlsq-model";
  m["version"] = 1;
  m["kind"] = eval::to_string(model.kind);
  m["qubits"] = eval::is_hybrid(model.kind) ? s.qubits : 0;
  m["binary"] = s.binary;
  m["train_fraction"] = s.train_fraction;
  m["columns"] = table.columns;
  m["scaler"] = {{"lo", data.scaler.lo}, {"hi", data.scaler.hi}};
  m["train_time_s"] = model.train_time_s;
  if (model.hybrid) {
    hybrid::save_hybrid(dir, *model.hybrid, {eval::to_string(model.kind), ctx.cfg.seed, ctx.digest});
  } else {
    std::ofstream os(dir / "mlp.txt");
    mlp::save_mlp(os, *model.mlp);
  }
  std::ofstream os(dir / "model.json");
  os << m.dump(2) << '\n';
  std::cout << "trained " << eval::to_string(model.kind) << " on " << data.split.train.size() << " rows in "
            << model.train_time_s << " s\n";
  return 0;
}

int cmd_evaluate(const CommonOptions& o, const std::string& input, const std::string& model_dir) {
  auto ctx = load_context(o);
  fs::path in = input.empty() ? ctx.out / "features.csv" : fs::path(input);
  fs::path dir = ctx.out / model_dir;
  std::ifstream ms(dir / "model.json");
  if (!ms) throw DataError("missing model manifest " + (dir / "model.json").string());
  eval::TrainedModel model;
  json m;
  MinMaxScaler scaler;
  std::uint64_t seed = 0;
  bool binary = false;
  double fraction = 0.7;
  int qubits = 0;
  try {
    m = json::parse(ms);
    if (m.at("format") != "rtlsq-model") throw DataError("not an rtlsq model manifest");
    model.kind = eval::parse_model_kind(m.at("kind").get<std::string>());
    scaler.lo = m.at("scaler").at("lo").get<std::vector<double>>();
    scaler.hi = m.at("scaler").at("hi").get<std::vector<double>>();
    seed = m.at("seed").get<std::uint64_t>();
    binary = m.at("binary").get<bool>();
    fraction = m.at("train_fraction").get<double>();
    qubits = m.at("qubits").get<int>();
    model.train_time_s = m.at("train_time_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model manifest: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw DataError("model manifest: " + std::string(e.what()));
  }
  if (eval::is_hybrid(model.kind)) {
    model.hybrid = hybrid::load_hybrid(dir);
  } else {
    std::ifstream ms2(dir / "mlp.txt");
    if (!ms2) throw DataError("missing " + (dir / "mlp.txt").string());
    model.mlp = mlp::load_mlp(ms2);
  }
  auto table = read_features(in);
  if (table.columns != m["columns"].get<std::vector<std::string>>())
    throw DataError("feature columns do not match the trained model");
  LabeledSet data = binary ? binary_collapse(table.data) : table.data;
  auto split = stratified_split(data, fraction, seed);
  if (split.test.empty()) throw DataError("test split is empty");
  auto s = ctx.cfg.experiment_settings(ctx.digest);
  s.binary = binary;
  s.train.seed = seed;
  auto report = eval::evaluate(model, qubits, scaler.transform(split.test), in.stem().string(), s);
  write_reports(ctx, "report", {report});
  std::cout << "accuracy " << eval::format_number(report.metrics.accuracy) << " attack_f1 "
            << eval::format_number(report.aggregates.attack_f1) << '\n';
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& input, const std::string& kind) {
  auto ctx = load_context(o);
  auto s = ctx.cfg.experiment_settings(ctx.digest);
  auto raw = input.empty() ? default_dataset(ctx) : read_features(input);
  if (kind == "privacy") {
    if (raw.columns != telemetry::raw_feature_columns()) throw DataError("privacy sweep needs raw x1..x10 features");
    auto r = eval::privacy_tradeoff(ctx.cfg.model, raw, ctx.cfg.privacy, s);
    write_reports(ctx, "privacy_tradeoff", {r.raw, r.transformed});
    std::cout << "attack_f1 raw " << eval::format_number(r.raw.aggregates.attack_f1) << " privacy "
              << eval::format_number(r.transformed.aggregates.attack_f1) << " delta "
              << eval::format_number(r.attack_f1_delta) << '\n';
    return 0;
  }
  auto table = raw.columns == telemetry::raw_feature_columns() ? privacy::apply_profile(raw, ctx.cfg.privacy) : raw;
  auto data = eval::prepare(table, s);
  std::vector<eval::SweepRow> rows;
  if (kind == "dropout") rows = eval::dropout_sweep(ctx.cfg.model, data, ctx.cfg.dropout_rates, s);
  else if (kind == "activation")
    rows = eval::activation_sweep(ctx.cfg.model, data, ctx.cfg.activations, ctx.cfg.dropout_rates, s);
  else throw ConfigError("unknown sweep kind: " + kind);
  auto os = ctx.open("sweep_" + kind + ".csv");
  os << "# " << ctx.stamp() << '\n';
  eval::write_sweep_csv(os, rows);
  std::cout << "wrote " << rows.size() << " sweep rows\n";
  return 0;
}

int cmd_bench(const CommonOptions& o, const std::string& input) {
  auto ctx = load_context(o);
  auto s = ctx.cfg.experiment_settings(ctx.digest);
  auto raw = input.empty() ? default_dataset(ctx) : read_features(input);
  auto table = raw.columns == telemetry::raw_feature_columns() ? privacy::apply_profile(raw, ctx.cfg.privacy) : raw;
  auto rows = eval::qubit_depth_benchmark(eval::prepare(table, s), ctx.cfg.qubit_grid, s);
  write_reports(ctx, "table2", rows);
  for (const auto& r : rows)
    std::cout << r.model << " q=" << r.qubits << " accuracy " << eval::format_number(r.metrics.accuracy)
              << " attack_f1 " << eval::format_number(r.aggregates.attack_f1) << '\n';
  return 0;
}

int cmd_qnn(const CommonOptions& o, const std::string& arch, long long pairs, long long steps, const std::string& mode) {
  std::vector<std::string> extra;
  if (!arch.empty()) extra.push_back("experiments.qnn.arch=[" + arch + "]");
  if (pairs >= 0) extra.push_back("experiments.qnn.pairs=" + std::to_string(pairs));
  if (steps >= 0) extra.push_back("experiments.qnn.steps=" + std::to_string(steps));
  auto ctx = load_context(o, extra);
  const auto& q = ctx.cfg.qnn;
  dqnn::ExperimentConfig ec{dqnn::Architecture{q.arch}, ctx.cfg.seed, {q.steps, q.eps, q.eta, 1}};
  if (ec.arch.input_width() != ec.arch.output_width())
    throw ConfigError("experiments.qnn.arch: unitary learning needs equal input and output widths");

  if (mode == "generalization" || mode == "robustness") {
    std::vector<dqnn::CurveRow> rows;
    if (mode == "generalization")
      rows = dqnn::generalization_experiment(ec, {q.pair_grid.begin(), q.pair_grid.end()},
                                             static_cast<std::size_t>(q.eval_pairs));
    else
      rows = dqnn::robustness_experiment(ec, static_cast<std::size_t>(q.pairs),
                                         {q.corrupt_grid.begin(), q.corrupt_grid.end()});
    auto os = ctx.open("qnn_" + mode + ".csv");
    os << "# " << ctx.stamp() << " arch=" << dqnn::to_string(ec.arch) << '\n';
    dqnn::write_curve_csv(os, rows, mode == "generalization" ? "pairs" : "corrupted");
    std::cout << "wrote " << rows.size() << " rows\n";
    return 0;
  }
  if (mode != "train") throw ConfigError("unknown qnn mode: " + mode);
  auto v = dqnn::target_unitary(ec.arch.input_width(), ec.seed);
  auto train_set = dqnn::gen_unitary_dataset(v, static_cast<std::size_t>(q.pairs), ec.seed);
  auto result = dqnn::train(dqnn::init_network(ec.arch, ec.seed), train_set, ec.train);
  auto held_out = dqnn::gen_unitary_dataset(v, static_cast<std::size_t>(q.eval_pairs), splitmix64(ec.seed ^ 0xe7a1ULL));
  const double test_cost = dqnn::cost(result.network, held_out);
  {
    auto os = ctx.open("qnn_trajectory.csv");
    os.precision(17);
    os << "# " << ctx.stamp() << " arch=" << dqnn::to_string(ec.arch) << " pairs=" << q.pairs << '\n';
    os << "step,cost\n";
    for (const auto& p : result.trajectory) os << p.step << ',' << p.cost << '\n';
  }
  json summary = ctx.header();
  summary["arch"] = q.arch;
  summary["pairs"] = q.pairs;
  summary["steps"] = q.steps;
  summary["eps"] = q.eps;
  summary["eta"] = q.eta;
  summary["final_cost"] = result.final_cost;
  summary["held_out_cost"] = test_cost;
  auto os = ctx.open("qnn_summary.json");
  os << summary.dump(2) << '\n';
  std::cout << "final_cost " << eval::format_number(result.final_cost) << " held_out_cost "
            << eval::format_number(test_cost) << '\n';
  return 0;
}

int fail(int code, const std::string& kind, const std::string& msg) {
  std::string line = msg;
  for (char& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "rtlsq: error: " << kind << ": " << line << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid quantum-classical attack detection for RTLS telemetry"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string input, model_dir = "model", sweep_kind = "activation", arch, qnn_mode = "train";
  int label = -1;
  long long pairs = -1, steps = -1;

  auto* generate = app.add_subcommand("generate", "simulate RTLS runs into per-run sample CSVs");
  auto* featurize = app.add_subcommand("featurize", "window sample CSVs into the 10-feature table");
  auto* sanitize = app.add_subcommand("sanitize", "apply the configured privacy profile");
  auto* train = app.add_subcommand("train", "train the configured model on a feature CSV");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a trained model on the held-out split");
  auto* sweep = app.add_subcommand("sweep", "dropout / activation / privacy sweeps");
  auto* bench = app.add_subcommand("bench-table2", "qubit benchmark under the privacy profile");
  auto* qnn = app.add_subcommand("qnn-learn-unitary", "train a perceptron DQNN on a random unitary");
  for (auto* sub : {generate, featurize, sanitize, train, evaluate, sweep, bench, qnn}) add_common(sub, common);
  for (auto* sub : {featurize, sanitize, train, evaluate, sweep, bench})
    sub->add_option("-i,--input", input, "input file or directory");
  featurize->add_option("--label", label, "label for a single external sample CSV (0 Normal, 1 DoS, 2 Spoof)");
  for (auto* sub : {train, evaluate}) sub->add_option("--model-dir", model_dir, "model directory under the output dir");
  sweep->add_option("--kind", sweep_kind, "dropout | activation | privacy");
  qnn->add_option("--arch", arch, "comma-separated layer widths, e.g. 1,2,1");
  qnn->add_option("--pairs", pairs, "training pairs");
  qnn->add_option("--steps", steps, "training steps");
  qnn->add_option("--mode", qnn_mode, "train | generalization | robustness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (*generate) return cmd_generate(common);
    if (*featurize) return cmd_featurize(common, input, label);
    if (*sanitize) return cmd_sanitize(common, input);
    if (*train) return cmd_train(common, input, model_dir);
    if (*evaluate) return cmd_evaluate(common, input, model_dir);
    if (*sweep) return cmd_sweep(common, input, sweep_kind);
    if (*bench) return cmd_bench(common, input);
    if (*qnn) return cmd_qnn(common, arch, pairs, steps, qnn_mode);
  } catch (const ConfigError& e) {
    return fail(2, "config", e.what());
  } catch (const ArgumentError& e) {
    return fail(2, "argument", e.what());
  } catch (const DataError& e) {
    return fail(3, "data", e.what());
  } catch (const NumericError& e) {
    return fail(4, "numeric", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(3, "data", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
  return fail(2, "usage", "no subcommand");
}
