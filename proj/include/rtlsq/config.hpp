#ifndef RTLSQ_CONFIG_HPP
#define RTLSQ_CONFIG_HPP

// Run configuration: a versioned JSON document with nested sections. User
// files are merged over the built-in defaults; unknown keys and bad types
// are rejected with the offending "section.key" path.

#include <sodium.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtlsq/dqnn.hpp"
#include "rtlsq/error.hpp"
#include "rtlsq/experiments.hpp"
#include "rtlsq/privacy.hpp"
#include "rtlsq/telemetry.hpp"

namespace rtlsq::config {

using json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kOutputDirEnv = "RTLSQ_OUTPUT_DIR";

struct QnnSettings {
  std::vector<int> arch{1, 2, 1};
  int pairs = 10;
  int eval_pairs = 10;
  int steps = 1000;
  double eps = 0.01;
  double eta = 1.0;
  std::vector<int> pair_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> corrupt_grid{0, 1, 2, 3, 4, 5, 6, 7, 8};
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::string output_dir = "rtlsq_out";
  telemetry::DatasetConfig telemetry = telemetry::DatasetConfig::defaults();
  privacy::PrivacyProfile privacy = privacy::PrivacyProfile::table2();
  eval::ModelKind model = eval::ModelKind::hybrid_dnn;
  eval::ExperimentSettings settings{};
  std::vector<double> dropout_rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<mlp::Activation> activations{mlp::Activation::relu, mlp::Activation::swish, mlp::Activation::tanh};
  std::vector<int> qubit_grid{2, 4, 6};
  QnnSettings qnn{};

  // Settings with the global seed and digest filled in.
  eval::ExperimentSettings experiment_settings(const std::string& digest) const {
    auto s = settings;
    s.train.seed = seed;
    s.config_hash = digest;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Serialization

inline json point_json(telemetry::Point p) { return json::array({p.x, p.y}); }

inline json profile_json(const privacy::PrivacyProfile& p, bool include_key) {
  json j;
  j["deleted"] = std::vector<int>(p.deleted.begin(), p.deleted.end());
  j["encode_velocity"] = p.encode_velocity;
  j["encode_residual"] = p.encode_residual;
  j["zone_distance"] = p.zone_distance;
  j["bucketize_jitter"] = p.bucketize_jitter;
  j["zone_cell_m"] = p.zone_cell_m;
  j["hash_epoch_s"] = p.hash_epoch_s;
  j["velocity_thresholds"] = json::array({p.velocity_thresholds.first, p.velocity_thresholds.second});
  j["time_bucket_s"] = p.time_bucket_s;
  j["jitter_quantum_s2"] = p.jitter_quantum_s2;
  j["velocity_encoding"] = json::array({0.0, 0.5, 1.0});
  j["hash_key"] = include_key ? p.hash_key : std::string("<redacted>");
  return j;
}

inline json to_json(const RunConfig& c, bool include_key = true) {
  const auto& t = c.telemetry;
  const auto& s = c.settings;
  json j;
  j["version"] = kConfigVersion;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;

  json tel;
  tel["repetitions"] = t.repetitions;
  tel["duration_s"] = t.sim.duration_s;
  tel["sample_rate_hz"] = t.sim.sample_rate_hz;
  tel["attack_start_s"] = t.attack_start_s;
  tel["dos_intensity_min"] = t.dos_intensity_min;
  tel["spoof_intensity_min"] = t.spoof_intensity_min;
  tel["window_len"] = t.window.window_len;
  tel["stride"] = t.window.stride;
  tel["radio"] = {{"path_loss_exponent", t.sim.radio.path_loss_exponent},
                  {"calibration_dbm", t.sim.radio.calibration_dbm},
                  {"range_mode", telemetry::to_string(t.sim.radio.range_mode)}};
  tel["noise"] = {{"rssi_sigma", t.sim.noise.rssi_sigma},
                  {"position_sigma", t.sim.noise.position_sigma},
                  {"odometry_sigma", t.sim.noise.odometry_sigma},
                  {"timestamp_sigma", t.sim.noise.timestamp_sigma},
                  {"base_drop_rate", t.sim.noise.base_drop_rate}};
  tel["attacks"] = {{"dos_rssi_sigma", t.sim.dos_rssi_sigma},
                    {"dos_delay_sigma", t.sim.dos_delay_sigma},
                    {"spoof_rssi_dbm", t.sim.spoof_rssi_dbm},
                    {"spoof_rssi_sigma", t.sim.spoof_rssi_sigma},
                    {"spoof_bias_m", t.sim.spoof_bias_m},
                    {"spoof_bias_period_s", t.sim.spoof_bias_period_s},
                    {"phantom_id", t.sim.phantom_id}};
  tel["layout"] = json::array();
  for (const auto& a : t.layout) tel["layout"].push_back({{"id", a.id}, {"pos", point_json(a.pos)}});
  tel["trajectories"] = json::array();
  for (const auto& tr : t.trajectories) {
    json w = json::array();
    for (auto p : tr.waypoints) w.push_back(point_json(p));
    tel["trajectories"].push_back({{"waypoints", w}, {"speed", tr.speed}});
  }
  j["telemetry"] = tel;
  j["privacy"] = profile_json(c.privacy, include_key);

  j["model"] = {{"kind", eval::to_string(c.model)},
                {"activation", mlp::to_string(s.activation)},
                {"dropout", s.dropout},
                {"qubits", s.qubits},
                {"depth", s.depth},
                {"encoding", vqc::to_string(s.encoding)},
                {"entanglement", vqc::to_string(s.entanglement)},
                {"fusion", hybrid::to_string(s.hybrid.fusion_init)}};
  j["training"] = {{"epochs", s.train.epochs},
                   {"batch_size", s.train.batch_size},
                   {"learning_rate", s.train.learning_rate},
                   {"momentum", s.train.momentum},
                   {"shallow_epochs", s.shallow_epochs},
                   {"vqc_epochs", s.hybrid.vqc_epochs},
                   {"vqc_learning_rate", s.hybrid.vqc_learning_rate},
                   {"fusion_epochs", s.hybrid.fusion_epochs},
                   {"fusion_learning_rate", s.hybrid.fusion_learning_rate},
                   {"fine_tune_epochs", s.hybrid.fine_tune_epochs},
                   {"fine_tune_learning_rate", s.hybrid.fine_tune_learning_rate},
                   {"train_fraction", s.train_fraction},
                   {"binary", s.binary}};
  json acts = json::array();
  for (auto a : c.activations) acts.push_back(mlp::to_string(a));
  j["experiments"] = {{"dropout_rates", c.dropout_rates},
                      {"activations", acts},
                      {"qubit_grid", c.qubit_grid},
                      {"qnn",
                       {{"arch", c.qnn.arch},
                        {"pairs", c.qnn.pairs},
                        {"eval_pairs", c.qnn.eval_pairs},
                        {"steps", c.qnn.steps},
                        {"eps", c.qnn.eps},
                        {"eta", c.qnn.eta},
                        {"pair_grid", c.qnn.pair_grid},
                        {"corrupt_grid", c.qnn.corrupt_grid}}}};
  return j;
}

namespace detail {

// Every user key must exist in the defaults; arrays are taken wholesale.
inline void check_known(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError(key + ": unknown key");
    const auto& d = defaults[it.key()];
    if (d.is_object()) check_known(it.value(), d, key);
  }
}

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  template <typename T>
  T get(const std::string& path) const {
    const json* node = &root_;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) node = &node->at(part);
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!node->is_number_integer()) throw ConfigError(path + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (node->is_number_integer() && !node->is_number_unsigned() && node->get<long long>() < 0)
            throw ConfigError(path + ": expected a non-negative integer");
      }
      if constexpr (std::is_floating_point_v<T>)
        if (!node->is_number()) throw ConfigError(path + ": expected a number");
      return node->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }

 private:
  const json& root_;
};

inline telemetry::Point read_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(path + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename E, typename F>
E parse_enum(F&& parse, const std::string& value, const std::string& path) {
  try {
    return parse(value);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

inline RunConfig from_json(const json& user) {
  const json defaults = to_json(RunConfig{});
  detail::check_known(user, defaults, "");
  json merged = defaults;
  merged.merge_patch(user);
  detail::Reader r(merged);

  if (r.get<int>("version") != kConfigVersion)
    throw ConfigError("version: unsupported config version " + merged["version"].dump());
  RunConfig c;
  c.seed = r.get<std::uint64_t>("seed");
  c.output_dir = r.get<std::string>("output_dir");

  auto& t = c.telemetry;
  t.repetitions = r.get<int>("telemetry.repetitions");
  t.sim.duration_s = r.get<double>("telemetry.duration_s");
  t.sim.sample_rate_hz = r.get<double>("telemetry.sample_rate_hz");
  t.attack_start_s = r.get<double>("telemetry.attack_start_s");
  t.dos_intensity_min = r.get<double>("telemetry.dos_intensity_min");
  t.spoof_intensity_min = r.get<double>("telemetry.spoof_intensity_min");
  t.window.window_len = r.get<std::size_t>("telemetry.window_len");
  t.window.stride = r.get<std::size_t>("telemetry.stride");
  t.sim.radio.path_loss_exponent = r.get<double>("telemetry.radio.path_loss_exponent");
  t.sim.radio.calibration_dbm = r.get<double>("telemetry.radio.calibration_dbm");
  t.sim.radio.range_mode = detail::parse_enum<telemetry::RangeMode>(telemetry::parse_range_mode,
                                                                   r.get<std::string>("telemetry.radio.range_mode"),
                                                                   "telemetry.radio.range_mode");
  t.sim.noise.rssi_sigma = r.get<double>("telemetry.noise.rssi_sigma");
  t.sim.noise.position_sigma = r.get<double>("telemetry.noise.position_sigma");
  t.sim.noise.odometry_sigma = r.get<double>("telemetry.noise.odometry_sigma");
  t.sim.noise.timestamp_sigma = r.get<double>("telemetry.noise.timestamp_sigma");
  t.sim.noise.base_drop_rate = r.get<double>("telemetry.noise.base_drop_rate");
  t.sim.dos_rssi_sigma = r.get<double>("telemetry.attacks.dos_rssi_sigma");
  t.sim.dos_delay_sigma = r.get<double>("telemetry.attacks.dos_delay_sigma");
  t.sim.spoof_rssi_dbm = r.get<double>("telemetry.attacks.spoof_rssi_dbm");
  t.sim.spoof_rssi_sigma = r.get<double>("telemetry.attacks.spoof_rssi_sigma");
  t.sim.spoof_bias_m = r.get<double>("telemetry.attacks.spoof_bias_m");
  t.sim.spoof_bias_period_s = r.get<double>("telemetry.attacks.spoof_bias_period_s");
  t.sim.phantom_id = r.get<std::string>("telemetry.attacks.phantom_id");

  t.layout.clear();
  const auto& layout = merged["telemetry"]["layout"];
  if (!layout.is_array()) throw ConfigError("telemetry.layout: expected an array");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const std::string path = "telemetry.layout[" + std::to_string(i) + "]";
    if (!layout[i].is_object() || !layout[i].contains("id") || !layout[i]["id"].is_string() || !layout[i].contains("pos"))
      throw ConfigError(path + ": expected {\"id\": string, \"pos\": [x, y]}");
    t.layout.push_back({layout[i]["id"].get<std::string>(), detail::read_point(layout[i]["pos"], path + ".pos")});
  }
  if (t.layout.size() < 3) throw ConfigError("telemetry.layout: at least 3 anchors required");
  t.trajectories.clear();
  const auto& trajs = merged["telemetry"]["trajectories"];
  if (!trajs.is_array() || trajs.empty()) throw ConfigError("telemetry.trajectories: expected a nonempty array");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string path = "telemetry.trajectories[" + std::to_string(i) + "]";
    const auto& tj = trajs[i];
    if (!tj.is_object() || !tj.contains("waypoints") || !tj["waypoints"].is_array() || tj["waypoints"].empty() ||
        !tj.contains("speed") || !tj["speed"].is_number())
      throw ConfigError(path + ": expected {\"waypoints\": [[x, y], ...], \"speed\": number}");
    telemetry::Trajectory tr;
    for (std::size_t k = 0; k < tj["waypoints"].size(); ++k)
      tr.waypoints.push_back(detail::read_point(tj["waypoints"][k], path + ".waypoints[" + std::to_string(k) + "]"));
    tr.speed = tj["speed"].get<double>();
    t.trajectories.push_back(std::move(tr));
  }
  if (t.repetitions < 1) throw ConfigError("telemetry.repetitions: must be at least 1");
  if (t.window.window_len < 2) throw ConfigError("telemetry.window_len: must be at least 2");
  if (t.window.stride < 1) throw ConfigError("telemetry.stride: must be at least 1");
  if (!(t.sim.duration_s > 0)) throw ConfigError("telemetry.duration_s: must be positive");
  if (!(t.sim.sample_rate_hz > 0)) throw ConfigError("telemetry.sample_rate_hz: must be positive");
  if (!(t.attack_start_s < t.sim.duration_s)) throw ConfigError("telemetry.attack_start_s: must precede the run end");
  for (double v : {t.dos_intensity_min, t.spoof_intensity_min})
    if (!(v >= 0 && v <= 1)) throw ConfigError("telemetry: intensity minimum must be in [0, 1]");

  auto& p = c.privacy;
  p.deleted.clear();
  const auto& del = merged["privacy"]["deleted"];
  if (!del.is_array()) throw ConfigError("privacy.deleted: expected an array of feature indices");
  for (const auto& d : del) {
    if (!d.is_number_integer()) throw ConfigError("privacy.deleted: expected integers");
    p.deleted.insert(d.get<int>());
  }
  p.encode_velocity = r.get<bool>("privacy.encode_velocity");
  p.encode_residual = r.get<bool>("privacy.encode_residual");
  p.zone_distance = r.get<bool>("privacy.zone_distance");
  p.bucketize_jitter = r.get<bool>("privacy.bucketize_jitter");
  p.zone_cell_m = r.get<double>("privacy.zone_cell_m");
  p.hash_epoch_s = r.get<double>("privacy.hash_epoch_s");
  const auto& th = merged["privacy"]["velocity_thresholds"];
  if (!th.is_array() || th.size() != 2 || !th[0].is_number() || !th[1].is_number())
    throw ConfigError("privacy.velocity_thresholds: expected [stationary_max, slow_max]");
  p.velocity_thresholds = {th[0].get<double>(), th[1].get<double>()};
  p.time_bucket_s = r.get<double>("privacy.time_bucket_s");
  p.jitter_quantum_s2 = r.get<double>("privacy.jitter_quantum_s2");
  p.hash_key = r.get<std::string>("privacy.hash_key");
  if (merged["privacy"]["velocity_encoding"] != json::array({0.0, 0.5, 1.0}))
    throw ConfigError("privacy.velocity_encoding: only [0, 0.5, 1] is supported");
  p.validate();

  auto& s = c.settings;
  c.model = detail::parse_enum<eval::ModelKind>(eval::parse_model_kind, r.get<std::string>("model.kind"), "model.kind");
  s.activation = detail::parse_enum<mlp::Activation>(mlp::parse_activation, r.get<std::string>("model.activation"),
                                                     "model.activation");
  s.dropout = r.get<double>("model.dropout");
  s.qubits = r.get<int>("model.qubits");
  s.depth = r.get<int>("model.depth");
  s.encoding = detail::parse_enum<vqc::Encoding>(vqc::parse_encoding, r.get<std::string>("model.encoding"), "model.encoding");
  s.entanglement = detail::parse_enum<vqc::Entanglement>(vqc::parse_entanglement, r.get<std::string>("model.entanglement"),
                                                         "model.entanglement");
  s.hybrid.fusion_init = detail::parse_enum<hybrid::FusionInit>(hybrid::parse_fusion, r.get<std::string>("model.fusion"),
                                                                "model.fusion");
  if (!(s.dropout >= 0 && s.dropout < 1)) throw ConfigError("model.dropout: must be in [0, 1)");
  if (s.qubits < 1 || s.qubits > vqc::kMaxQubits) throw ConfigError("model.qubits: must be in [1, 12]");
  if (s.depth < 0) throw ConfigError("model.depth: must be non-negative");

  s.train.epochs = r.get<int>("training.epochs");
  s.train.batch_size = r.get<int>("training.batch_size");
  s.train.learning_rate = r.get<double>("training.learning_rate");
  s.train.momentum = r.get<double>("training.momentum");
  s.shallow_epochs = r.get<int>("training.shallow_epochs");
  s.hybrid.vqc_epochs = r.get<int>("training.vqc_epochs");
  s.hybrid.vqc_learning_rate = r.get<double>("training.vqc_learning_rate");
  s.hybrid.fusion_epochs = r.get<int>("training.fusion_epochs");
  s.hybrid.fusion_learning_rate = r.get<double>("training.fusion_learning_rate");
  s.hybrid.fine_tune_epochs = r.get<int>("training.fine_tune_epochs");
  s.hybrid.fine_tune_learning_rate = r.get<double>("training.fine_tune_learning_rate");
  s.train_fraction = r.get<double>("training.train_fraction");
  s.binary = r.get<bool>("training.binary");
  try {
    s.train.validate();
    s.hybrid.mlp = s.train;
    s.hybrid.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  if (s.shallow_epochs < 1) throw ConfigError("training.shallow_epochs: must be at least 1");
  if (!(s.train_fraction > 0 && s.train_fraction < 1)) throw ConfigError("training.train_fraction: must be in (0, 1)");

  c.dropout_rates = r.get<std::vector<double>>("experiments.dropout_rates");
  for (double d : c.dropout_rates)
    if (!(d >= 0 && d < 1)) throw ConfigError("experiments.dropout_rates: rates must lie in [0, 1)");
  c.activations.clear();
  for (const auto& a : r.get<std::vector<std::string>>("experiments.activations"))
    c.activations.push_back(detail::parse_enum<mlp::Activation>(mlp::parse_activation, a, "experiments.activations"));
  c.qubit_grid = r.get<std::vector<int>>("experiments.qubit_grid");
  for (int q : c.qubit_grid)
    if (q < 1 || q > vqc::kMaxQubits) throw ConfigError("experiments.qubit_grid: qubit counts must be in [1, 12]");
  c.qnn.arch = r.get<std::vector<int>>("experiments.qnn.arch");
  c.qnn.pairs = r.get<int>("experiments.qnn.pairs");
  c.qnn.eval_pairs = r.get<int>("experiments.qnn.eval_pairs");
  c.qnn.steps = r.get<int>("experiments.qnn.steps");
  c.qnn.eps = r.get<double>("experiments.qnn.eps");
  c.qnn.eta = r.get<double>("experiments.qnn.eta");
  c.qnn.pair_grid = r.get<std::vector<int>>("experiments.qnn.pair_grid");
  c.qnn.corrupt_grid = r.get<std::vector<int>>("experiments.qnn.corrupt_grid");
  try {
    dqnn::Architecture{c.qnn.arch}.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("experiments.qnn.arch: ") + e.what());
  }
  if (c.qnn.pairs < 1) throw ConfigError("experiments.qnn.pairs: must be at least 1");
  if (c.qnn.eval_pairs < 1) throw ConfigError("experiments.qnn.eval_pairs: must be at least 1");
  if (c.qnn.steps < 0) throw ConfigError("experiments.qnn.steps: must be non-negative");
  return c;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(parse_json_text(ss.str(), path));
}

/// Applies a "section.key=value" override; the value is parsed as JSON and
/// falls back to a plain string.
inline void apply_override(json& user, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like section.key=value: " + assignment);
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  json v;
  try {
    v = json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    v = value;
  }
  json* node = &user;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = v;
}

inline std::string sha256_hex(const std::string& text) {
  if (sodium_init() < 0) throw NumericError("libsodium initialization failed");
  std::array<unsigned char, crypto_hash_sha256_BYTES> out{};
  crypto_hash_sha256(out.data(), reinterpret_cast<const unsigned char*>(text.data()), text.size());
  std::array<char, crypto_hash_sha256_BYTES * 2 + 1> hex{};
  sodium_bin2hex(hex.data(), hex.size(), out.data(), out.size());
  return std::string(hex.data());
}

/// SHA-256 of the canonical (sorted-key, compact) config with the hash key
/// redacted and the output directory removed.
inline std::string digest(const RunConfig& c) {
  nlohmann::json canon = nlohmann::json::parse(to_json(c, false).dump());
  canon.erase("output_dir");
  return sha256_hex(canon.dump());
}

/// Configured output directory unless the environment overrides it.
inline std::string resolve_output_dir(const RunConfig& c) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return c.output_dir;
}

}  // namespace rtlsq::config

#endif  // RTLSQ_CONFIG_HPP
