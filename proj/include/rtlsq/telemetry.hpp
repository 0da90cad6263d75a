#ifndef RTLSQ_TELEMETRY_HPP
#define RTLSQ_TELEMETRY_HPP

// Synthetic RTLS traces with DoS / spoofing injection, windowed feature
// extraction, and CSV ingestion/emission.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rtlsq/data.hpp"
#include "rtlsq/error.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq::telemetry {

inline constexpr int kFeatureCount = 10;
inline constexpr double kDroppedRssi = -100.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct TelemetrySample {
  double t = 0.0;
  std::string beacon_id;
  double rssi = 0.0;
  Point est;
  Point odom;
  bool dropped = false;
};

enum class AttackKind { none = 0, dos = 1, spoof = 2 };

inline std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::dos: return "dos";
    case AttackKind::spoof: return "spoof";
  }
  return "none";
}

inline AttackKind parse_attack(const std::string& s) {
  if (s == "none") return AttackKind::none;
  if (s == "dos") return AttackKind::dos;
  if (s == "spoof") return AttackKind::spoof;
  throw ConfigError("unknown attack kind: " + s);
}

struct AttackScenario {
  AttackKind kind = AttackKind::none;
  double intensity = 0.0;
  std::set<std::string> affected_beacons;  // empty means all anchors
  double start = 0.0;
  double end = 1.0;

  void validate() const {
    require(start < end, "attack scenario: start must precede end");
    require(intensity >= 0.0 && intensity <= 1.0, "attack scenario: intensity must be in [0, 1]");
  }

  bool active_at(double t) const { return kind != AttackKind::none && t >= start && t < end; }
  bool affects(const std::string& beacon) const {
    return affected_beacons.empty() || affected_beacons.count(beacon) > 0;
  }
};

struct Anchor {
  std::string id;
  Point pos;
};

struct Trajectory {
  std::vector<Point> waypoints;  // closed loop; a single waypoint is stationary
  double speed = 0.5;            // m/s
};

// x4 source: mean RSSI-inverted range, or mean |d_A - d_B| between
// consecutive readings from different anchors.
enum class RangeMode { rssi, tdoa };

inline std::string to_string(RangeMode m) { return m == RangeMode::rssi ? "rssi" : "tdoa"; }

inline RangeMode parse_range_mode(const std::string& s) {
  if (s == "rssi") return RangeMode::rssi;
  if (s == "tdoa") return RangeMode::tdoa;
  throw ConfigError("unknown range mode: " + s + " (expected rssi or tdoa)");
}

struct RadioModel {
  double path_loss_exponent = 2.5;
  double calibration_dbm = -40.0;
  RangeMode range_mode = RangeMode::rssi;
};

struct NoiseConfig {
  double rssi_sigma = 2.0;        // dB
  double position_sigma = 0.15;   // m
  double odometry_sigma = 0.02;   // m
  double timestamp_sigma = 0.004; // s
  double base_drop_rate = 0.02;

  static NoiseConfig zero() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

struct SimulationConfig {
  double duration_s = 75.0;
  double sample_rate_hz = 10.0;
  RadioModel radio{};
  NoiseConfig noise{};
  double dos_rssi_sigma = 6.0;       // extra RSSI jitter at full DoS intensity
  double dos_delay_sigma = 0.03;     // s, retransmission delay at full intensity
  double spoof_rssi_dbm = -45.0;     // phantom beacon level
  double spoof_rssi_sigma = 0.3;
  double spoof_bias_m = 2.0;         // position bias amplitude at full intensity
  double spoof_bias_period_s = 20.0;
  std::string phantom_id = "S0";
};

/// Log-distance path loss: RSSI(d) = -10 n log10(d) + C.
inline double rssi_model(double d, double n_exp, double c) {
  if (!(d > 0.0)) throw ArgumentError("rssi_model: distance must be positive");
  return -10.0 * n_exp * std::log10(d) + c;
}

// Inverse of rssi_model.
inline double distance_from_rssi(double rssi, double n_exp, double c) {
  return std::pow(10.0, (c - rssi) / (10.0 * n_exp));
}

namespace detail {

inline Point position_at(const Trajectory& traj, double t) {
  const auto& w = traj.waypoints;
  if (w.size() == 1 || traj.speed <= 0.0) return w.front();
  std::vector<double> seg;
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    seg.push_back(distance(w[i], w[(i + 1) % w.size()]));
    total += seg.back();
  }
  if (total <= 0.0) return w.front();
  double s = std::fmod(traj.speed * t, total);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (s <= seg[i] || i + 1 == w.size()) {
      double f = seg[i] > 0.0 ? std::min(s / seg[i], 1.0) : 0.0;
      Point a = w[i], b = w[(i + 1) % w.size()];
      return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
    }
    s -= seg[i];
  }
  return w.front();
}

}  // namespace detail

/// One run: at every tick the robot hears the next anchor in round-robin
/// order. DoS drops or destabilizes affected anchors inside the attack
/// span; spoofing injects a phantom beacon with a steady strong signal and
/// drags the position estimate.
inline std::vector<TelemetrySample> simulate_run(const std::vector<Anchor>& layout,
                                                 const Trajectory& trajectory,
                                                 const AttackScenario& scenario,
                                                 const SimulationConfig& cfg, std::uint64_t seed) {
  if (layout.size() < 3) throw ArgumentError("simulate_run: layout needs at least 3 anchors");
  std::set<std::string> ids;
  for (const auto& a : layout) ids.insert(a.id);
  if (ids.size() != layout.size()) throw ArgumentError("simulate_run: anchor ids must be unique");
  if (trajectory.waypoints.empty()) throw ArgumentError("simulate_run: trajectory is empty");
  require(cfg.sample_rate_hz > 0.0 && cfg.duration_s > 0.0, "simulate_run: invalid timing");
  scenario.validate();

  Rng rng = substream(seed, "telemetry");
  const auto ticks = static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.sample_rate_hz));
  const double dt = 1.0 / cfg.sample_rate_hz;
  const auto& nz = cfg.noise;
  std::vector<TelemetrySample> out;
  out.reserve(ticks * 2);
  double last_t = 0.0;
  auto noisy = [&](double sigma) { return sigma > 0.0 ? sigma * gaussian(rng) : 0.0; };

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t_nominal = static_cast<double>(k) * dt;
    const Point truth = detail::position_at(trajectory, t_nominal);
    const Anchor& anchor = layout[k % layout.size()];
    const bool attack = scenario.active_at(t_nominal);
    const double intensity = attack ? scenario.intensity : 0.0;

    Point bias{};
    if (attack && scenario.kind == AttackKind::spoof) {
      double phase = 2.0 * std::numbers::pi * (t_nominal - scenario.start) / cfg.spoof_bias_period_s;
      bias.x = intensity * cfg.spoof_bias_m * std::sin(phase);
      bias.y = 0.5 * intensity * cfg.spoof_bias_m * (1.0 - std::cos(phase));
    }

    TelemetrySample s;
    s.beacon_id = anchor.id;
    double t = t_nominal + noisy(nz.timestamp_sigma);
    double rssi = rssi_model(std::max(distance(truth, anchor.pos), 0.1), cfg.radio.path_loss_exponent,
                             cfg.radio.calibration_dbm) + noisy(nz.rssi_sigma);
    double pos_sigma = nz.position_sigma;
    bool dropped = uniform01(rng) < nz.base_drop_rate;
    if (attack && scenario.kind == AttackKind::dos) {
      pos_sigma *= 1.0 + intensity;
      if (scenario.affects(anchor.id)) {
        dropped = dropped || uniform01(rng) < intensity;
        rssi += noisy(cfg.dos_rssi_sigma * intensity);
        t += std::abs(noisy(cfg.dos_delay_sigma * intensity));
      }
    }
    s.t = std::max(t, last_t);
    last_t = s.t;
    s.dropped = dropped;
    s.rssi = dropped ? kDroppedRssi : rssi;
    s.est = {truth.x + bias.x + noisy(pos_sigma), truth.y + bias.y + noisy(pos_sigma)};
    s.odom = {truth.x + noisy(nz.odometry_sigma), truth.y + noisy(nz.odometry_sigma)};
    out.push_back(s);

    if (attack && scenario.kind == AttackKind::spoof && uniform01(rng) < intensity) {
      TelemetrySample p;
      p.t = std::max(t_nominal + 0.5 * dt + noisy(nz.timestamp_sigma), last_t);
      last_t = p.t;
      p.beacon_id = cfg.phantom_id;
      p.rssi = cfg.spoof_rssi_dbm + noisy(cfg.spoof_rssi_sigma);
      p.est = {truth.x + bias.x + noisy(pos_sigma), truth.y + bias.y + noisy(pos_sigma)};
      p.odom = {truth.x + noisy(nz.odometry_sigma), truth.y + noisy(nz.odometry_sigma)};
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features

/// Shannon entropy in bits of the beacon-id frequency distribution.
inline double beacon_entropy(const std::map<std::string, std::size_t>& id_counts) {
  std::size_t total = 0;
  for (const auto& [id, c] : id_counts) total += c;
  if (total == 0) throw ArgumentError("beacon_entropy: no beacon observations");
  double h = 0.0;
  for (const auto& [id, c] : id_counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

struct TelemetryWindow {
  std::vector<TelemetrySample> samples;
  std::size_t window_len = 0;
  std::size_t stride = 0;
};

struct FeatureVector {
  // x1 rssi_mean, x2 rssi_std, x3 timestamp_jitter_var, x4 distance_estimate,
  // x5 positional_jitter, x6 beacon_entropy, x7 packet_drop_rate,
  // x8 anchor_signal_variance, x9 est_velocity, x10 velocity_residual.
  std::array<double, kFeatureCount> x{};
  int label = 0;

  double& operator[](int feature_number) { return x[static_cast<std::size_t>(feature_number - 1)]; }
  double operator[](int feature_number) const { return x[static_cast<std::size_t>(feature_number - 1)]; }
};

inline const std::vector<std::string>& feature_descriptions() {
  static const std::vector<std::string> names{
      "rssi_mean",         "rssi_std",          "timestamp_jitter_var",   "distance_estimate",
      "positional_jitter", "beacon_entropy",    "packet_drop_rate",       "anchor_signal_variance",
      "est_velocity",      "velocity_residual"};
  return names;
}

namespace detail {

inline double population_variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Ten window statistics. RSSI-derived features use received packets only;
/// the total RSSI variance is split into a within-beacon part (x2 is its
/// square root) and a between-beacon part (x8). Population variances.
inline FeatureVector extract_features(const TelemetryWindow& window, const RadioModel& radio = {},
                                      int label = 0) {
  const auto& s = window.samples;
  if (s.size() < 2) throw DataError("extract_features: window needs at least 2 samples");
  FeatureVector f;
  f.label = label;

  std::vector<const TelemetrySample*> rx;
  for (const auto& smp : s)
    if (!smp.dropped) rx.push_back(&smp);

  // x1, x2, x8
  if (rx.empty()) {
    f[1] = kDroppedRssi;
  } else {
    // Sums are shifted by a per-beacon reference reading so a constant
    // signal yields exactly zero spread.
    struct Acc {
      double ref = 0.0, shifted = 0.0;
      std::size_t n = 0;
    };
    std::map<std::string, Acc> per_beacon;
    const double ref = rx.front()->rssi;
    double shifted = 0.0;
    for (const auto* p : rx) {
      shifted += p->rssi - ref;
      auto& acc = per_beacon[p->beacon_id];
      if (acc.n == 0) acc.ref = p->rssi;
      acc.shifted += p->rssi - acc.ref;
      acc.n += 1;
    }
    const double n = static_cast<double>(rx.size());
    const double mean_offset = shifted / n;
    const double mean = ref + mean_offset;
    double within = 0.0, between = 0.0;
    for (const auto* p : rx) {
      const auto& acc = per_beacon[p->beacon_id];
      double local = acc.shifted / static_cast<double>(acc.n);  // beacon mean minus acc.ref
      double dev = (p->rssi - acc.ref) - local;
      double gap = (acc.ref - ref) + local - mean_offset;
      within += dev * dev;
      between += gap * gap;
    }
    f[1] = mean;
    f[2] = std::sqrt(within / n);
    f[8] = between / n;
  }

  // x3
  std::vector<double> gaps;
  for (std::size_t i = 1; i < rx.size(); ++i) gaps.push_back(rx[i]->t - rx[i - 1]->t);
  f[3] = detail::population_variance(gaps);

  // x4
  auto range = [&](const TelemetrySample* p) {
    return distance_from_rssi(p->rssi, radio.path_loss_exponent, radio.calibration_dbm);
  };
  double dist = 0.0;
  std::size_t terms = 0;
  if (radio.range_mode == RangeMode::rssi) {
    for (const auto* p : rx) dist += range(p);
    terms = rx.size();
  } else {
    for (std::size_t i = 1; i < rx.size(); ++i)
      if (rx[i]->beacon_id != rx[i - 1]->beacon_id) {
        dist += std::abs(range(rx[i]) - range(rx[i - 1]));
        ++terms;
      }
  }
  f[4] = terms == 0 ? 0.0 : dist / static_cast<double>(terms);

  // x5
  std::vector<double> xs, ys;
  for (const auto& smp : s) {
    xs.push_back(smp.est.x);
    ys.push_back(smp.est.y);
  }
  f[5] = std::sqrt(detail::population_variance(xs) + detail::population_variance(ys));

  // x6
  std::map<std::string, std::size_t> counts;
  for (const auto* p : rx) ++counts[p->beacon_id];
  f[6] = rx.empty() ? 0.0 : beacon_entropy(counts);

  // x7
  f[7] = static_cast<double>(s.size() - rx.size()) / static_cast<double>(s.size());

  // x9, x10
  double span = s.back().t - s.front().t;
  if (span > 0.0) {
    double v_est = distance(s.front().est, s.back().est) / span;
    double v_odom = distance(s.front().odom, s.back().odom) / span;
    f[9] = v_est;
    f[10] = std::abs(v_est - v_odom);
  }
  return f;
}

/// Number of windows: floor((N - len) / stride) + 1 for N >= len, else 0.
inline std::vector<TelemetryWindow> window_stream(const std::vector<TelemetrySample>& samples,
                                                  std::size_t window_len, std::size_t stride) {
  require(window_len >= 2, "window_stream: window length must be at least 2");
  require(stride >= 1, "window_stream: stride must be at least 1");
  std::vector<TelemetryWindow> out;
  if (samples.size() < window_len) return out;
  for (std::size_t start = 0; start + window_len <= samples.size(); start += stride) {
    TelemetryWindow w{{samples.begin() + static_cast<std::ptrdiff_t>(start),
                       samples.begin() + static_cast<std::ptrdiff_t>(start + window_len)},
                      window_len, stride};
    out.push_back(std::move(w));
  }
  return out;
}

// Ground-truth label: the scenario's class when the window midpoint falls in
// the attack span, Normal otherwise.
inline int window_label(const TelemetryWindow& w, const AttackScenario& scenario) {
  double mid = 0.5 * (w.samples.front().t + w.samples.back().t);
  return scenario.active_at(mid) ? static_cast<int>(scenario.kind) : 0;
}

// ---------------------------------------------------------------------------
// Default synthetic dataset

struct WindowConfig {
  std::size_t window_len = 50;
  std::size_t stride = 25;
};

struct DatasetConfig {
  std::vector<Anchor> layout;
  std::vector<Trajectory> trajectories;
  int repetitions = 10;
  SimulationConfig sim{};
  WindowConfig window{};
  double attack_start_s = 10.0;
  double dos_intensity_min = 0.4;
  double spoof_intensity_min = 0.4;

  static DatasetConfig defaults() {
    DatasetConfig c;
    c.layout = {{"A0", {0, 0}},  {"A1", {5, 0}},  {"A2", {10, 0}},
                {"A3", {10, 10}}, {"A4", {5, 10}}, {"A5", {0, 10}}};
    c.trajectories = {{{{1, 1}, {9, 1}, {9, 9}, {1, 9}}, 0.5},
                      {{{1, 1}, {9, 9}, {1, 9}, {9, 1}}, 0.8}};
    return c;
  }
};

struct Run {
  std::string name;
  AttackScenario scenario;
  std::vector<TelemetrySample> samples;
};

/// Every trajectory x repetition x {none, dos, spoof}. Repetition r scales
/// the trajectory speed by (0.2 + 0.2 r) so velocity bands are covered.
inline std::vector<Run> generate_runs(const DatasetConfig& cfg, std::uint64_t seed) {
  require(cfg.repetitions >= 1, "generate_runs: repetitions must be positive");
  std::vector<Run> runs;
  std::uint64_t index = 0;
  for (std::size_t ti = 0; ti < cfg.trajectories.size(); ++ti)
    for (int rep = 0; rep < cfg.repetitions; ++rep)
      for (AttackKind kind : {AttackKind::none, AttackKind::dos, AttackKind::spoof}) {
        Rng rng = substream(seed, "scenario", index);
        AttackScenario sc;
        sc.kind = kind;
        sc.start = cfg.attack_start_s;
        sc.end = cfg.sim.duration_s + 1.0;
        if (kind == AttackKind::dos) {
          sc.intensity = uniform(rng, cfg.dos_intensity_min, 1.0);
          std::vector<std::string> ids;
          for (const auto& a : cfg.layout) ids.push_back(a.id);
          shuffle(ids, rng);
          std::size_t count = 2 + uniform_index(rng, ids.size() - 1);
          sc.affected_beacons.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
        } else if (kind == AttackKind::spoof) {
          sc.intensity = uniform(rng, cfg.spoof_intensity_min, 1.0);
        }
        Trajectory traj = cfg.trajectories[ti];
        traj.speed *= 0.2 + 0.2 * rep;
        std::ostringstream name;
        name << "run_" << ti << '_' << rep << '_' << to_string(kind);
        runs.push_back({name.str(), sc, simulate_run(cfg.layout, traj, sc, cfg.sim, splitmix64(seed + index))});
        ++index;
      }
  return runs;
}

struct FeatureTable {
  std::vector<std::string> columns;  // feature column names, label excluded
  LabeledSet data;
};

inline std::vector<std::string> raw_feature_columns() {
  std::vector<std::string> c;
  for (int i = 1; i <= kFeatureCount; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

inline FeatureTable featurize_runs(const std::vector<Run>& runs, const WindowConfig& wc,
                                   const RadioModel& radio = {}) {
  FeatureTable table{raw_feature_columns(), {}};
  for (const auto& run : runs)
    for (const auto& w : window_stream(run.samples, wc.window_len, wc.stride)) {
      auto f = extract_features(w, radio, window_label(w, run.scenario));
      table.data.rows.emplace_back(f.x.begin(), f.x.end());
      table.data.labels.push_back(f.label);
    }
  return table;
}

// ---------------------------------------------------------------------------
// CSV

namespace csv {

inline const std::vector<std::string>& sample_columns() {
  static const std::vector<std::string> cols{"t", "beacon_id", "rssi", "est_x", "est_y", "odom_x", "odom_y",
                                             "dropped"};
  return cols;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, std::size_t line, const std::string& column) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + s + "'");
  }
}

// Reads non-comment lines; returns header and rows with 1-based line numbers.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

inline RawTable read_raw(std::istream& is) {
  RawTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_line(line);
    if (!have_header) {
      t.header = fields;
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    t.rows.emplace_back(lineno, std::move(fields));
  }
  if (!have_header) throw DataError("csv: missing header row");
  return t;
}

inline std::map<std::string, std::size_t> column_index(const RawTable& t,
                                                       const std::vector<std::string>& required,
                                                       bool allow_extra) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (!allow_extra && std::find(required.begin(), required.end(), t.header[i]) == required.end())
      throw DataError("csv: unknown column '" + t.header[i] + "'");
    idx[t.header[i]] = i;
  }
  for (const auto& r : required)
    if (!idx.count(r)) throw DataError("csv: missing required column '" + r + "'");
  return idx;
}

inline void write_comment(std::ostream& os, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
}

inline void write_samples(std::ostream& os, const std::vector<TelemetrySample>& samples,
                          const std::string& comment = {}) {
  write_comment(os, comment);
  os.precision(17);
  os << "t,beacon_id,rssi,est_x,est_y,odom_x,odom_y,dropped\n";
  for (const auto& s : samples)
    os << s.t << ',' << s.beacon_id << ',' << s.rssi << ',' << s.est.x << ',' << s.est.y << ',' << s.odom.x
       << ',' << s.odom.y << ',' << (s.dropped ? 1 : 0) << '\n';
}

inline std::vector<TelemetrySample> load_samples(std::istream& is) {
  auto raw = read_raw(is);
  auto idx = column_index(raw, sample_columns(), false);
  std::vector<TelemetrySample> out;
  double last_t = -INFINITY;
  for (const auto& [line, f] : raw.rows) {
    TelemetrySample s;
    s.t = parse_double(f[idx["t"]], line, "t");
    s.beacon_id = f[idx["beacon_id"]];
    s.rssi = parse_double(f[idx["rssi"]], line, "rssi");
    s.est = {parse_double(f[idx["est_x"]], line, "est_x"), parse_double(f[idx["est_y"]], line, "est_y")};
    s.odom = {parse_double(f[idx["odom_x"]], line, "odom_x"), parse_double(f[idx["odom_y"]], line, "odom_y")};
    const std::string& d = f[idx["dropped"]];
    if (d == "1" || d == "true") s.dropped = true;
    else if (d == "0" || d == "false") s.dropped = false;
    else throw DataError("line " + std::to_string(line) + ": column 'dropped' must be 0/1, got '" + d + "'");
    if (s.t < last_t) throw DataError("line " + std::to_string(line) + ": timestamps must be non-decreasing");
    last_t = s.t;
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_features(std::ostream& os, const FeatureTable& table, const std::string& comment = {}) {
  write_comment(os, comment);
  os.precision(17);
  for (const auto& c : table.columns) os << c << ',';
  os << "label\n";
  for (std::size_t i = 0; i < table.data.size(); ++i) {
    for (double v : table.data.rows[i]) os << v << ',';
    os << table.data.labels[i] << '\n';
  }
}

// Feature CSVs: any set of x<k> columns plus a label column.
inline FeatureTable load_features(std::istream& is) {
  auto raw = read_raw(is);
  FeatureTable table;
  std::size_t label_col = raw.header.size();
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < raw.header.size(); ++i) {
    const auto& h = raw.header[i];
    if (h == "label") {
      label_col = i;
    } else if (h.size() >= 2 && h[0] == 'x' && std::all_of(h.begin() + 1, h.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
      int k = std::stoi(h.substr(1));
      if (k < 1 || k > kFeatureCount) throw DataError("csv: unknown column '" + h + "'");
      table.columns.push_back(h);
      feature_cols.push_back(i);
    } else {
      throw DataError("csv: unknown column '" + h + "'");
    }
  }
  if (label_col == raw.header.size()) throw DataError("csv: missing required column 'label'");
  if (feature_cols.empty()) throw DataError("csv: no feature columns");
  for (const auto& [line, f] : raw.rows) {
    std::vector<double> row;
    for (std::size_t c : feature_cols) row.push_back(parse_double(f[c], line, raw.header[c]));
    double y = parse_double(f[label_col], line, "label");
    if (y != std::floor(y) || y < 0 || y >= kClassCount)
      throw DataError("line " + std::to_string(line) + ": label out of range");
    table.data.rows.push_back(std::move(row));
    table.data.labels.push_back(static_cast<int>(y));
  }
  return table;
}

}  // namespace csv

}  // namespace rtlsq::telemetry

#endif  // RTLSQ_TELEMETRY_HPP
