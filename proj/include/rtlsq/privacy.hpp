#ifndef RTLSQ_PRIVACY_HPP
#define RTLSQ_PRIVACY_HPP

// Privacy-aware feature transforms: deletion, zoning, rotating keyed beacon
// hashes, velocity banding and timestamp bucketing.

#include <sodium.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtlsq/error.hpp"
#include "rtlsq/telemetry.hpp"

namespace rtlsq::privacy {

// Attack-relevant features; never touched by any profile.
inline const std::set<int> kAttackSubset{1, 2, 7, 8};
// Privacy-sensitive features a profile may delete or transform.
inline const std::set<int> kSensitiveSubset{3, 4, 5, 6, 9, 10};

struct PrivacyProfile {
  std::set<int> deleted;
  double zone_cell_m = 1.0;
  double hash_epoch_s = 60.0;
  std::string hash_key = "rtlsq-default-key";
  std::pair<double, double> velocity_thresholds{0.05, 0.5};
  double time_bucket_s = 60.0;

  bool encode_velocity = false;   // x9 -> {0, 0.5, 1}
  bool encode_residual = false;   // x10 -> {0, 0.5, 1}
  bool zone_distance = false;     // x4 -> distance band index
  bool bucketize_jitter = false;  // x3 -> floor(x3 / jitter_quantum) * jitter_quantum
  double jitter_quantum_s2 = 1e-4;

  static PrivacyProfile identity() { return {}; }

  // Delete x4, x5, x6 and encode x9.
  static PrivacyProfile table2() {
    PrivacyProfile p;
    p.deleted = {4, 5, 6};
    p.encode_velocity = true;
    return p;
  }

  void validate() const {
    for (int k : deleted) {
      if (k < 1 || k > telemetry::kFeatureCount)
        throw ConfigError("privacy.deleted: feature index out of range: " + std::to_string(k));
      if (kAttackSubset.count(k))
        throw ConfigError("privacy.deleted: x" + std::to_string(k) + " belongs to the attack-relevant subset");
    }
    if (deleted.size() >= static_cast<std::size_t>(telemetry::kFeatureCount))
      throw ConfigError("privacy.deleted: profile deletes every feature");
    if (!(velocity_thresholds.first >= 0.0 && velocity_thresholds.first < velocity_thresholds.second))
      throw ConfigError("privacy.velocity_thresholds: must be non-negative and strictly increasing");
    if (!(zone_cell_m > 0.0)) throw ConfigError("privacy.zone_cell_m: must be positive");
    if (!(hash_epoch_s > 0.0)) throw ConfigError("privacy.hash_epoch_s: must be positive");
    if (!(time_bucket_s > 0.0)) throw ConfigError("privacy.time_bucket_s: must be positive");
    if (!(jitter_quantum_s2 > 0.0)) throw ConfigError("privacy.jitter_quantum_s2: must be positive");
  }
};

struct Zone {
  long long ix = 0;
  long long iy = 0;
  bool operator==(const Zone&) const = default;
};

inline Zone zone_encode(telemetry::Point p, double cell_m) {
  require(cell_m > 0.0, "zone_encode: cell size must be positive");
  return {static_cast<long long>(std::floor(p.x / cell_m)), static_cast<long long>(std::floor(p.y / cell_m))};
}

inline long long zone_encode(double distance, double cell_m) {
  require(cell_m > 0.0, "zone_encode: cell size must be positive");
  return static_cast<long long>(std::floor(distance / cell_m));
}

inline long long bucketize_timestamp(double t, double bucket_s) {
  require(bucket_s > 0.0, "bucketize_timestamp: bucket must be positive");
  return static_cast<long long>(std::floor(t / bucket_s));
}

/// Bands: v <= stationary_max -> 0, v <= slow_max -> 0.5, else 1.
inline double discretize_velocity(double v, std::pair<double, double> thresholds = {0.05, 0.5}) {
  if (!(v >= 0.0)) throw ArgumentError("discretize_velocity: velocity must be non-negative");
  if (v <= thresholds.first) return 0.0;
  if (v <= thresholds.second) return 0.5;
  return 1.0;
}

namespace detail {

inline void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw NumericError("libsodium initialization failed");
}

}  // namespace detail

/// 128-bit BLAKE2b keyed hash of (id, epoch index) as 32 hex characters.
/// The secret is first stretched to a 32-byte BLAKE2b key.
inline std::string hash_beacon_rotating(const std::string& id, double epoch_time, const PrivacyProfile& profile) {
  detail::ensure_sodium();
  std::array<unsigned char, crypto_generichash_KEYBYTES> key{};
  crypto_generichash(key.data(), key.size(), reinterpret_cast<const unsigned char*>(profile.hash_key.data()),
                     profile.hash_key.size(), nullptr, 0);

  const auto epoch = static_cast<std::int64_t>(std::floor(epoch_time / profile.hash_epoch_s));
  std::vector<unsigned char> msg(id.begin(), id.end());
  msg.push_back(0);
  for (int b = 0; b < 8; ++b) msg.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(epoch) >> (8 * b)) & 0xff));

  std::array<unsigned char, 16> out{};
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), key.data(), key.size());
  std::array<char, 33> hex{};
  sodium_bin2hex(hex.data(), hex.size(), out.data(), out.size());
  return std::string(hex.data(), 32);
}

enum class Provenance { raw, transformed };

struct ProfiledFeatures {
  std::vector<double> values;
  std::vector<int> source;  // original 1-based feature index per output column
  std::vector<Provenance> provenance;
};

/// Deletes and transforms privacy-sensitive features; output width is
/// 10 - |deleted| and column order follows the original indices.
inline ProfiledFeatures apply_profile(const std::vector<double>& features, const PrivacyProfile& profile) {
  profile.validate();
  if (features.size() != static_cast<std::size_t>(telemetry::kFeatureCount))
    throw DataError("apply_profile: expected 10 raw features, got " + std::to_string(features.size()));
  ProfiledFeatures out;
  for (int k = 1; k <= telemetry::kFeatureCount; ++k) {
    if (profile.deleted.count(k)) continue;
    double v = features[static_cast<std::size_t>(k - 1)];
    bool changed = true;
    if (k == 9 && profile.encode_velocity) {
      v = discretize_velocity(v, profile.velocity_thresholds);
    } else if (k == 10 && profile.encode_residual) {
      v = discretize_velocity(v, profile.velocity_thresholds);
    } else if (k == 4 && profile.zone_distance) {
      v = static_cast<double>(zone_encode(v, profile.zone_cell_m));
    } else if (k == 3 && profile.bucketize_jitter) {
      v = std::floor(v / profile.jitter_quantum_s2) * profile.jitter_quantum_s2;
    } else {
      changed = false;
    }
    out.values.push_back(v);
    out.source.push_back(k);
    out.provenance.push_back(changed ? Provenance::transformed : Provenance::raw);
  }
  return out;
}

inline telemetry::FeatureTable apply_profile(const telemetry::FeatureTable& table, const PrivacyProfile& profile) {
  if (table.columns != telemetry::raw_feature_columns())
    throw DataError("apply_profile: input must hold the raw x1..x10 columns");
  telemetry::FeatureTable out;
  out.data.labels = table.data.labels;
  for (const auto& row : table.data.rows) {
    auto p = apply_profile(row, profile);
    if (out.columns.empty())
      for (int k : p.source) out.columns.push_back("x" + std::to_string(k));
    out.data.rows.push_back(std::move(p.values));
  }
  if (out.columns.empty())
    for (int k = 1; k <= telemetry::kFeatureCount; ++k)
      if (!profile.deleted.count(k)) out.columns.push_back("x" + std::to_string(k));
  return out;
}

/// Sample-level sanitization: rotating beacon tokens, zone-centre positions
/// and bucketed timestamps (bucket start time).
inline std::vector<telemetry::TelemetrySample> sanitize_samples(const std::vector<telemetry::TelemetrySample>& samples,
                                                                const PrivacyProfile& profile) {
  profile.validate();
  auto zoned = [&](telemetry::Point p) {
    Zone z = zone_encode(p, profile.zone_cell_m);
    return telemetry::Point{(static_cast<double>(z.ix) + 0.5) * profile.zone_cell_m,
                            (static_cast<double>(z.iy) + 0.5) * profile.zone_cell_m};
  };
  std::vector<telemetry::TelemetrySample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    telemetry::TelemetrySample r = s;
    r.beacon_id = hash_beacon_rotating(s.beacon_id, s.t, profile);
    r.est = zoned(s.est);
    r.odom = zoned(s.odom);
    r.t = static_cast<double>(bucketize_timestamp(s.t, profile.time_bucket_s)) * profile.time_bucket_s;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rtlsq::privacy

#endif  // RTLSQ_PRIVACY_HPP
