#include <gtest/gtest.h>

#include <cstdlib>

#include "rtlsq/config.hpp"

namespace cfg = rtlsq::config;

namespace {

std::string config_error(const cfg::json& user) {
  try {
    cfg::from_json(user);
  } catch (const rtlsq::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  cfg::RunConfig a;
  auto b = cfg::from_json(cfg::to_json(a));
  EXPECT_EQ(cfg::to_json(a).dump(), cfg::to_json(b).dump());
  EXPECT_EQ(cfg::digest(a), cfg::digest(b));
  EXPECT_EQ(cfg::from_json(cfg::json::object()).seed, 42u);
}

TEST(Config, UnknownKeyNamesPath) {
  auto msg = config_error({{"training", {{"epoch", 3}}}});
  EXPECT_NE(msg.find("training.epoch"), std::string::npos) << msg;
  EXPECT_NE(config_error({{"nonsense", 1}}).find("nonsense"), std::string::npos);
}

TEST(Config, BadTypesAndRangesRejected) {
  EXPECT_NE(config_error({{"training", {{"epochs", "many"}}}}).find("training.epochs"), std::string::npos);
  EXPECT_FALSE(config_error({{"model", {{"kind", "transformer"}}}}).empty());
  EXPECT_FALSE(config_error({{"privacy", {{"deleted", {1}}}}}).empty());  // x1 is an attack feature
  EXPECT_FALSE(config_error({{"model", {{"qubits", 40}}}}).empty());
  EXPECT_NE(config_error({{"telemetry", {{"radio", {{"range_mode", "toa"}}}}}}).find("telemetry.radio.range_mode"),
            std::string::npos);
  auto c = rtlsq::config::from_json({{"telemetry", {{"radio", {{"range_mode", "tdoa"}}}}}});
  EXPECT_EQ(c.telemetry.sim.radio.range_mode, rtlsq::telemetry::RangeMode::tdoa);
}

TEST(Config, OverridesParseJsonOrString) {
  cfg::json user = cfg::json::object();
  cfg::apply_override(user, "training.epochs=7");
  cfg::apply_override(user, "model.kind=nn");
  cfg::apply_override(user, "seed=9");
  auto c = cfg::from_json(user);
  EXPECT_EQ(c.settings.train.epochs, 7);
  EXPECT_EQ(c.model, rtlsq::eval::ModelKind::nn);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_THROW(cfg::apply_override(user, "no-equals"), rtlsq::ConfigError);
}

TEST(Config, DigestTracksSemanticsOnly) {
  cfg::RunConfig a;
  auto b = a;
  b.output_dir = "elsewhere";
  b.privacy.hash_key = "another key";
  EXPECT_EQ(cfg::digest(a), cfg::digest(b));
  b.seed = 43;
  EXPECT_NE(cfg::digest(a), cfg::digest(b));
  EXPECT_EQ(cfg::digest(a).size(), 64u);
  EXPECT_EQ(cfg::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, KeyRedactedOnRequest) {
  cfg::RunConfig a;
  EXPECT_EQ(cfg::to_json(a, false).dump().find(a.privacy.hash_key), std::string::npos);
  EXPECT_NE(cfg::to_json(a, true).dump().find(a.privacy.hash_key), std::string::npos);
}

TEST(Config, EnvironmentOverridesOutputDir) {
  cfg::RunConfig a;
  ::unsetenv(cfg::kOutputDirEnv);
  EXPECT_EQ(cfg::resolve_output_dir(a), "rtlsq_out");
  ::setenv(cfg::kOutputDirEnv, "/tmp/from-env", 1);
  EXPECT_EQ(cfg::resolve_output_dir(a), "/tmp/from-env");
  ::unsetenv(cfg::kOutputDirEnv);
}
