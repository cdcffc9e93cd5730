#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "esplace/config.hpp"

using namespace esplace;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

ErrorCode code_of(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidParameter;
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const auto path = write_temp("esplace_empty.cfg", "# nothing here\n\n");
  auto cfg = parse_config(path);
  cfg.workers = 1;
  RunConfig def;
  def.workers = 1;
  EXPECT_EQ(echo_config(cfg), echo_config(def));
  EXPECT_NE(echo_config(cfg).find("range_m0=200\n"), std::string::npos);
  EXPECT_NE(echo_config(cfg).find("vehicle_count=1060\n"), std::string::npos);
}

TEST(Config, OverrideWinsOverFile) {
  const auto path = write_temp("esplace_m0.cfg", "m0_m = 200\n");
  const auto cfg = parse_config(path, {"m0_m=1000"});
  EXPECT_EQ(cfg.scenario.range_m0, 1000.0);
  EXPECT_EQ(parse_config(path).scenario.range_m0, 200.0);
}

TEST(Config, UnknownKeyIsRejected) {
  std::string what;
  EXPECT_EQ(code_of([] { parse_config(std::nullopt, {"m0=3"}); }, &what), ErrorCode::UnknownKey);
  EXPECT_NE(what.find("'m0'"), std::string::npos);
}

TEST(Config, TypeErrorNamesKeyAndLine) {
  const auto path = write_temp("esplace_bad.cfg", "seed = 4\n\ntrials = many\n");
  std::string what;
  EXPECT_EQ(code_of([&] { parse_config(path); }, &what), ErrorCode::TypeError);
  EXPECT_NE(what.find("trials"), std::string::npos);
  EXPECT_NE(what.find(":3"), std::string::npos);
  EXPECT_EQ(code_of([] { parse_config(std::nullopt, {"justakey"}); }), ErrorCode::TypeError);
  EXPECT_EQ(code_of([] { parse_config(std::nullopt, {"=5"}); }), ErrorCode::MissingKey);
}

TEST(Config, CountAndSpacingReplaceEachOther) {
  const auto cfg = parse_config(std::nullopt, {"es_count=10", "es_spacing_m=900"});
  EXPECT_FALSE(cfg.es_count);
  EXPECT_EQ(*cfg.es_spacing_m, 900.0);
  const auto dens = parse_config(std::nullopt, {"vehicle_count=5", "density_per_km=3"});
  EXPECT_FALSE(dens.scenario.vehicle_count);
  EXPECT_EQ(validate_params(dens.scenario).vehicle_count(), 300);
}

TEST(Config, EchoRoundTrips) {
  const auto cfg = parse_config(std::string(ESPLACE_CONFIG_DIR) + "/calibration.cfg",
                                {"targets=0.5,0.65", "topology=unconnected", "es_fanout_cap=0", "workers=3"});
  const auto text = echo_config(cfg);
  RunConfig back;
  apply_config_text(back, text, "echo");
  EXPECT_EQ(echo_config(back), text);
  EXPECT_EQ(back.scenario.highway_length_m, cfg.scenario.highway_length_m);
  EXPECT_EQ(back.targets, cfg.targets);
}

TEST(Config, ShippedConfigsParseAndValidate) {
  for (const char* name : {"calibration.cfg", "vn530.cfg", "vn1060.cfg", "m0_1000.cfg", "small.cfg"}) {
    const auto cfg = parse_config(std::string(ESPLACE_CONFIG_DIR) + "/" + name);
    EXPECT_NO_THROW(validate_params(cfg.scenario)) << name;
  }
}
