#include <doctest.h>

#include "tbent/config.hpp"
#include "tbent/errors.hpp"

#include <fstream>

using namespace tbent;

TEST_CASE("empty config yields defaults") {
  const auto c = config_from_json({{"schema_version", 1}});
  CHECK(c.source.rep_rate == 1e8);
  CHECK(c.losses.total_db() == doctest::Approx(15.5));
  CHECK(c.detectors.dark_count_rate == 100.0);
}

TEST_CASE("unknown keys and versions are rejected") {
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"sorce", nlohmann::json::object()}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"source", {{"pump_pwr", 1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 2}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::object()), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"source", {{"pump_power_mw", "x"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"source", {{"pump_power_mw", 1.0}}}}),
                  OutOfModelError);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c;
  c.source.pump_power = 0.05;
  c.source.phase_jitter_std = 0.3;
  c.optics.converter = optics::UmziConfig::converter(0.1, 0.2);
  c.optics.analyzers[2] = {Channel::s2, 0.5, 0.25};
  c.losses.channel_scale = {1, 0.5, 1, 1};
  c.analysis.four_qubit_scheme = analysis::TomographyScheme::projectors;
  c.phasematch.dispersion_files = {"a.csv"};
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.source.pump_power == 0.05);
  CHECK(back.source.phase_jitter_std == 0.3);
  CHECK(back.optics.converter.phase_of(Channel::i2) == doctest::Approx(0.2));
  CHECK(back.optics.analyzers[2].qwp == doctest::Approx(0.25));
  CHECK(back.losses.channel_scale[1] == 0.5);
  CHECK(back.analysis.four_qubit_scheme == analysis::TomographyScheme::projectors);
  CHECK(back.phasematch.dispersion_files.size() == 1);
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"default.json", "calibrated_noise.json", "calibrated_noise_bright.json", "noiseless.json", "characterization.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(TBENT_FIXTURE_DIR) + "/../configs/" + name));
  }
}

TEST_CASE("documented defaults flag assumptions") {
  const auto docs = documented_defaults();
  auto find = [&](const std::string& key) {
    for (const auto& d : docs) {
      if (d.key == key) return d;
    }
    FAIL("missing key " << key);
    return DefaultDoc{};
  };
  CHECK(find("detectors.dark_count_rate_hz").assumption);
  CHECK(find("source.phase_jitter_std_rad").assumption);
  CHECK(find("source.statistics").assumption);
  CHECK_FALSE(find("losses.coupling_db").assumption);
}
