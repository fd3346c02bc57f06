#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lattice/errors.hpp"
#include "lattice/experiments.hpp"
#include "test_helpers.hpp"

using namespace lattice;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(LATTICE_BINARY_DIR) / "test-scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string error_text(const std::string& cfg) {
  try {
    parse_config(cfg, "bad.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("shipped default config") {
  const ExperimentConfig c = load_config(fs::path(LATTICE_SOURCE_DIR) / "configs" / "default.ini");
  const DerivedConstants d = derive_constants(c.params);
  CHECK(d.mu == doctest::Approx(2.5));
  CHECK(d.theta1 == doctest::Approx(0.5));
  CHECK(c.params.window_radius() == 50);
  CHECK(c.integrator.h == 1e-3);
}

TEST_CASE("config validation") {
  SUBCASE("k = 2 beta violates the left inequality") {
    const std::string msg = error_text("[model]\nk = 0.2\nbeta = 0.1\n");
    CHECK(msg.find("2β<k") != std::string::npos);
  }
  SUBCASE("unknown key carries the line number") {
    const std::string msg = error_text("[model]\nd1 = 0.1\nfoo = 3\n");
    CHECK(msg.find("bad.ini:3") != std::string::npos);
    CHECK(msg.find("foo") != std::string::npos);
  }
  SUBCASE("unknown section") { CHECK(error_text("[nope]\n").find("bad.ini:1") != std::string::npos); }
  SUBCASE("duplicate key") { CHECK(error_text("[model]\nk = 0.25\nk = 0.25\n").find("bad.ini:3") != std::string::npos); }
  SUBCASE("nonpositive step") { CHECK_FALSE(error_text("[integrator]\nh = 0\n").empty()); }
  SUBCASE("kappa disagrees with the frequency list") {
    CHECK_FALSE(error_text("[model]\nkappa = 3\nfrequencies = 1, 2\n").empty());
  }
  SUBCASE("missing keys are reported as defaulted") {
    const ExperimentConfig c = parse_config("[model]\nd1 = 0.2\n");
    CHECK(c.params.d1 == 0.2);
    const auto& d = c.defaults_applied;
    CHECK(std::find(d.begin(), d.end(), "model.d2") != d.end());
    CHECK(std::find(d.begin(), d.end(), "model.d1") == d.end());
    CHECK(std::find(d.begin(), d.end(), "integrator.h") != d.end());
  }
}

TEST_CASE("config hash") {
  const ExperimentConfig a = parse_config("[model]\nd1 = 0.1\n");
  const ExperimentConfig b = parse_config("# comment\n[model]\nd1=0.1\n");
  const ExperimentConfig c = parse_config("[model]\nd1 = 0.11\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a) == config_hash(ExperimentConfig::defaults()));
}

TEST_CASE("csv format") {
  SUBCASE("header only") {
    const CsvTable t{{"a", "b"}, {}};
    CHECK(format_csv(t) == "a,b\n");
    const CsvTable back = parse_csv(format_csv(t));
    CHECK(back.header == t.header);
    CHECK(back.rows.empty());
  }
  SUBCASE("one row round trip") {
    const CsvTable t{{"x"}, {{0.1}}};
    CHECK(format_csv(t) == "x\n0.10000000000000001\n");
    CHECK(parse_csv(format_csv(t)).rows[0][0] == 0.1);
  }
  SUBCASE("1000 random rows round trip bitwise with LF endings") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    CsvTable t{{"a", "b", "c"}, {}};
    for (int i = 0; i < 1000; ++i) t.rows.push_back({u(rng), u(rng) * 1e-300, u(rng) * 1e290});
    const std::string text = format_csv(t);
    CHECK(text.find('\r') == std::string::npos);
    const CsvTable back = parse_csv(text);
    REQUIRE(back.rows.size() == 1000);
    for (int i = 0; i < 1000; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(std::bit_cast<std::uint64_t>(back.rows[i][j]) == std::bit_cast<std::uint64_t>(t.rows[i][j]));
    }
  }
  SUBCASE("unwritable path") {
    const fs::path dir = scratch("csv-io");
    CHECK_THROWS_AS(emit_csv(CsvTable{{"a"}, {}}, dir / "missing" / "x.csv"), IoError);
  }
}

TEST_CASE("scenario dispatch") {
  const ExperimentConfig c = parse_config(testing_support::reduced_config_text());
  SUBCASE("unknown name lists the valid ones") {
    try {
      run_scenario(c, "nonsense", scratch("unknown"));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("absorbing") != std::string::npos);
    }
  }
  SUBCASE("constants scenario writes one row") {
    const fs::path dir = scratch("constants");
    const RunManifest m = run_scenario(c, "constants", dir);
    const CsvTable t = parse_csv(slurp(dir / "constants.csv"));
    CHECK(t.header.front() == "mu");
    CHECK(t.rows.size() == 1);
    CHECK(fs::exists(dir / "constants_manifest.json"));
    const auto j = nlohmann::json::parse(slurp(dir / "constants_manifest.json"));
    CHECK(j.at("config_hash") == config_hash(c));
    CHECK(j.at("seed") == 7);
    CHECK(j.contains("tool_version"));
    CHECK(m.scenario == "constants");
  }
  SUBCASE("a small run is reproducible") {
    const fs::path d1 = scratch("rep1"), d2 = scratch("rep2");
    run_scenario(c, "lipschitz", d1);
    run_scenario(c, "lipschitz", d2);
    CHECK(slurp(d1 / "lipschitz.csv") == slurp(d2 / "lipschitz.csv"));
    CHECK_FALSE(slurp(d1 / "lipschitz.csv").empty());
  }
}
