#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lattice/estimates.hpp"
#include "lattice/integrator.hpp"
#include "lattice/model.hpp"

namespace lattice {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kSchemaVersion = "1";

// Ensemble sizes and experiment grids. Every field has a config key in [experiment].
struct ExperimentSettings {
  std::uint64_t seed = 20240601;

  int absorbing_samples = 20;
  int absorbing_symbols = 5;
  double absorbing_radius = 10.0;
  double absorbing_horizon = 40.0;
  double absorbing_dt = 0.01;

  int tail_samples = 20;
  double tail_epsilon = 0.1;
  std::vector<double> tail_times = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<long long> tail_radii = {1, 2, 4, 8, 16, 32};

  int lipschitz_pairs = 1000;
  std::vector<double> lipschitz_times;  // empty means {T0, 1}

  int squeeze_pairs = 100;
  double squeeze_T_span = 40.0;
  double squeeze_T_step = 0.05;
  int squeeze_max_log2_N3 = 62;
  double t2_offset = 1.0;

  double burn_in = 20.0;
  int attractor_symbols = 6;
  int attractor_samples = 1;
  int symbol_grid = 16;  // points per torus axis for the fine family
  int section_depths = 2;
  double section_depth_step = 1.0;
  std::vector<double> invariance_times = {1.0, 2.0};

  int forward_samples = 20;
  double forward_radius = 5.0;
  int forward_symbols = 8;
  double forward_horizon = 30.0;
  double forward_dt = 0.25;
};

struct ExperimentConfig {
  ModelParams params;
  // amplitudes of the inverse-square coefficient profiles
  double a0 = 0.03, b1_0 = 0.003, b2_0 = 0.003, b3_0 = 0.003;
  IntegratorConfig integrator;
  Tolerances tolerances;
  ExperimentSettings experiment;
  std::string output_dir = "out";
  std::vector<std::string> defaults_applied;  // "section.key" entries absent from the file

  static ExperimentConfig defaults();
  // Re-derives params from the scalar fields (window, amplitudes, frequencies) and validates.
  void rebuild();
  // Deterministic text form of every effective setting, used for hashing.
  std::string canonical() const;
};

ExperimentConfig parse_config(std::string_view text, std::string_view origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string config_hash(const ExperimentConfig& config);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_number(double value);
std::string format_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

CsvTable constants_table(const DerivedConstants& c);

struct RunManifest {
  std::string scenario;
  std::string config_hash;
  std::uint64_t seed = 0;
  DerivedConstants constants;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  double richardson_estimate = 0.0;
  std::vector<std::string> defaults_applied;
  std::vector<std::string> failures;  // estimate violations and search failures; data, not errors
  nlohmann::json substreams = nlohmann::json::array();
  nlohmann::json results = nlohmann::json::object();

  nlohmann::json to_json() const;
};

const std::vector<std::string>& scenario_names();

/// Runs one scenario, writes its CSVs and `<scenario>_manifest.json` into
/// out_dir, and returns the manifest. Throws ConfigError for unknown names
/// and IoError when outputs cannot be written.
RunManifest run_scenario(const ExperimentConfig& config, std::string_view name, const std::filesystem::path& out_dir);

}  // namespace lattice
