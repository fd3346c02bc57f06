#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "lattice/errors.hpp"
#include "lattice/experiments.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kIoExit = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification harness for the forced three-component lattice Gray-Scott system"};
  app.set_version_flag("--version", std::string("lattice-attractor ") + std::string(lattice::kToolVersion) +
                                        " (csv schema " + std::string(lattice::kSchemaVersion) + ")");
  app.require_subcommand(1);

  std::string run_config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run one verification scenario and write CSVs plus a manifest");
  run->add_option("--config", run_config, "Config file")->required();
  std::string valid;
  for (const auto& n : lattice::scenario_names()) valid += (valid.empty() ? "" : "|") + n;
  run->add_option("--scenario", scenario, "Scenario: " + valid)->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (default: experiment.output_dir)");

  std::string constants_config;
  auto* constants = app.add_subcommand("constants", "Print the derived constants as a CSV row");
  constants->add_option("--config", constants_config, "Config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*constants) {
      const auto cfg = lattice::load_config(constants_config);
      std::cout << lattice::format_csv(lattice::constants_table(lattice::derive_constants(cfg.params)));
      return 0;
    }
    auto cfg = lattice::load_config(run_config);
    if (seed) cfg.experiment.seed = *seed;
    const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
    const auto manifest = lattice::run_scenario(cfg, scenario, out);
    for (const auto& f : manifest.failures) std::cerr << "estimate check: " << f << '\n';
    std::cout << (out / (manifest.scenario + "_manifest.json")).string() << '\n';
    return 0;
  } catch (const lattice::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const lattice::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoExit;
  }
}
