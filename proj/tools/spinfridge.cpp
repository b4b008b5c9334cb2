// Command-line entry point: spinfridge <config> [--mode M] [--seed N] [--out DIR]
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spinfridge/runner.hpp"
#include "spinfridge/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spin refrigerator model runner"};
  app.set_version_flag("--version", std::string(spinfridge::version));

  std::string config_path;
  app.add_option("config", config_path, "path to the run configuration (JSON)")->required();
  std::string mode;
  app.add_option("--mode", mode, "override the configured mode");
  std::int64_t seed = -1;
  app.add_option("--seed", seed, "override the configured seed (non-negative)");
  std::string out_dir;
  app.add_option("--out", out_dir, "override the configured output directory");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::string> mode_override;
  if (!mode.empty())
    mode_override = mode;
  std::optional<std::uint64_t> seed_override;
  if (seed >= 0)
    seed_override = static_cast<std::uint64_t>(seed);
  std::optional<std::filesystem::path> out_override;
  if (!out_dir.empty())
    out_override = out_dir;

  return spinfridge::io::run(config_path, mode_override, seed_override, out_override,
                             std::cout, std::cerr);
}
