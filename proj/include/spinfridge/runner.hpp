// runner.hpp: executes one configured run end to end: dispatch by mode,
// atomic artifact writes, and the machine-readable manifest that makes the
// run reproducible (input hashes, versions, seed, resolved configuration).
#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "spinfridge/config.hpp"
#include "spinfridge/fit.hpp"
#include "spinfridge/io.hpp"
#include "spinfridge/model.hpp"
#include "spinfridge/network.hpp"
#include "spinfridge/pump.hpp"
#include "spinfridge/sweeps.hpp"
#include "spinfridge/version.hpp"

namespace spinfridge::io {

namespace detail {

struct ModeResult {
  std::vector<std::pair<std::string, std::string>> files; // name -> content
  std::vector<std::string> summary;
  nlohmann::json results;
  int exit_code = 0;
  std::string diagnostic; // one line, set when exit_code != 0
};

[[nodiscard]] inline std::string format_hz_line(const char* label, double angular) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s: %.6g Hz", label, angular_to_hz(angular));
  return buf;
}

// GridSpec endpoints are in Hz; conversion happens per point (see GridSpec).
[[nodiscard]] inline std::vector<double> angular_grid(const GridSpec& spec) {
  std::vector<double> grid = linspace(spec.lo, spec.hi, static_cast<std::size_t>(spec.points));
  for (double& x : grid)
    x = hz_to_angular(x);
  return grid;
}

[[nodiscard]] inline std::vector<double> angular_log_grid(const GridSpec& spec) {
  std::vector<double> grid = log_spaced(spec.lo, spec.hi, static_cast<std::size_t>(spec.points));
  for (double& x : grid)
    x = hz_to_angular(x);
  return grid;
}

[[nodiscard]] inline ModeResult run_spectrum(const RunConfig& config) {
  const SpectrumJob& job = *config.spectrum;
  const ThermalEnv env = make_thermal_env(*config.temperature_k, config.system->omega_c);
  const auto omega_grid = angular_grid(job.omega);
  const fitting::NoiseMap map = fitting::forward_model(
      *config.system, *config.bath, env, job.loss_db, {job.delta}, omega_grid);

  Spectrum spec;
  spec.detuning_grid = omega_grid;
  spec.values = map.values;

  double lowest = 0.0;
  double at = 0.0;
  for (std::size_t j = 0; j < omega_grid.size(); ++j) {
    if (spec.values[j] < lowest) {
      lowest = spec.values[j];
      at = omega_grid[j];
    }
  }

  ModeResult result;
  result.files.emplace_back("spectrum.csv", export_spectrum_csv(spec));
  char line[128];
  std::snprintf(line, sizeof(line), "deepest point: %.4f dB at %.6g Hz", lowest,
                angular_to_hz(at));
  result.summary = {format_hz_line("bias detuning", job.delta), line};
  result.results = {{"min_db", lowest}, {"argmin_omega_hz", hz_representation(at)}};
  return result;
}

[[nodiscard]] inline ModeResult run_map(const RunConfig& config) {
  const MapJob& job = *config.map;
  const ThermalEnv env = make_thermal_env(*config.temperature_k, config.system->omega_c);
  const fitting::NoiseMap map =
      fitting::forward_model(*config.system, *config.bath, env, job.loss_db,
                             angular_grid(job.delta), angular_grid(job.omega));

  double lowest = 0.0;
  for (double v : map.values)
    lowest = std::min(lowest, v);

  ModeResult result;
  const bool csv = config.map_format == MapFormat::CSV;
  result.files.emplace_back(csv ? "noise_map.csv" : "noise_map.json",
                            export_noise_map(map, config.map_format));
  char line[128];
  std::snprintf(line, sizeof(line), "%zu x %zu map, deepest point %.4f dB",
                map.delta_grid.size(), map.omega_grid.size(), lowest);
  result.summary = {line};
  result.results = {{"min_db", lowest},
                    {"delta_points", map.delta_grid.size()},
                    {"omega_points", map.omega_grid.size()}};
  return result;
}

[[nodiscard]] inline ModeResult run_fit(const RunConfig& config,
                                        const std::filesystem::path& map_path) {
  const FitJob& job = *config.fit;
  const fitting::NoiseMap map = import_noise_map(map_path, config.map_format);

  fitting::FitResult fit_result;
  try {
    fit_result = fitting::fit(map, job.fixed, job.init, job.options);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("fit: ") + err.what());
  }

  ModeResult result;
  result.files.emplace_back("fit_result.json", export_fit_result(fit_result));

  nlohmann::json recovered;
  for (const auto& [name, value] : fit_result.parameters) {
    const bool rate = name == "g" || name == "r" || name == "kappa" || name == "gamma";
    recovered[rate ? name + "_hz" : name] = rate ? angular_to_hz(value) : value;
  }
  result.results = {{"converged", fit_result.converged},
                    {"iterations", fit_result.iterations},
                    {"residual_norm", fit_result.residual_norm},
                    {"jacobian_condition", fit_result.jacobian_condition},
                    {"recovered", recovered}};

  result.summary.push_back(fit_result.converged ? "fit converged" : "fit did NOT converge");
  for (const auto& [name, value] : fit_result.parameters) {
    char line[128];
    if (name == "g" || name == "r" || name == "kappa" || name == "gamma")
      std::snprintf(line, sizeof(line), "%s = %.6g Hz", name.c_str(), angular_to_hz(value));
    else
      std::snprintf(line, sizeof(line), "%s = %.6g", name.c_str(), value);
    result.summary.emplace_back(line);
  }
  return result;
}

[[nodiscard]] inline ModeResult run_sweep_power(const RunConfig& config) {
  const SweepPowerJob& job = *config.sweep_power;
  const ThermalEnv env = make_thermal_env(*config.temperature_k, config.system->omega_c);
  std::vector<sweeps::PowerPoint> rows;
  try {
    rows = sweeps::cooling_vs_power(job.powers_w, *config.pump_config, *config.system, env,
                                    job.scaling, job.loss_db);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("sweep-power: ") + err.what());
  }

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["scaling"] = config.resolved["sweep-power"]["scaling"];
  meta["loss_db"] = job.loss_db;
  meta["pump"] = config.resolved["pump"];
  meta["system"] = config.resolved["system"];
  meta["ambient_k"] = *config.temperature_k;

  ModeResult result;
  result.files.emplace_back("cooling_power.csv", export_power_rows_csv(rows));
  result.files.emplace_back("cooling_power.meta.json", meta.dump(2) + "\n");
  char line[128];
  std::snprintf(line, sizeof(line), "%zu powers, deepest %.4f dB at %.3g W", rows.size(),
                rows.back().peak_db, rows.back().power_w);
  result.summary = {line};
  result.results = {{"last_peak_db", rows.back().peak_db},
                    {"last_inferred_kelvin", rows.back().inferred_kelvin}};
  return result;
}

[[nodiscard]] inline ModeResult run_sweep_gq(const RunConfig& config) {
  const SweepGqJob& job = *config.sweep_gq;
  const ThermalEnv env = make_thermal_env(*config.temperature_k, job.assumptions.omega_c);
  const auto g_grid = angular_log_grid(job.g);
  const auto q_grid = log_spaced(job.q.lo, job.q.hi, static_cast<std::size_t>(job.q.points));
  sweeps::TemperatureMap map;
  try {
    map = sweeps::min_temperature_map(g_grid, q_grid, job.polarization, env, job.assumptions);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("sweep-gq: ") + err.what());
  } catch (const std::domain_error& err) {
    throw ConfigError(std::string("sweep-gq: ") + err.what());
  }

  nlohmann::json meta = nlohmann::json::parse(export_temperature_map_meta(map));
  meta["grid_spacing"] = "log";

  double coldest = map.min_temperature.front();
  for (double t : map.min_temperature)
    coldest = std::min(coldest, t);

  ModeResult result;
  result.files.emplace_back("temperature_map.csv", export_temperature_map_csv(map));
  result.files.emplace_back("temperature_map.meta.json", meta.dump(2) + "\n");
  char line[128];
  std::snprintf(line, sizeof(line), "%zu x %zu map, coldest cell %.4g K", g_grid.size(),
                q_grid.size(), coldest);
  result.summary = {line};
  result.results = {{"coldest_k", coldest}};
  return result;
}

[[nodiscard]] inline ModeResult run_cable(const RunConfig& config) {
  const CableJob& job = *config.cable;
  std::vector<double> depths;
  try {
    depths = sweeps::cable_decay(job.depth0_k, job.lengths_m, job.alpha_m);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("cable: ") + err.what());
  }

  ModeResult result;
  result.files.emplace_back("cable.csv", export_cable_csv(job.lengths_m, depths));
  char line[128];
  std::snprintf(line, sizeof(line), "depth %.4g K -> %.4g K over %.3g m", job.depth0_k,
                depths.back(), job.lengths_m.back());
  result.summary = {line};
  result.results = {{"final_depth_k", depths.back()}};
  return result;
}

// Compares the network evaluation against the closed forms: frequency
// spectrum pointwise and steady-state cavity occupation, at the configured
// parameters plus seeded random draws over the validity envelope.
[[nodiscard]] inline ModeResult run_oracle_check(const RunConfig& config) {
  const OracleJob& job = *config.oracle;
  if (!config.bath->single_ensemble() || config.bath->hyperfine_offsets.front() != 0.0)
    throw ConfigError("oracle-check: bath must be a single resonant ensemble");

  double worst = 0.0;
  const auto check_point = [&](const SystemParams& params, const SpinBath& bath,
                               const ThermalEnv& env, std::size_t points) {
    const double span =
        4.0 * std::max({params.g, params.r, params.kappa + params.gamma});
    const auto grid = linspace(-span, span, points);
    const auto net = langevin::build_network(params, 0.0, bath, env);
    const Spectrum simulated = langevin::frequency_spectrum(net, grid);
    const Spectrum closed = output_spectrum(params, 0.0, bath, env, grid);
    for (std::size_t j = 0; j < grid.size(); ++j)
      worst = std::max(worst, std::abs(simulated.values[j] - closed.values[j]) /
                                  closed.values[j]);
    const double occupation = langevin::steady_state_occupations(net).front();
    const double direct = mean_photon_number(params, bath, env);
    worst = std::max(worst, std::abs(occupation - direct) / direct);
  };

  const ThermalEnv env = make_thermal_env(*config.temperature_k, config.system->omega_c);
  check_point(*config.system, *config.bath, env, static_cast<std::size_t>(job.omega_points));

  for (int draw = 0; draw < job.draws; ++draw) {
    pump::detail::SampleStream stream(config.seed, static_cast<std::uint64_t>(draw));
    const auto rate = [&]() { return hz_to_angular(std::pow(10.0, 3.0 + 4.0 * stream.uniform01())); };
    SystemParams params;
    params.g = rate();
    params.kappa = rate();
    params.gamma = rate();
    params.r = rate();
    params.omega_c = config.system->omega_c;
    const SpinBath bath{0.05 + 0.95 * stream.uniform01()};
    const ThermalEnv draw_env =
        make_thermal_env(4.0 + 396.0 * stream.uniform01(), params.omega_c);
    check_point(params, bath, draw_env, 101);
  }

  ModeResult result;
  char line[160];
  std::snprintf(line, sizeof(line),
                "oracle-check: max relative deviation %.3e over %d draws (tolerance %.1e)",
                worst, job.draws, job.tolerance);
  result.summary = {line};
  result.results = {{"max_relative_deviation", worst},
                    {"tolerance", job.tolerance},
                    {"draws", job.draws},
                    {"pass", worst < job.tolerance}};
  if (!(worst < job.tolerance)) {
    result.exit_code = 4;
    result.diagnostic = line;
  }
  return result;
}

} // namespace detail

// Executes the configuration at `config_path` and reports the process exit
// status. Diagnostics go to `err` as a single line; mode summaries go to `out`.
[[nodiscard]] inline int run(const std::filesystem::path& config_path,
                             const std::optional<std::string>& mode_override,
                             const std::optional<std::uint64_t>& seed_override,
                             const std::optional<std::filesystem::path>& out_override,
                             std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  try {
    std::string text;
    try {
      text = read_text_file(config_path);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    const RunConfig config = parse_run_config(text, mode_override, seed_override, out_override);

    nlohmann::json inputs;
    inputs[config_path.string()] = hash_file_hex(config_path);
    std::filesystem::path map_path;
    if (config.mode == RunMode::FIT) {
      map_path = config.noise_map_path;
      if (map_path.is_relative())
        map_path = config_path.parent_path() / map_path;
      if (!std::filesystem::exists(map_path))
        throw DataError("input file '" + map_path.string() + "' does not exist");
      inputs[map_path.string()] = hash_file_hex(map_path);
    }

    detail::ModeResult mode_result;
    switch (config.mode) {
    case RunMode::SPECTRUM:
      mode_result = detail::run_spectrum(config);
      break;
    case RunMode::MAP:
      mode_result = detail::run_map(config);
      break;
    case RunMode::FIT:
      mode_result = detail::run_fit(config, map_path);
      break;
    case RunMode::SWEEP_POWER:
      mode_result = detail::run_sweep_power(config);
      break;
    case RunMode::SWEEP_GQ:
      mode_result = detail::run_sweep_gq(config);
      break;
    case RunMode::CABLE:
      mode_result = detail::run_cable(config);
      break;
    case RunMode::ORACLE_CHECK:
      mode_result = detail::run_oracle_check(config);
      break;
    }

    std::filesystem::create_directories(config.output_dir);
    nlohmann::json output_names = nlohmann::json::array();
    for (const auto& [name, content] : mode_result.files) {
      write_text_atomic(config.output_dir / name, content);
      output_names.push_back(name);
    }

    std::string summary = "spinfridge " + std::string(version) + ", mode " +
                          mode_name(config.mode) + "\n";
    for (const std::string& line : mode_result.summary)
      summary += line + "\n";
    write_text_atomic(config.output_dir / "summary.txt", summary);
    output_names.push_back("summary.txt");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const char* cap = std::getenv("SPINFRIDGE_THREADS");
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["tool"] = {{"name", "spinfridge"}, {"version", std::string(version)}};
    manifest["versions"] = {
        {"compiler", __VERSION__},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["mode"] = mode_name(config.mode);
    manifest["seed"] = config.seed;
    manifest["inputs"] = inputs;
    manifest["outputs"] = output_names;
    manifest["wall_time_s"] = wall;
    manifest["threads"] = {{"hardware", std::thread::hardware_concurrency()},
                           {"cap", cap ? cap : ""}};
    manifest["resolved_config"] = config.resolved;
    manifest["results"] = mode_result.results;
    write_text_atomic(config.output_dir / "manifest.json", manifest.dump(2) + "\n");

    for (const std::string& line : mode_result.summary)
      out << line << "\n";
    if (mode_result.exit_code != 0) {
      err << mode_result.diagnostic << "\n";
      return mode_result.exit_code;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  }
}

} // namespace spinfridge::io
