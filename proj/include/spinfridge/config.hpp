// config.hpp: the run configuration file. One JSON document drives every
// mode; parsing is strict (unknown keys are errors), physics parameters have
// no silent defaults, and numerical knobs that do default are echoed into the
// resolved configuration so the manifest records them.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinfridge/io.hpp"
#include "spinfridge/model.hpp"
#include "spinfridge/pump.hpp"
#include "spinfridge/sweeps.hpp"

namespace spinfridge::io {

enum class RunMode { SPECTRUM, MAP, FIT, SWEEP_POWER, SWEEP_GQ, CABLE, ORACLE_CHECK };

[[nodiscard]] inline std::string mode_name(RunMode mode) {
  switch (mode) {
  case RunMode::SPECTRUM:
    return "spectrum";
  case RunMode::MAP:
    return "map";
  case RunMode::FIT:
    return "fit";
  case RunMode::SWEEP_POWER:
    return "sweep-power";
  case RunMode::SWEEP_GQ:
    return "sweep-gq";
  case RunMode::CABLE:
    return "cable";
  case RunMode::ORACLE_CHECK:
    return "oracle-check";
  }
  return "unknown";
}

[[nodiscard]] inline RunMode mode_from_name(const std::string& name) {
  for (RunMode mode : {RunMode::SPECTRUM, RunMode::MAP, RunMode::FIT, RunMode::SWEEP_POWER,
                       RunMode::SWEEP_GQ, RunMode::CABLE, RunMode::ORACLE_CHECK})
    if (mode_name(mode) == name)
      return mode;
  throw ConfigError("unknown mode '" + name +
                    "' (want spectrum, map, fit, sweep-power, sweep-gq, cable, oracle-check)");
}

// Inclusive range endpoints. Frequency grids keep the endpoints in Hz and are
// converted point by point when materialized, so every grid value is an exact
// two_pi multiple of a representable Hz number and files round trip bit for bit.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

struct SpectrumJob {
  double delta = 0.0; // rad/s
  GridSpec omega;     // Hz
  double loss_db = 0.0;
};

struct MapJob {
  GridSpec delta;
  GridSpec omega;
  double loss_db = 0.0;
};

struct FitJob {
  fitting::NamedValues fixed;
  fitting::NamedValues init;
  fitting::FitOptions options;
};

struct SweepPowerJob {
  std::vector<double> powers_w;
  pump::CouplingScaling scaling = pump::CouplingScaling::LINEAR;
  double loss_db = 0.0;
};

struct SweepGqJob {
  GridSpec g; // Hz
  GridSpec q; // dimensionless
  double polarization = 0.0;
  sweeps::SweepAssumptions assumptions;
};

struct CableJob {
  double depth0_k = 0.0;
  double alpha_m = 0.0;
  std::vector<double> lengths_m;
};

struct OracleJob {
  int draws = 50;
  double tolerance = 1e-8;
  int omega_points = 401;
};

struct RunConfig {
  RunMode mode = RunMode::SPECTRUM;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = ".";
  std::filesystem::path noise_map_path;
  MapFormat map_format = MapFormat::CSV;

  std::optional<SystemParams> system;
  std::optional<SpinBath> bath;
  std::optional<double> temperature_k;
  std::optional<pump::PumpConfig> pump_config;

  std::optional<SpectrumJob> spectrum;
  std::optional<MapJob> map;
  std::optional<FitJob> fit;
  std::optional<SweepPowerJob> sweep_power;
  std::optional<SweepGqJob> sweep_gq;
  std::optional<CableJob> cable;
  std::optional<OracleJob> oracle;

  nlohmann::json resolved; // final configuration with defaults filled in
};

namespace detail {

// Object wrapper that records key access; leftover keys fail the parse.
class ObjectView {
public:
  ObjectView(const nlohmann::json& node, std::string context)
      : node_(node), context_(std::move(context)) {
    if (!node.is_object())
      throw ConfigError("'" + context_ + "' must be an object");
  }

  [[nodiscard]] const nlohmann::json& require(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key))
      throw ConfigError("missing key '" + key + "' in " + context_);
    return node_.at(key);
  }

  [[nodiscard]] const nlohmann::json* optional(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (seen_.count(it.key()) == 0)
        throw ConfigError("unknown key '" + it.key() + "' in " + context_);
  }

  [[nodiscard]] const std::string& context() const { return context_; }

private:
  const nlohmann::json& node_;
  std::string context_;
  std::set<std::string> seen_;
};

[[nodiscard]] inline double as_number(const nlohmann::json& node, const std::string& where) {
  if (!node.is_number())
    throw ConfigError("'" + where + "' must be a number");
  return node.get<double>();
}

[[nodiscard]] inline long long as_integer(const nlohmann::json& node, const std::string& where) {
  if (!node.is_number_integer())
    throw ConfigError("'" + where + "' must be an integer");
  return node.get<long long>();
}

[[nodiscard]] inline std::string as_string(const nlohmann::json& node, const std::string& where) {
  if (!node.is_string())
    throw ConfigError("'" + where + "' must be a string");
  return node.get<std::string>();
}

// Frequencies: plain numbers are Hz; strings may carry a Hz/kHz/MHz/GHz
// suffix. Conversion to angular units happens here and only here.
[[nodiscard]] inline double frequency_hz(const nlohmann::json& node, const std::string& where) {
  if (node.is_number())
    return node.get<double>();
  if (!node.is_string())
    throw ConfigError("'" + where + "' must be a number in Hz or a string with a unit suffix");
  std::string text = io::detail::trim(node.get<std::string>());
  std::size_t split = text.size();
  while (split > 0 && (std::isalpha(static_cast<unsigned char>(text[split - 1]))))
    --split;
  std::string suffix = text.substr(split);
  for (char& c : suffix)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  double scale = 0.0;
  if (suffix == "hz")
    scale = 1.0;
  else if (suffix == "khz")
    scale = 1e3;
  else if (suffix == "mhz")
    scale = 1e6;
  else if (suffix == "ghz")
    scale = 1e9;
  else
    throw ConfigError("'" + where + "' has unknown frequency suffix '" + suffix + "'");
  const std::string number = io::detail::trim(text.substr(0, split));
  char* end = nullptr;
  const double value = std::strtod(number.c_str(), &end);
  if (number.empty() || end != number.c_str() + number.size())
    throw ConfigError("'" + where + "' has a malformed frequency value '" + text + "'");
  return value * scale;
}

[[nodiscard]] inline double angular_frequency(const nlohmann::json& node,
                                              const std::string& where) {
  return hz_to_angular(frequency_hz(node, where));
}

[[nodiscard]] inline GridSpec frequency_grid(ObjectView& view, const std::string& prefix,
                                             double default_lo_hz, double default_hi_hz,
                                             int default_points, nlohmann::json& echo) {
  GridSpec grid;
  const auto* lo = view.optional(prefix + "_min_hz");
  const auto* hi = view.optional(prefix + "_max_hz");
  const auto* pts = view.optional(prefix + "_points");
  const double lo_hz =
      lo ? frequency_hz(*lo, view.context() + "." + prefix + "_min_hz") : default_lo_hz;
  const double hi_hz =
      hi ? frequency_hz(*hi, view.context() + "." + prefix + "_max_hz") : default_hi_hz;
  grid.points = pts ? static_cast<int>(as_integer(*pts, view.context() + "." + prefix + "_points"))
                    : default_points;
  if (!(lo_hz < hi_hz))
    throw ConfigError("'" + view.context() + "." + prefix + "_min_hz' must be below the maximum");
  if (grid.points < 2)
    throw ConfigError("'" + view.context() + "." + prefix + "_points' must be at least 2");
  grid.lo = lo_hz;
  grid.hi = hi_hz;
  echo[prefix + "_min_hz"] = lo_hz;
  echo[prefix + "_max_hz"] = hi_hz;
  echo[prefix + "_points"] = grid.points;
  return grid;
}

[[nodiscard]] inline SystemParams parse_system(const nlohmann::json& node, nlohmann::json& echo) {
  ObjectView view(node, "system");
  SystemParams params;
  params.g = angular_frequency(view.require("g_hz"), "system.g_hz");
  params.kappa = angular_frequency(view.require("kappa_hz"), "system.kappa_hz");
  params.gamma = angular_frequency(view.require("gamma_hz"), "system.gamma_hz");
  params.r = angular_frequency(view.require("r_hz"), "system.r_hz");
  params.omega_c = angular_frequency(view.require("omega_c_hz"), "system.omega_c_hz");
  view.finish();
  try {
    params.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("system: ") + err.what());
  }
  echo["g_hz"] = hz_representation(params.g);
  echo["kappa_hz"] = hz_representation(params.kappa);
  echo["gamma_hz"] = hz_representation(params.gamma);
  echo["r_hz"] = hz_representation(params.r);
  echo["omega_c_hz"] = hz_representation(params.omega_c);
  return params;
}

[[nodiscard]] inline CouplingSplitMode parse_split_mode(const nlohmann::json* node,
                                                        const std::string& where,
                                                        nlohmann::json& echo) {
  std::string name = "per-ensemble";
  if (node)
    name = as_string(*node, where);
  echo["coupling_split"] = name;
  if (name == "per-ensemble")
    return CouplingSplitMode::PER_ENSEMBLE;
  if (name == "equal-power")
    return CouplingSplitMode::EQUAL_POWER;
  throw ConfigError("'" + where + "' must be 'per-ensemble' or 'equal-power'");
}

[[nodiscard]] inline SpinBath parse_bath(const nlohmann::json& node, nlohmann::json& echo) {
  ObjectView view(node, "bath");
  SpinBath bath;
  bath.polarization = as_number(view.require("polarization"), "bath.polarization");
  const auto& offsets = view.require("hyperfine_offsets_hz");
  if (!offsets.is_array() || offsets.empty())
    throw ConfigError("'bath.hyperfine_offsets_hz' must be a non-empty array");
  bath.hyperfine_offsets.clear();
  nlohmann::json echo_offsets = nlohmann::json::array();
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    bath.hyperfine_offsets.push_back(
        angular_frequency(offsets[i], "bath.hyperfine_offsets_hz[" + std::to_string(i) + "]"));
    echo_offsets.push_back(hz_representation(bath.hyperfine_offsets.back()));
  }
  bath.coupling_split_mode =
      parse_split_mode(view.optional("coupling_split"), "bath.coupling_split", echo);
  view.finish();
  try {
    bath.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("bath: ") + err.what());
  }
  echo["polarization"] = bath.polarization;
  echo["hyperfine_offsets_hz"] = std::move(echo_offsets);
  return bath;
}

[[nodiscard]] inline double parse_env(const nlohmann::json& node, nlohmann::json& echo) {
  ObjectView view(node, "env");
  const double temperature = as_number(view.require("temperature_k"), "env.temperature_k");
  view.finish();
  if (!(temperature > 0.0))
    throw ConfigError("'env.temperature_k' must be positive");
  echo["temperature_k"] = temperature;
  return temperature;
}

[[nodiscard]] inline pump::PumpConfig parse_pump(const nlohmann::json& node,
                                                 nlohmann::json& echo) {
  ObjectView view(node, "pump");
  pump::PumpConfig cfg;
  cfg.eta_pump = as_number(view.require("eta_pump"), "pump.eta_pump");
  cfg.beam_diameter_mm = as_number(view.require("beam_diameter_mm"), "pump.beam_diameter_mm");
  if (const auto* heat = view.optional("heating_k_per_w"))
    cfg.heating_k_per_w = as_number(*heat, "pump.heating_k_per_w");
  if (const auto* base = view.optional("base_temperature_k"))
    cfg.base_temperature = as_number(*base, "pump.base_temperature_k");
  if (const auto* t1 = view.optional("t1")) {
    ObjectView t1_view(*t1, "pump.t1");
    if (const auto* v = t1_view.optional("a_sample"))
      cfg.t1_model.a_sample = as_number(*v, "pump.t1.a_sample");
    if (const auto* v = t1_view.optional("a_raman"))
      cfg.t1_model.a_raman = as_number(*v, "pump.t1.a_raman");
    if (const auto* v = t1_view.optional("a_orbach"))
      cfg.t1_model.a_orbach = as_number(*v, "pump.t1.a_orbach");
    if (const auto* v = t1_view.optional("delta_orbach_mev"))
      cfg.t1_model.delta_orbach_mev = as_number(*v, "pump.t1.delta_orbach_mev");
    t1_view.finish();
  }
  view.finish();
  try {
    cfg.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("pump: ") + err.what());
  }
  echo["eta_pump"] = cfg.eta_pump;
  echo["beam_diameter_mm"] = cfg.beam_diameter_mm;
  echo["heating_k_per_w"] = cfg.heating_k_per_w;
  echo["base_temperature_k"] = cfg.base_temperature;
  echo["t1"] = {{"a_sample", cfg.t1_model.a_sample},
                {"a_raman", cfg.t1_model.a_raman},
                {"a_orbach", cfg.t1_model.a_orbach},
                {"delta_orbach_mev", cfg.t1_model.delta_orbach_mev}};
  return cfg;
}

// Fit parameters by config key; rates arrive in Hz, loss in dB, P bare.
[[nodiscard]] inline fitting::NamedValues parse_fit_values(const nlohmann::json& node,
                                                           const std::string& where,
                                                           nlohmann::json& echo) {
  ObjectView view(node, where);
  fitting::NamedValues values;
  nlohmann::json echoed;
  for (const char* rate : {"g", "r", "kappa", "gamma"}) {
    if (const auto* v = view.optional(std::string(rate) + "_hz")) {
      values[rate] = angular_frequency(*v, where + "." + rate + "_hz");
      echoed[std::string(rate) + "_hz"] = hz_representation(values[rate]);
    }
  }
  if (const auto* v = view.optional("loss_db")) {
    values["loss_db"] = as_number(*v, where + ".loss_db");
    echoed["loss_db"] = values["loss_db"];
  }
  if (const auto* v = view.optional("P")) {
    values["P"] = as_number(*v, where + ".P");
    echoed["P"] = values["P"];
  }
  view.finish();
  echo = std::move(echoed);
  return values;
}

} // namespace detail

// Parses (and strictly validates) a configuration document. CLI overrides are
// applied before block requirements are checked, so a config may carry blocks
// for several modes and select between them at the command line.
[[nodiscard]] inline RunConfig parse_run_config(
    const std::string& text, const std::optional<std::string>& mode_override = {},
    const std::optional<std::uint64_t>& seed_override = {},
    const std::optional<std::filesystem::path>& out_override = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    std::string message = err.what();
    if (const auto nl = message.find('\n'); nl != std::string::npos)
      message.resize(nl);
    throw ConfigError("config is not valid JSON: " + message);
  }

  detail::ObjectView view(doc, "config");
  RunConfig config;
  nlohmann::json& resolved = config.resolved;

  const long long schema =
      detail::as_integer(view.require("schema_version"), "schema_version");
  if (schema != 1)
    throw ConfigError("unsupported schema_version " + std::to_string(schema) + " (want 1)");
  resolved["schema_version"] = 1;

  config.mode = mode_from_name(detail::as_string(view.require("mode"), "mode"));
  if (mode_override)
    config.mode = mode_from_name(*mode_override);
  resolved["mode"] = mode_name(config.mode);

  if (const auto* seed = view.optional("seed")) {
    const long long value = detail::as_integer(*seed, "seed");
    if (value < 0)
      throw ConfigError("'seed' must be non-negative");
    config.seed = static_cast<std::uint64_t>(value);
  }
  if (seed_override)
    config.seed = *seed_override;
  resolved["seed"] = config.seed;

  if (const auto* io_node = view.optional("io")) {
    detail::ObjectView io_view(*io_node, "io");
    if (const auto* out = io_view.optional("output_dir"))
      config.output_dir = detail::as_string(*out, "io.output_dir");
    if (const auto* path = io_view.optional("noise_map"))
      config.noise_map_path = detail::as_string(*path, "io.noise_map");
    if (const auto* format = io_view.optional("noise_map_format")) {
      const std::string name = detail::as_string(*format, "io.noise_map_format");
      if (name == "csv")
        config.map_format = MapFormat::CSV;
      else if (name == "structured-text")
        config.map_format = MapFormat::STRUCTURED;
      else
        throw ConfigError("'io.noise_map_format' must be 'csv' or 'structured-text'");
    }
    io_view.finish();
  }
  if (out_override)
    config.output_dir = *out_override;
  resolved["io"] = {{"output_dir", config.output_dir.string()},
                    {"noise_map", config.noise_map_path.string()},
                    {"noise_map_format",
                     config.map_format == MapFormat::CSV ? "csv" : "structured-text"}};

  if (const auto* system = view.optional("system")) {
    nlohmann::json echo;
    config.system = detail::parse_system(*system, echo);
    resolved["system"] = std::move(echo);
  }
  if (const auto* bath = view.optional("bath")) {
    nlohmann::json echo;
    config.bath = detail::parse_bath(*bath, echo);
    resolved["bath"] = std::move(echo);
  }
  if (const auto* env = view.optional("env")) {
    nlohmann::json echo;
    config.temperature_k = detail::parse_env(*env, echo);
    resolved["env"] = std::move(echo);
  }
  if (const auto* pump_node = view.optional("pump")) {
    nlohmann::json echo;
    config.pump_config = detail::parse_pump(*pump_node, echo);
    resolved["pump"] = std::move(echo);
  }

  if (const auto* node = view.optional("spectrum")) {
    detail::ObjectView job_view(*node, "spectrum");
    nlohmann::json echo;
    SpectrumJob job;
    job.delta = detail::angular_frequency(job_view.require("delta_hz"), "spectrum.delta_hz");
    echo["delta_hz"] = hz_representation(job.delta);
    job.loss_db = detail::as_number(job_view.require("loss_db"), "spectrum.loss_db");
    echo["loss_db"] = job.loss_db;
    job.omega = detail::frequency_grid(job_view, "omega", -1.0e6, 1.0e6, 801, echo);
    job_view.finish();
    config.spectrum = job;
    resolved["spectrum"] = std::move(echo);
  }

  if (const auto* node = view.optional("map")) {
    detail::ObjectView job_view(*node, "map");
    nlohmann::json echo;
    MapJob job;
    job.loss_db = detail::as_number(job_view.require("loss_db"), "map.loss_db");
    echo["loss_db"] = job.loss_db;
    job.delta = detail::frequency_grid(job_view, "delta", -3.0e6, 3.0e6, 41, echo);
    job.omega = detail::frequency_grid(job_view, "omega", -0.8e6, 0.8e6, 81, echo);
    job_view.finish();
    config.map = job;
    resolved["map"] = std::move(echo);
  }

  if (const auto* node = view.optional("fit")) {
    detail::ObjectView job_view(*node, "fit");
    nlohmann::json echo;
    FitJob job;
    nlohmann::json fixed_echo, init_echo;
    job.fixed = detail::parse_fit_values(job_view.require("fixed"), "fit.fixed", fixed_echo);
    job.init = detail::parse_fit_values(job_view.require("init"), "fit.init", init_echo);
    echo["fixed"] = std::move(fixed_echo);
    echo["init"] = std::move(init_echo);

    job.options.omega_c =
        detail::angular_frequency(job_view.require("omega_c_hz"), "fit.omega_c_hz");
    echo["omega_c_hz"] = hz_representation(job.options.omega_c);
    const auto& offsets = job_view.require("hyperfine_offsets_hz");
    if (!offsets.is_array() || offsets.empty())
      throw ConfigError("'fit.hyperfine_offsets_hz' must be a non-empty array");
    job.options.hyperfine_offsets.clear();
    nlohmann::json echo_offsets = nlohmann::json::array();
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      job.options.hyperfine_offsets.push_back(detail::angular_frequency(
          offsets[i], "fit.hyperfine_offsets_hz[" + std::to_string(i) + "]"));
      echo_offsets.push_back(hz_representation(job.options.hyperfine_offsets.back()));
    }
    echo["hyperfine_offsets_hz"] = std::move(echo_offsets);
    job.options.split_mode =
        detail::parse_split_mode(job_view.optional("coupling_split"), "fit.coupling_split", echo);
    if (const auto* v = job_view.optional("max_iterations"))
      job.options.max_iterations =
          static_cast<int>(detail::as_integer(*v, "fit.max_iterations"));
    if (const auto* v = job_view.optional("gradient_tolerance"))
      job.options.gradient_tolerance = detail::as_number(*v, "fit.gradient_tolerance");
    if (const auto* v = job_view.optional("step_tolerance"))
      job.options.step_tolerance = detail::as_number(*v, "fit.step_tolerance");
    if (const auto* v = job_view.optional("finite_difference_step"))
      job.options.finite_difference_step =
          detail::as_number(*v, "fit.finite_difference_step");
    echo["max_iterations"] = job.options.max_iterations;
    echo["gradient_tolerance"] = job.options.gradient_tolerance;
    echo["step_tolerance"] = job.options.step_tolerance;
    echo["finite_difference_step"] = job.options.finite_difference_step;
    job_view.finish();
    config.fit = job;
    resolved["fit"] = std::move(echo);
  }

  if (const auto* node = view.optional("sweep-power")) {
    detail::ObjectView job_view(*node, "sweep-power");
    nlohmann::json echo;
    SweepPowerJob job;
    const auto& powers = job_view.require("powers_w");
    if (!powers.is_array() || powers.empty())
      throw ConfigError("'sweep-power.powers_w' must be a non-empty array");
    for (std::size_t i = 0; i < powers.size(); ++i)
      job.powers_w.push_back(
          detail::as_number(powers[i], "sweep-power.powers_w[" + std::to_string(i) + "]"));
    echo["powers_w"] = job.powers_w;
    const std::string scaling =
        detail::as_string(job_view.require("scaling"), "sweep-power.scaling");
    if (scaling == "linear")
      job.scaling = pump::CouplingScaling::LINEAR;
    else if (scaling == "sqrt")
      job.scaling = pump::CouplingScaling::SQRT;
    else
      throw ConfigError("'sweep-power.scaling' must be 'linear' or 'sqrt'");
    echo["scaling"] = scaling;
    job.loss_db = detail::as_number(job_view.require("loss_db"), "sweep-power.loss_db");
    echo["loss_db"] = job.loss_db;
    job_view.finish();
    config.sweep_power = job;
    resolved["sweep-power"] = std::move(echo);
  }

  if (const auto* node = view.optional("sweep-gq")) {
    detail::ObjectView job_view(*node, "sweep-gq");
    nlohmann::json echo;
    SweepGqJob job;
    job.polarization = detail::as_number(job_view.require("polarization"),
                                         "sweep-gq.polarization");
    echo["polarization"] = job.polarization;
    job.assumptions.omega_c =
        detail::angular_frequency(job_view.require("omega_c_hz"), "sweep-gq.omega_c_hz");
    echo["omega_c_hz"] = hz_representation(job.assumptions.omega_c);
    job.g = detail::frequency_grid(job_view, "g", 10.0e3, 10.0e6, 41, echo);
    if (const auto* v = job_view.optional("q_min"))
      job.q.lo = detail::as_number(*v, "sweep-gq.q_min");
    else
      job.q.lo = 1.0e3;
    if (const auto* v = job_view.optional("q_max"))
      job.q.hi = detail::as_number(*v, "sweep-gq.q_max");
    else
      job.q.hi = 1.0e7;
    if (const auto* v = job_view.optional("q_points"))
      job.q.points = static_cast<int>(detail::as_integer(*v, "sweep-gq.q_points"));
    else
      job.q.points = 41;
    if (!(job.q.lo < job.q.hi) || job.q.points < 2)
      throw ConfigError("'sweep-gq' quality grid must be increasing with at least 2 points");
    echo["q_min"] = job.q.lo;
    echo["q_max"] = job.q.hi;
    echo["q_points"] = job.q.points;
    if (const auto* v = job_view.optional("view")) {
      const std::string name = detail::as_string(*v, "sweep-gq.view");
      if (name == "intracavity")
        job.assumptions.view = sweeps::TemperatureView::INTRACAVITY;
      else if (name == "output-min")
        job.assumptions.view = sweeps::TemperatureView::OUTPUT_MIN;
      else
        throw ConfigError("'sweep-gq.view' must be 'intracavity' or 'output-min'");
    }
    echo["view"] = job.assumptions.view == sweeps::TemperatureView::INTRACAVITY
                       ? "intracavity"
                       : "output-min";
    if (const auto* v = job_view.optional("coupling")) {
      const std::string name = detail::as_string(*v, "sweep-gq.coupling");
      if (name == "critical")
        job.assumptions.coupling = sweeps::CouplingRule::CRITICAL;
      else if (name == "uncoupled")
        job.assumptions.coupling = sweeps::CouplingRule::UNCOUPLED;
      else
        throw ConfigError("'sweep-gq.coupling' must be 'critical' or 'uncoupled'");
    }
    echo["coupling"] = job.assumptions.coupling == sweeps::CouplingRule::CRITICAL
                           ? "critical"
                           : "uncoupled";
    if (const auto* v = job_view.optional("rate_ratio"))
      job.assumptions.rate_ratio = detail::as_number(*v, "sweep-gq.rate_ratio");
    echo["rate_ratio"] = job.assumptions.rate_ratio;
    job_view.finish();
    config.sweep_gq = job;
    resolved["sweep-gq"] = std::move(echo);
  }

  if (const auto* node = view.optional("cable")) {
    detail::ObjectView job_view(*node, "cable");
    nlohmann::json echo;
    CableJob job;
    job.depth0_k = detail::as_number(job_view.require("depth0_k"), "cable.depth0_k");
    job.alpha_m = detail::as_number(job_view.require("alpha_m"), "cable.alpha_m");
    echo["depth0_k"] = job.depth0_k;
    echo["alpha_m"] = job.alpha_m;
    if (const auto* lengths = job_view.optional("lengths_m")) {
      if (!lengths->is_array() || lengths->empty())
        throw ConfigError("'cable.lengths_m' must be a non-empty array");
      for (std::size_t i = 0; i < lengths->size(); ++i)
        job.lengths_m.push_back(
            detail::as_number((*lengths)[i], "cable.lengths_m[" + std::to_string(i) + "]"));
    } else {
      job.lengths_m = linspace(0.0, 12.0, 49);
    }
    echo["lengths_m"] = job.lengths_m;
    job_view.finish();
    config.cable = job;
    resolved["cable"] = std::move(echo);
  }

  if (const auto* node = view.optional("oracle-check")) {
    detail::ObjectView job_view(*node, "oracle-check");
    nlohmann::json echo;
    OracleJob job;
    if (const auto* v = job_view.optional("draws")) {
      job.draws = static_cast<int>(detail::as_integer(*v, "oracle-check.draws"));
      if (job.draws < 0)
        throw ConfigError("'oracle-check.draws' must be non-negative");
    }
    if (const auto* v = job_view.optional("tolerance")) {
      job.tolerance = detail::as_number(*v, "oracle-check.tolerance");
      if (!(job.tolerance > 0.0))
        throw ConfigError("'oracle-check.tolerance' must be positive");
    }
    if (const auto* v = job_view.optional("omega_points")) {
      job.omega_points = static_cast<int>(detail::as_integer(*v, "oracle-check.omega_points"));
      if (job.omega_points < 2)
        throw ConfigError("'oracle-check.omega_points' must be at least 2");
    }
    echo["draws"] = job.draws;
    echo["tolerance"] = job.tolerance;
    echo["omega_points"] = job.omega_points;
    job_view.finish();
    config.oracle = job;
    resolved["oracle-check"] = std::move(echo);
  }

  view.finish();

  // Block requirements for the selected mode.
  const auto need = [&](bool present, const std::string& block) {
    if (!present)
      throw ConfigError("mode '" + mode_name(config.mode) + "' requires a '" + block +
                        "' block");
  };
  switch (config.mode) {
  case RunMode::SPECTRUM:
    need(config.system.has_value(), "system");
    need(config.bath.has_value(), "bath");
    need(config.temperature_k.has_value(), "env");
    need(config.spectrum.has_value(), "spectrum");
    break;
  case RunMode::MAP:
    need(config.system.has_value(), "system");
    need(config.bath.has_value(), "bath");
    need(config.temperature_k.has_value(), "env");
    need(config.map.has_value(), "map");
    break;
  case RunMode::FIT:
    need(config.temperature_k.has_value(), "env");
    need(config.fit.has_value(), "fit");
    if (config.noise_map_path.empty())
      throw ConfigError("mode 'fit' requires 'io.noise_map'");
    break;
  case RunMode::SWEEP_POWER:
    need(config.system.has_value(), "system");
    need(config.temperature_k.has_value(), "env");
    need(config.pump_config.has_value(), "pump");
    need(config.sweep_power.has_value(), "sweep-power");
    break;
  case RunMode::SWEEP_GQ:
    need(config.temperature_k.has_value(), "env");
    need(config.sweep_gq.has_value(), "sweep-gq");
    break;
  case RunMode::CABLE:
    need(config.cable.has_value(), "cable");
    break;
  case RunMode::ORACLE_CHECK:
    need(config.system.has_value(), "system");
    need(config.bath.has_value(), "bath");
    need(config.temperature_k.has_value(), "env");
    need(config.oracle.has_value(), "oracle-check");
    break;
  }
  if (config.mode == RunMode::FIT && config.fit)
    config.fit->options.temperature = *config.temperature_k;
  return config;
}

} // namespace spinfridge::io
