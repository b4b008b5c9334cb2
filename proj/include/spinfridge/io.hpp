// io.hpp: file formats and disk plumbing for the command-line tool: CSV and
// structured-text (JSON) noise maps, result exports, content hashing, and
// atomic writes. Frequencies cross the file boundary in plain Hz; conversion
// to angular units happens in exactly one place per direction.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "spinfridge/constants.hpp"
#include "spinfridge/fit.hpp"
#include "spinfridge/model.hpp"
#include "spinfridge/sweeps.hpp"

namespace spinfridge::io {

// Error categories drive the process exit status: configuration problems,
// data-file problems, and (everything else) numerical failures.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MapFormat { CSV, STRUCTURED };

[[nodiscard]] inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Hz value whose reconstruction (multiplication by 2 pi) reproduces the
// angular argument bit-exactly, so export -> import is the identity.
[[nodiscard]] inline double hz_representation(double angular) {
  const double hz = angular / two_pi;
  if (hz * two_pi == angular)
    return hz;
  for (double dir : {std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()}) {
    const double candidate = std::nextafter(hz, dir);
    if (candidate * two_pi == angular)
      return candidate;
  }
  return hz;
}

//
// Hashing and atomic writes
//

[[nodiscard]] inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot read file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

[[nodiscard]] inline std::string hash_file_hex(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(content.data(), content.size())));
  return buf;
}

// Full content to a sibling temp file, then rename into place.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp =
      path.string() + ".tmp" + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw DataError("cannot write file '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out)
      throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw DataError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

//
// Noise maps
//

namespace detail {

[[nodiscard]] inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

[[nodiscard]] inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ','))
    fields.push_back(trim(field));
  return fields;
}

[[nodiscard]] inline double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty())
    throw DataError("empty numeric field at " + where);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw DataError("malformed number '" + t + "' at " + where);
  return v;
}

} // namespace detail

[[nodiscard]] inline std::string export_noise_map_csv(const fitting::NoiseMap& map) {
  std::string out = map.sigma.empty() ? "delta_hz, omega_hz, value_db\n"
                                      : "delta_hz, omega_hz, value_db, sigma_db\n";
  for (std::size_t i = 0; i < map.delta_grid.size(); ++i) {
    for (std::size_t j = 0; j < map.omega_grid.size(); ++j) {
      const std::size_t k = i * map.omega_grid.size() + j;
      out += format_double(hz_representation(map.delta_grid[i]));
      out += ", ";
      out += format_double(hz_representation(map.omega_grid[j]));
      out += ", ";
      out += format_double(map.values[k]);
      if (!map.sigma.empty()) {
        out += ", ";
        out += format_double(map.sigma[k]);
      }
      out += '\n';
    }
  }
  return out;
}

[[nodiscard]] inline std::string export_noise_map_structured(const fitting::NoiseMap& map) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  nlohmann::json deltas = nlohmann::json::array();
  for (double d : map.delta_grid)
    deltas.push_back(hz_representation(d));
  nlohmann::json omegas = nlohmann::json::array();
  for (double w : map.omega_grid)
    omegas.push_back(hz_representation(w));
  doc["delta_hz"] = std::move(deltas);
  doc["omega_hz"] = std::move(omegas);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < map.delta_grid.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < map.omega_grid.size(); ++j)
      row.push_back(map.at(i, j));
    rows.push_back(std::move(row));
  }
  doc["value_db"] = std::move(rows);
  if (!map.sigma.empty()) {
    nlohmann::json srows = nlohmann::json::array();
    for (std::size_t i = 0; i < map.delta_grid.size(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < map.omega_grid.size(); ++j)
        row.push_back(map.sigma[i * map.omega_grid.size() + j]);
      srows.push_back(std::move(row));
    }
    doc["sigma_db"] = std::move(srows);
  }
  return doc.dump(2) + "\n";
}

[[nodiscard]] inline std::string export_noise_map(const fitting::NoiseMap& map, MapFormat format) {
  return format == MapFormat::CSV ? export_noise_map_csv(map) : export_noise_map_structured(map);
}

namespace detail {

[[nodiscard]] inline fitting::NoiseMap import_noise_map_csv(const std::string& text,
                                                            const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("empty noise map in '" + origin + "'");
  const auto header = split_csv_line(line);
  bool with_sigma = false;
  if (header == std::vector<std::string>{"delta_hz", "omega_hz", "value_db"})
    with_sigma = false;
  else if (header == std::vector<std::string>{"delta_hz", "omega_hz", "value_db", "sigma_db"})
    with_sigma = true;
  else
    throw DataError("unexpected noise map header in '" + origin +
                    "' (want 'delta_hz, omega_hz, value_db[, sigma_db]')");

  struct Row {
    double delta, omega, value, sigma;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty())
      continue;
    const auto fields = split_csv_line(line);
    const std::string where = "'" + origin + "' line " + std::to_string(line_no);
    if (fields.size() != header.size())
      throw DataError("wrong column count at " + where);
    Row row{};
    row.delta = hz_to_angular(parse_number(fields[0], where + " (delta_hz)"));
    row.omega = hz_to_angular(parse_number(fields[1], where + " (omega_hz)"));
    row.value = parse_number(fields[2], where + " (value_db)");
    row.sigma = with_sigma ? parse_number(fields[3], where + " (sigma_db)") : 0.0;
    row.line_no = line_no;
    if (std::isnan(row.value) || std::isnan(row.delta) || std::isnan(row.omega) ||
        (with_sigma && std::isnan(row.sigma)))
      throw DataError("NaN cell at " + where);
    rows.push_back(row);
  }
  if (rows.empty())
    throw DataError("noise map '" + origin + "' has no data rows");

  fitting::NoiseMap map;
  for (const Row& row : rows) {
    if (std::find(map.delta_grid.begin(), map.delta_grid.end(), row.delta) ==
        map.delta_grid.end())
      map.delta_grid.push_back(row.delta);
    if (std::find(map.omega_grid.begin(), map.omega_grid.end(), row.omega) ==
        map.omega_grid.end())
      map.omega_grid.push_back(row.omega);
  }
  std::sort(map.delta_grid.begin(), map.delta_grid.end());
  std::sort(map.omega_grid.begin(), map.omega_grid.end());

  const double unset = std::numeric_limits<double>::quiet_NaN();
  map.values.assign(map.size(), unset);
  if (with_sigma)
    map.sigma.assign(map.size(), unset);
  for (const Row& row : rows) {
    const auto di = std::lower_bound(map.delta_grid.begin(), map.delta_grid.end(), row.delta) -
                    map.delta_grid.begin();
    const auto wi = std::lower_bound(map.omega_grid.begin(), map.omega_grid.end(), row.omega) -
                    map.omega_grid.begin();
    const std::size_t k = static_cast<std::size_t>(di) * map.omega_grid.size() +
                          static_cast<std::size_t>(wi);
    if (!std::isnan(map.values[k]))
      throw DataError("duplicate grid point at '" + origin + "' line " +
                      std::to_string(row.line_no));
    map.values[k] = row.value;
    if (with_sigma)
      map.sigma[k] = row.sigma;
  }
  for (std::size_t k = 0; k < map.values.size(); ++k)
    if (std::isnan(map.values[k]))
      throw DataError("noise map '" + origin + "' does not cover the full grid (" +
                      std::to_string(map.delta_grid.size()) + " x " +
                      std::to_string(map.omega_grid.size()) + " expected)");
  try {
    map.validate();
  } catch (const std::invalid_argument& err) {
    throw DataError("noise map '" + origin + "': " + err.what());
  }
  return map;
}

[[nodiscard]] inline fitting::NoiseMap import_noise_map_structured(const std::string& text,
                                                                   const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw DataError("noise map '" + origin + "' is not valid structured text: " +
                    std::string(err.what()));
  }
  if (!doc.is_object() || doc.value("schema_version", 0) != 1)
    throw DataError("noise map '" + origin + "' needs schema_version 1");
  for (const char* key : {"delta_hz", "omega_hz", "value_db"})
    if (!doc.contains(key))
      throw DataError("noise map '" + origin + "' is missing '" + key + "'");

  const auto grid_from = [&](const char* key) {
    std::vector<double> grid;
    for (const auto& v : doc.at(key)) {
      if (!v.is_number())
        throw DataError("noise map '" + origin + "': non-numeric entry in '" + key + "'");
      grid.push_back(hz_to_angular(v.get<double>()));
    }
    return grid;
  };

  fitting::NoiseMap map;
  map.delta_grid = grid_from("delta_hz");
  map.omega_grid = grid_from("omega_hz");

  const auto matrix_from = [&](const char* key) {
    std::vector<double> flat;
    const auto& rows = doc.at(key);
    if (!rows.is_array() || rows.size() != map.delta_grid.size())
      throw DataError("noise map '" + origin + "': '" + key + "' must have one row per delta");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || row.size() != map.omega_grid.size())
        throw DataError("noise map '" + origin + "': '" + key + "' row " + std::to_string(i) +
                        " has the wrong length");
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (!row[j].is_number())
          throw DataError("noise map '" + origin + "': non-numeric cell (" + std::to_string(i) +
                          ", " + std::to_string(j) + ") in '" + key + "'");
        flat.push_back(row[j].get<double>());
      }
    }
    return flat;
  };

  map.values = matrix_from("value_db");
  if (doc.contains("sigma_db"))
    map.sigma = matrix_from("sigma_db");
  try {
    map.validate();
  } catch (const std::invalid_argument& err) {
    throw DataError("noise map '" + origin + "': " + err.what());
  }
  return map;
}

} // namespace detail

[[nodiscard]] inline fitting::NoiseMap import_noise_map_text(const std::string& text,
                                                             MapFormat format,
                                                             const std::string& origin) {
  return format == MapFormat::CSV ? detail::import_noise_map_csv(text, origin)
                                  : detail::import_noise_map_structured(text, origin);
}

[[nodiscard]] inline fitting::NoiseMap import_noise_map(const std::filesystem::path& path,
                                                        MapFormat format) {
  return import_noise_map_text(read_text_file(path), format, path.string());
}

//
// Result exports
//

// Fit result as structured text; rates leave in Hz, everything carries its unit.
[[nodiscard]] inline std::string export_fit_result(const fitting::FitResult& result) {
  const auto with_unit = [](double value, const char* unit) {
    nlohmann::json entry;
    entry["value"] = value;
    entry["unit"] = unit;
    return entry;
  };
  const auto is_rate = [](const std::string& name) {
    return name == "g" || name == "r" || name == "kappa" || name == "gamma";
  };

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["residual_norm"] = with_unit(result.residual_norm, "dB");
  doc["jacobian_condition"] = result.jacobian_condition;
  nlohmann::json params;
  for (const auto& [name, value] : result.parameters) {
    if (is_rate(name))
      params[name] = with_unit(angular_to_hz(value), "Hz");
    else if (name == "loss_db")
      params[name] = with_unit(value, "dB");
    else
      params[name] = with_unit(value, "1");
  }
  doc["parameters"] = std::move(params);
  nlohmann::json sigmas;
  for (const auto& [name, variance] : result.covariance_diag) {
    const double sigma = std::sqrt(variance);
    if (is_rate(name))
      sigmas[name] = with_unit(angular_to_hz(sigma), "Hz");
    else if (name == "loss_db")
      sigmas[name] = with_unit(sigma, "dB");
    else
      sigmas[name] = with_unit(sigma, "1");
  }
  doc["parameter_sigma"] = std::move(sigmas);
  return doc.dump(2) + "\n";
}

[[nodiscard]] inline std::string export_spectrum_csv(const Spectrum& spec) {
  std::string out = "omega_hz, value_db\n";
  for (std::size_t j = 0; j < spec.detuning_grid.size(); ++j) {
    out += format_double(hz_representation(spec.detuning_grid[j]));
    out += ", ";
    out += format_double(spec.values[j]);
    out += '\n';
  }
  return out;
}

// Long-format (g, Q) map, one row per cell.
[[nodiscard]] inline std::string export_temperature_map_csv(const sweeps::TemperatureMap& map) {
  std::string out = "g_hz, q, min_temperature_k, argmin_omega_hz\n";
  for (std::size_t i = 0; i < map.g_grid.size(); ++i) {
    for (std::size_t j = 0; j < map.q_grid.size(); ++j) {
      out += format_double(hz_representation(map.g_grid[i]));
      out += ", ";
      out += format_double(map.q_grid[j]);
      out += ", ";
      out += format_double(map.temperature_at(i, j));
      out += ", ";
      out += format_double(hz_representation(map.argmin_at(i, j)));
      out += '\n';
    }
  }
  return out;
}

// Sidecar naming every modeling switch the map was built under.
[[nodiscard]] inline std::string export_temperature_map_meta(const sweeps::TemperatureMap& map) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["view"] = map.assumptions.view == sweeps::TemperatureView::INTRACAVITY ? "intracavity"
                                                                             : "output-min";
  doc["coupling"] =
      map.assumptions.coupling == sweeps::CouplingRule::CRITICAL ? "critical" : "uncoupled";
  doc["rate_ratio"] = map.assumptions.rate_ratio;
  doc["omega_c_hz"] = hz_representation(map.assumptions.omega_c);
  doc["polarization"] = map.polarization;
  doc["ambient_k"] = map.ambient;
  doc["g_points"] = map.g_grid.size();
  doc["q_points"] = map.q_grid.size();
  return doc.dump(2) + "\n";
}

[[nodiscard]] inline std::string export_power_rows_csv(const std::vector<sweeps::PowerPoint>& rows) {
  std::string out = "power_w, peak_db, inferred_kelvin\n";
  for (const auto& row : rows) {
    out += format_double(row.power_w);
    out += ", ";
    out += format_double(row.peak_db);
    out += ", ";
    out += format_double(row.inferred_kelvin);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::string export_cable_csv(const std::vector<double>& lengths_m,
                                                  const std::vector<double>& depths_k) {
  std::string out = "length_m, depth_k\n";
  for (std::size_t i = 0; i < lengths_m.size(); ++i) {
    out += format_double(lengths_m[i]);
    out += ", ";
    out += format_double(depths_k[i]);
    out += '\n';
  }
  return out;
}

} // namespace spinfridge::io
