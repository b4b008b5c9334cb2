// sweeps.hpp: design-space maps and one-dimensional scans built on the
// closed-form spectrum results: minimum-temperature map over (g, Q),
// cooling versus pump power, and the cable-attenuation decay law.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "spinfridge/model.hpp"
#include "spinfridge/parallel.hpp"
#include "spinfridge/pump.hpp"

namespace spinfridge::sweeps {

enum class TemperatureView {
  INTRACAVITY, // steady-state photon number of the cavity mode
  OUTPUT_MIN   // deepest point of the emitted noise spectrum
};

enum class CouplingRule {
  CRITICAL, // kappa = gamma (matched output coupling)
  UNCOUPLED // kappa = 0 (closed cavity)
};

// Modeling switches for the (g, Q) map. Every field is echoed into the run
// metadata so a map is never read without its assumptions.
struct SweepAssumptions {
  TemperatureView view = TemperatureView::INTRACAVITY;
  CouplingRule coupling = CouplingRule::CRITICAL;
  double rate_ratio = 1.0; // spin broadening r = rate_ratio * g
  double omega_c = hz_to_angular(2.87e9);
};

struct TemperatureMap {
  std::vector<double> g_grid; // rad/s
  std::vector<double> q_grid; // dimensionless quality factors
  std::vector<double> min_temperature; // K, row-major [g][q]
  std::vector<double> argmin_omega;    // rad/s, location of the spectral minimum
  SweepAssumptions assumptions;
  double polarization = 0.0;
  double ambient = 0.0; // K

  [[nodiscard]] double temperature_at(std::size_t i_g, std::size_t i_q) const {
    return min_temperature[i_g * q_grid.size() + i_q];
  }
  [[nodiscard]] double argmin_at(std::size_t i_g, std::size_t i_q) const {
    return argmin_omega[i_g * q_grid.size() + i_q];
  }
};

// Reachable temperature per (g, Q) cell with r tied to g and kappa set by the
// coupling rule. The intracavity view converts the steady-state photon number;
// the output view converts the deepest point of the emitted spectrum. The
// spectral minimum location is reported for either view.
[[nodiscard]] inline TemperatureMap min_temperature_map(const std::vector<double>& g_grid,
                                                        const std::vector<double>& q_grid,
                                                        double polarization,
                                                        const ThermalEnv& env,
                                                        const SweepAssumptions& assume = {}) {
  spinfridge::detail::check_grid(g_grid, "min_temperature_map");
  spinfridge::detail::check_grid(q_grid, "min_temperature_map");
  if (!(g_grid.front() > 0.0))
    throw std::invalid_argument("min_temperature_map: couplings must be positive");
  if (!(q_grid.front() > 0.0))
    throw std::invalid_argument("min_temperature_map: quality factors must be positive");
  if (!(assume.rate_ratio > 0.0))
    throw std::invalid_argument("min_temperature_map: rate_ratio must be positive");
  static_cast<void>(cold_bath_occupation(polarization)); // validates the range

  TemperatureMap map;
  map.g_grid = g_grid;
  map.q_grid = q_grid;
  map.assumptions = assume;
  map.polarization = polarization;
  map.ambient = env.temperature;
  map.min_temperature.assign(g_grid.size() * q_grid.size(), 0.0);
  map.argmin_omega.assign(g_grid.size() * q_grid.size(), 0.0);

  const SpinBath bath{polarization};
  parallel_for(g_grid.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < q_grid.size(); ++j) {
      SystemParams p;
      p.g = g_grid[i];
      p.r = assume.rate_ratio * g_grid[i];
      p.gamma = assume.omega_c / q_grid[j];
      p.kappa = assume.coupling == CouplingRule::CRITICAL ? p.gamma : 0.0;
      p.omega_c = assume.omega_c;

      const PeakInfo peak = peak_analysis(p, bath, env);
      const double occupation = assume.view == TemperatureView::INTRACAVITY
                                    ? mean_photon_number(p, bath, env)
                                    : env.n_T - peak.depth;
      map.min_temperature[i * q_grid.size() + j] =
          occupation_to_temperature(occupation, assume.omega_c);
      map.argmin_omega[i * q_grid.size() + j] = peak.minima_locations.back();
    }
  });
  return map;
}

struct PowerPoint {
  double power_w = 0.0;
  double peak_db = 0.0;         // deepest observed noise change, dB
  double inferred_kelvin = 0.0; // naive conversion of the observed minimum
};

// Cooling versus optical pump power: polarization and effective coupling come
// from the pump model, the observed spectrum from the resonant closed form
// with the detection loss applied. Zero power leaves the floor untouched.
[[nodiscard]] inline std::vector<PowerPoint> cooling_vs_power(
    const std::vector<double>& powers_w, const pump::PumpConfig& cfg,
    const SystemParams& base, const ThermalEnv& env, pump::CouplingScaling mode,
    double loss_db = 0.0) {
  cfg.validate();
  base.validate();
  for (double power : powers_w)
    if (!(power >= 0.0) || !std::isfinite(power))
      throw std::invalid_argument("cooling_vs_power: powers must be non-negative");

  std::vector<PowerPoint> out(powers_w.size());
  parallel_for(powers_w.size(), [&](std::size_t i) {
    PowerPoint& row = out[i];
    row.power_w = powers_w[i];
    const double polarization = pump::steady_polarization(cfg, powers_w[i]);
    SystemParams p = base;
    p.g = pump::coupling_scaling(base.g, polarization, mode);
    if (p.g == 0.0) {
      row.peak_db = 0.0;
      row.inferred_kelvin = env.temperature;
      return;
    }
    const PeakInfo peak = peak_analysis(p, SpinBath{polarization}, env);
    const double observed = apply_loss_value(env.n_T - peak.depth, loss_db, env.n_T);
    row.peak_db = 10.0 * std::log10(observed / env.n_T);
    row.inferred_kelvin = occupation_to_temperature(observed, p.omega_c);
  });
  return out;
}

// Exponential decay of a cooling dip along an attenuating cable:
// depth(L) = depth0 exp(-L / alpha).
[[nodiscard]] inline std::vector<double> cable_decay(double depth0_kelvin,
                                                     const std::vector<double>& lengths_m,
                                                     double alpha_m) {
  if (!(depth0_kelvin >= 0.0) || !std::isfinite(depth0_kelvin))
    throw std::invalid_argument("cable_decay: depth must be non-negative");
  if (!(alpha_m > 0.0))
    throw std::invalid_argument("cable_decay: decay length must be positive");
  std::vector<double> out;
  out.reserve(lengths_m.size());
  for (double length : lengths_m) {
    if (!(length >= 0.0))
      throw std::invalid_argument("cable_decay: lengths must be non-negative");
    out.push_back(depth0_kelvin * std::exp(-length / alpha_m));
  }
  return out;
}

} // namespace spinfridge::sweeps
