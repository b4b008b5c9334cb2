// pump.hpp: two-level optical pumping model. Steady-state spin polarization
// versus laser power with temperature-dependent relaxation, phenomenological
// g(P) scalings, and Monte-Carlo uncertainty bands.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinfridge/constants.hpp"
#include "spinfridge/model.hpp"
#include "spinfridge/network.hpp"
#include "spinfridge/parallel.hpp"

namespace spinfridge::pump {

// Longitudinal relaxation law: a sample-limited constant, a T^5 two-phonon
// Raman term, and an orbital activation term. Defaults follow published
// ensemble relaxation studies (T1 of a few ms at room temperature) and are
// configuration, not physics baked into the code.
struct T1Model {
  double a_sample = 0.1;        // 1/s
  double a_raman = 2.4e-11;     // 1/s per K^5
  double a_orbach = 2.1e3;      // 1/s
  double delta_orbach_mev = 73.0;

  void validate() const {
    if (!(a_sample >= 0.0) || !(a_raman >= 0.0) || !(a_orbach >= 0.0) ||
        !(delta_orbach_mev > 0.0))
      throw std::invalid_argument("T1Model: coefficients must be non-negative, gap positive");
  }
};

[[nodiscard]] inline double t1_rate(const T1Model& m, double temperature) {
  m.validate();
  if (!(temperature > 0.0))
    throw std::domain_error("t1_rate: temperature must be positive");
  const double t5 = temperature * temperature * temperature * temperature * temperature;
  const double orbach =
      m.a_orbach / std::expm1(mev_to_joule(m.delta_orbach_mev) / (k_boltzmann * temperature));
  return m.a_sample + m.a_raman * t5 + orbach;
}

struct PumpConfig {
  double eta_pump = 5.12e6;      // pump rate (1/s) per optical intensity (mW/um^2)
  double beam_diameter_mm = 5.0; // 1/e^2 diameter, top-hat equivalent area
  T1Model t1_model{};
  double heating_k_per_w = 4.0;  // diamond temperature rise per absorbed watt
  double base_temperature = 290.0;

  void validate() const {
    if (!(eta_pump >= 0.0) || !(beam_diameter_mm > 0.0) || !(heating_k_per_w >= 0.0) ||
        !(base_temperature > 0.0))
      throw std::invalid_argument("PumpConfig: rates and geometry must be physical");
    t1_model.validate();
  }

  // Optical intensity in mW/um^2 for a given total power in W.
  [[nodiscard]] double intensity(double power_w) const {
    const double radius_um = 0.5 * beam_diameter_mm * 1e3;
    return power_w * 1e3 / (pi * radius_um * radius_um);
  }

  [[nodiscard]] double temperature(double power_w) const {
    return base_temperature + heating_k_per_w * power_w;
  }
};

// Steady state of dP/dt = G_p (1 - P) - G_1 P at the power-heated diamond
// temperature; saturates toward 1 from below.
[[nodiscard]] inline double steady_polarization(const PumpConfig& cfg, double power_w) {
  cfg.validate();
  if (!(power_w >= 0.0))
    throw std::domain_error("steady_polarization: power must be non-negative");
  const double pump_rate = cfg.eta_pump * cfg.intensity(power_w);
  const double relax = t1_rate(cfg.t1_model, cfg.temperature(power_w));
  return pump_rate / (pump_rate + relax);
}

enum class CouplingScaling { SQRT, LINEAR };

[[nodiscard]] inline double coupling_scaling(double g0, double polarization,
                                             CouplingScaling mode) {
  if (!(polarization >= 0.0) || !(polarization <= 1.0))
    throw std::domain_error("coupling_scaling: polarization must lie in [0, 1]");
  return mode == CouplingScaling::SQRT ? g0 * std::sqrt(polarization) : g0 * polarization;
}

namespace detail {

// The hybrid-mode splitting depends only on the drift matrix, so the bath
// occupations behind the network are irrelevant; build it fully polarized.
[[nodiscard]] inline double splitting_at(const SystemParams& base, double g_eff) {
  if (g_eff == 0.0)
    return 0.0;
  SystemParams p = base;
  p.g = g_eff;
  SpinBath bath;
  const ThermalEnv env = make_thermal_env(1.0, p.omega_c);
  return langevin::mode_splitting(langevin::build_network(p, 0.0, bath, env));
}

} // namespace detail

// delta-nu versus power: polarization from the rate balance, effective g from
// the chosen scaling, splitting from the two-mode eigenvalues. params.g is
// the fully polarized coupling g0.
[[nodiscard]] inline std::vector<double> splitting_vs_power(const PumpConfig& cfg,
                                                            const SystemParams& params,
                                                            const std::vector<double>& powers,
                                                            CouplingScaling mode) {
  params.validate();
  std::vector<double> out;
  out.reserve(powers.size());
  for (double w : powers) {
    const double pol = steady_polarization(cfg, w);
    out.push_back(detail::splitting_at(params, coupling_scaling(params.g, pol, mode)));
  }
  return out;
}

//
// Monte-Carlo uncertainty bands
//

enum class Distribution { LOG_NORMAL, NORMAL };

// Declared in configuration as (name, distribution, central, relative width).
struct UncertainParam {
  std::string name;
  Distribution distribution = Distribution::LOG_NORMAL;
  double central = 0.0;
  double relative_width = 0.0;
};

struct MonteCarloBand {
  std::vector<double> power_grid;
  std::vector<double> polarization_lower, polarization_median, polarization_upper;
  std::vector<double> splitting_lower, splitting_median, splitting_upper;
};

namespace detail {

[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Per-sample substream with self-contained uniform/normal converters, so the
// draws are identical for any worker count (and any standard library).
struct SampleStream {
  std::mt19937_64 eng;

  SampleStream(std::uint64_t seed, std::uint64_t index)
      : eng(splitmix64(seed ^ splitmix64(index + 1))) {}

  double uniform01() { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }
};

[[nodiscard]] inline double sample_value(const UncertainParam& u, SampleStream& stream) {
  const double z = stream.normal();
  switch (u.distribution) {
    case Distribution::LOG_NORMAL:
      return u.central * std::exp(u.relative_width * z);
    case Distribution::NORMAL:
      return u.central * (1.0 + u.relative_width * z);
  }
  return u.central;
}

inline void apply_uncertain(const std::string& name, double value, PumpConfig& cfg, double& g0) {
  // Additive-law parameters are clipped to the physical domain; the default
  // log-normal never clips.
  if (name == "eta_pump")
    cfg.eta_pump = std::max(value, 0.0);
  else if (name == "beam_diameter_mm")
    cfg.beam_diameter_mm = std::max(value, 1e-6);
  else if (name == "a_sample")
    cfg.t1_model.a_sample = std::max(value, 0.0);
  else if (name == "a_raman")
    cfg.t1_model.a_raman = std::max(value, 0.0);
  else if (name == "a_orbach")
    cfg.t1_model.a_orbach = std::max(value, 0.0);
  else if (name == "delta_orbach_mev")
    cfg.t1_model.delta_orbach_mev = std::max(value, 1e-6);
  else if (name == "heating_k_per_w")
    cfg.heating_k_per_w = std::max(value, 0.0);
  else if (name == "base_temperature")
    cfg.base_temperature = std::max(value, 1.0);
  else if (name == "g0")
    g0 = std::max(value, 0.0);
  else
    throw std::invalid_argument("monte_carlo_band: unknown uncertain parameter '" + name + "'");
}

[[nodiscard]] inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double rank = q / 100.0 * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

} // namespace detail

// Percentile band over sampled (P, delta-nu) curves. Deterministic for a
// fixed seed regardless of worker count: sample i always uses substream i.
[[nodiscard]] inline MonteCarloBand monte_carlo_band(
    const PumpConfig& cfg, const SystemParams& params, CouplingScaling mode,
    const std::vector<UncertainParam>& uncertain, const std::vector<double>& powers,
    int samples, std::uint64_t seed, std::array<double, 3> percentiles = {16.0, 50.0, 84.0}) {
  cfg.validate();
  params.validate();
  if (samples < 100)
    throw std::invalid_argument("monte_carlo_band: need at least 100 samples");
  if (powers.empty())
    throw std::invalid_argument("monte_carlo_band: power grid is empty");
  if (!(percentiles[0] <= percentiles[1] && percentiles[1] <= percentiles[2]))
    throw std::invalid_argument("monte_carlo_band: percentiles must be ordered");

  const std::size_t np = powers.size();
  const std::size_t ns = static_cast<std::size_t>(samples);
  std::vector<double> pol(ns * np);
  std::vector<double> split(ns * np);

  parallel_for(ns, [&](std::size_t i) {
    detail::SampleStream stream(seed, i);
    PumpConfig local = cfg;
    double g0 = params.g;
    for (const UncertainParam& u : uncertain)
      detail::apply_uncertain(u.name, detail::sample_value(u, stream), local, g0);
    for (std::size_t j = 0; j < np; ++j) {
      const double p = steady_polarization(local, powers[j]);
      pol[i * np + j] = p;
      split[i * np + j] = detail::splitting_at(params, coupling_scaling(g0, p, mode));
    }
  });

  MonteCarloBand band;
  band.power_grid = powers;
  for (std::size_t j = 0; j < np; ++j) {
    std::vector<double> pj(ns), sj(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      pj[i] = pol[i * np + j];
      sj[i] = split[i * np + j];
    }
    band.polarization_lower.push_back(detail::percentile(pj, percentiles[0]));
    band.polarization_median.push_back(detail::percentile(pj, percentiles[1]));
    band.polarization_upper.push_back(detail::percentile(pj, percentiles[2]));
    band.splitting_lower.push_back(detail::percentile(sj, percentiles[0]));
    band.splitting_median.push_back(detail::percentile(sj, percentiles[1]));
    band.splitting_upper.push_back(detail::percentile(sj, percentiles[2]));
  }
  return band;
}

} // namespace spinfridge::pump
