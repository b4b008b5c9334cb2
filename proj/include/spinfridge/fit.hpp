// fit.hpp: least-squares estimation of (g, r, kappa, loss_db, optionally P)
// from a 2D noise map over (bias detuning, frequency), in dB space, with a
// damped Gauss-Newton loop and numeric Jacobians.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinfridge/model.hpp"
#include "spinfridge/network.hpp"
#include "spinfridge/parallel.hpp"

namespace spinfridge::fitting {

using NamedValues = std::map<std::string, double>;

struct NoiseMap {
  std::vector<double> delta_grid; // spin bias detunings (rad/s)
  std::vector<double> omega_grid; // cavity-relative frequencies (rad/s)
  std::vector<double> values;     // dB relative to the unpumped floor; row-major [delta][omega]
  std::vector<double> sigma;      // optional per-point noise, same layout

  [[nodiscard]] std::size_t size() const { return delta_grid.size() * omega_grid.size(); }
  [[nodiscard]] double& at(std::size_t i_delta, std::size_t i_omega) {
    return values[i_delta * omega_grid.size() + i_omega];
  }
  [[nodiscard]] double at(std::size_t i_delta, std::size_t i_omega) const {
    return values[i_delta * omega_grid.size() + i_omega];
  }

  void validate() const {
    spinfridge::detail::check_grid(delta_grid, "NoiseMap");
    spinfridge::detail::check_grid(omega_grid, "NoiseMap");
    if (values.size() != size())
      throw std::invalid_argument("NoiseMap: values size does not match the grids");
    if (!sigma.empty()) {
      if (sigma.size() != size())
        throw std::invalid_argument("NoiseMap: sigma size does not match the grids");
      for (double s : sigma)
        if (!(s > 0.0))
          throw std::invalid_argument("NoiseMap: sigma entries must be positive");
    }
  }
};

// Model map: per bias detuning, the multi-line network spectrum with the
// detection loss applied, in dB relative to n_T.
[[nodiscard]] inline NoiseMap forward_model(const SystemParams& params, const SpinBath& bath,
                                            const ThermalEnv& env, double loss_db,
                                            const std::vector<double>& delta_grid,
                                            const std::vector<double>& omega_grid) {
  params.validate();
  bath.validate();
  spinfridge::detail::check_grid(delta_grid, "forward_model");
  spinfridge::detail::check_grid(omega_grid, "forward_model");

  NoiseMap map;
  map.delta_grid = delta_grid;
  map.omega_grid = omega_grid;
  map.values.assign(delta_grid.size() * omega_grid.size(), 0.0);
  parallel_for(delta_grid.size(), [&](std::size_t i) {
    const auto net = langevin::build_network(params, delta_grid[i], bath, env);
    const Spectrum raw = langevin::frequency_spectrum(net, omega_grid);
    const Spectrum seen = apply_loss(raw, loss_db, env.n_T);
    for (std::size_t j = 0; j < omega_grid.size(); ++j)
      map.values[i * omega_grid.size() + j] = 10.0 * std::log10(seen.values[j] / env.n_T);
  });
  return map;
}

struct FitOptions {
  double omega_c = hz_to_angular(2.891e9);
  double temperature = 290.0;
  std::vector<double> hyperfine_offsets{-hz_to_angular(2.15e6), 0.0, hz_to_angular(2.15e6)};
  CouplingSplitMode split_mode = CouplingSplitMode::PER_ENSEMBLE;
  int max_iterations = 200;
  // Convergence: |grad of 0.5*||res||^2|_inf < gradient_tolerance * max(1, cost),
  // in internal coordinates. The cost factor keeps the criterion meaningful for
  // noisy maps where the optimum cost scales with the point count.
  double gradient_tolerance = 1e-6;
  double step_tolerance = 1e-10;
  double finite_difference_step = 1e-4;
  double initial_damping = 1e-3;
};

struct FitResult {
  NamedValues parameters;      // full parameter set, external units
  double residual_norm = 0.0;  // Euclidean norm of the (weighted) dB residuals
  double jacobian_condition = 0.0;
  NamedValues covariance_diag; // free parameters; empty when rank-deficient
  bool converged = false;
  int iterations = 0;
};

namespace detail {

inline const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names{"P", "g", "gamma", "kappa", "loss_db", "r"};
  return names;
}

// Internal coordinates keep every iterate feasible: rates live on a log
// scale, P on a logit, loss_db on a scaled logit over (0, 10).
[[nodiscard]] inline double to_internal(const std::string& name, double x) {
  if (name == "P") {
    if (!(x > 0.0) || !(x < 1.0))
      throw std::invalid_argument("fit: initial P must lie strictly inside (0, 1)");
    return std::log(x / (1.0 - x));
  }
  if (name == "loss_db") {
    if (!(x > 0.0) || !(x < 10.0))
      throw std::invalid_argument("fit: initial loss_db must lie strictly inside (0, 10)");
    return std::log(x / (10.0 - x));
  }
  if (!(x > 0.0))
    throw std::invalid_argument("fit: initial rate '" + name + "' must be positive");
  return std::log(x);
}

[[nodiscard]] inline double to_external(const std::string& name, double u) {
  if (name == "P")
    return 1.0 / (1.0 + std::exp(-u));
  if (name == "loss_db")
    return 10.0 / (1.0 + std::exp(-u));
  return std::exp(u);
}

// d(external)/d(internal), for mapping covariances back to physical units.
[[nodiscard]] inline double external_slope(const std::string& name, double u) {
  if (name == "P") {
    const double p = 1.0 / (1.0 + std::exp(-u));
    return p * (1.0 - p);
  }
  if (name == "loss_db") {
    const double l = 10.0 / (1.0 + std::exp(-u));
    return l * (10.0 - l) / 10.0;
  }
  return std::exp(u);
}

struct Objective {
  const NoiseMap& map;
  const FitOptions& opts;
  NamedValues fixed;
  std::vector<std::string> free_names;

  [[nodiscard]] NamedValues assemble(const Eigen::VectorXd& u) const {
    NamedValues full = fixed;
    for (std::size_t k = 0; k < free_names.size(); ++k)
      full[free_names[k]] = to_external(free_names[k], u[static_cast<Eigen::Index>(k)]);
    return full;
  }

  [[nodiscard]] Eigen::VectorXd residual(const NamedValues& full) const {
    SystemParams p;
    p.g = full.at("g");
    p.kappa = full.at("kappa");
    p.gamma = full.at("gamma");
    p.r = full.at("r");
    p.omega_c = opts.omega_c;
    SpinBath bath;
    bath.polarization = full.at("P");
    bath.hyperfine_offsets = opts.hyperfine_offsets;
    bath.coupling_split_mode = opts.split_mode;
    const ThermalEnv env = make_thermal_env(opts.temperature, opts.omega_c);
    const NoiseMap model =
        forward_model(p, bath, env, full.at("loss_db"), map.delta_grid, map.omega_grid);

    Eigen::VectorXd res(static_cast<Eigen::Index>(map.size()));
    for (std::size_t k = 0; k < map.size(); ++k) {
      const double w = map.sigma.empty() ? 1.0 : map.sigma[k];
      res[static_cast<Eigen::Index>(k)] = (model.values[k] - map.values[k]) / w;
    }
    return res;
  }

  [[nodiscard]] Eigen::VectorXd residual_at(const Eigen::VectorXd& u) const {
    return residual(assemble(u));
  }

  // Central-difference Jacobian; columns evaluated concurrently.
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const {
    const std::size_t p = free_names.size();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(map.size()), static_cast<Eigen::Index>(p));
    const double h = opts.finite_difference_step;
    parallel_for(p, [&](std::size_t k) {
      Eigen::VectorXd up = u;
      Eigen::VectorXd dn = u;
      up[static_cast<Eigen::Index>(k)] += h;
      dn[static_cast<Eigen::Index>(k)] -= h;
      jac.col(static_cast<Eigen::Index>(k)) = (residual_at(up) - residual_at(dn)) / (2.0 * h);
    });
    return jac;
  }
};

} // namespace detail

// Damped least squares over the free parameters. Non-convergence is reported
// through the flag, never as an exception; `converged` is only set when the
// objective gradient satisfies the declared tolerance.
[[nodiscard]] inline FitResult fit(const NoiseMap& map, const NamedValues& fixed,
                                   const NamedValues& init, const FitOptions& opts = {}) {
  map.validate();
  detail::Objective obj{map, opts, fixed, {}};
  for (const std::string& name : detail::parameter_names()) {
    const bool in_fixed = fixed.count(name) > 0;
    const bool in_init = init.count(name) > 0;
    if (in_fixed && in_init)
      throw std::invalid_argument("fit: parameter '" + name + "' is both fixed and free");
    if (!in_fixed && !in_init)
      throw std::invalid_argument("fit: parameter '" + name + "' missing from fixed/init");
    if (in_init)
      obj.free_names.push_back(name);
  }
  for (const auto& [name, value] : fixed)
    if (std::find(detail::parameter_names().begin(), detail::parameter_names().end(), name) ==
        detail::parameter_names().end())
      throw std::invalid_argument("fit: unknown parameter '" + name + "'");
  for (const auto& [name, value] : init)
    if (std::find(detail::parameter_names().begin(), detail::parameter_names().end(), name) ==
        detail::parameter_names().end())
      throw std::invalid_argument("fit: unknown parameter '" + name + "'");

  FitResult out;
  const std::size_t p = obj.free_names.size();

  if (p == 0) {
    // Direct evaluation at the fixed point.
    const Eigen::VectorXd res = obj.residual(obj.fixed);
    out.parameters = obj.fixed;
    out.residual_norm = res.norm();
    out.converged = true;
    return out;
  }

  Eigen::VectorXd u(static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k)
    u[static_cast<Eigen::Index>(k)] = detail::to_internal(obj.free_names[k], init.at(obj.free_names[k]));

  Eigen::VectorXd res = obj.residual_at(u);
  double cost = 0.5 * res.squaredNorm();
  double damping = opts.initial_damping;
  Eigen::MatrixXd jac;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    jac = obj.jacobian(u);
    const Eigen::VectorXd grad = jac.transpose() * res;
    if (grad.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance * std::max(1.0, cost)) {
      out.converged = true;
      break;
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    bool accepted = false;
    for (int trial = 0; trial < 16; ++trial) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += damping * jtj.diagonal();
      damped.diagonal() = damped.diagonal().cwiseMax(1e-30);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd u_try = u + step;
      const Eigen::VectorXd res_try = obj.residual_at(u_try);
      const double cost_try = 0.5 * res_try.squaredNorm();
      if (cost_try < cost) {
        u = u_try;
        res = res_try;
        cost = cost_try;
        damping = std::max(damping / 3.0, 1e-14);
        ++out.iterations;
        accepted = true;
        if (step.lpNorm<Eigen::Infinity>() < opts.step_tolerance)
          iter = opts.max_iterations; // stalled; final gradient check below
        break;
      }
      damping *= 4.0;
      if (damping > 1e14)
        break;
    }
    if (!accepted)
      break;
  }

  if (!out.converged) {
    jac = obj.jacobian(u);
    out.converged = (jac.transpose() * res).lpNorm<Eigen::Infinity>() <
                    opts.gradient_tolerance * std::max(1.0, cost);
  }

  out.parameters = obj.assemble(u);
  out.residual_norm = res.norm();

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const double s_max = svd.singularValues()[0];
  const double s_min = svd.singularValues()[svd.singularValues().size() - 1];
  out.jacobian_condition = s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();

  const std::size_t m = map.size();
  const bool full_rank = s_min > 1e-10 * s_max;
  if (full_rank && m > p) {
    const double sigma2 = res.squaredNorm() / static_cast<double>(m - p);
    const Eigen::MatrixXd cov = sigma2 * (jac.transpose() * jac).inverse();
    for (std::size_t k = 0; k < p; ++k) {
      const double slope = detail::external_slope(obj.free_names[k], u[static_cast<Eigen::Index>(k)]);
      out.covariance_diag[obj.free_names[k]] =
          slope * slope * cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

// Residual norm versus one scanned parameter, all other free parameters
// re-optimized at every grid point (profile likelihood).
[[nodiscard]] inline std::vector<double> profile_residual(const NoiseMap& map,
                                                          const std::string& name,
                                                          const std::vector<double>& grid,
                                                          NamedValues fixed, NamedValues init,
                                                          const FitOptions& opts = {}) {
  if (std::find(detail::parameter_names().begin(), detail::parameter_names().end(), name) ==
      detail::parameter_names().end())
    throw std::invalid_argument("profile_residual: unknown parameter '" + name + "'");
  init.erase(name);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double value : grid) {
    fixed[name] = value;
    out.push_back(fit(map, fixed, init, opts).residual_norm);
  }
  return out;
}

} // namespace spinfridge::fitting
