// network.hpp: exact solver for the linear cavity + K-pseudo-mode Langevin
// network. Serves as the brute-force reference for the closed-form model and
// as the only route for multi-line (hyperfine) predictions.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinfridge/model.hpp"

namespace spinfridge::langevin {

using Complex = std::complex<double>;

// One Markovian input port: coupling rate, bath occupation, driven mode.
struct Port {
  double rate = 0.0;
  double occupation = 0.0;
  int mode = 0;
};

struct LinearNetwork {
  Eigen::MatrixXcd drift;        // (1+K) x (1+K); diag -i*detuning - rate/2
  std::vector<Port> input_rates; // cavity: kappa then gamma; pseudo-mode k: r
  int output_port = 0;           // index into input_rates (cavity, kappa)

  [[nodiscard]] int dim() const { return static_cast<int>(drift.rows()); }
  [[nodiscard]] int modes() const { return dim(); }
  [[nodiscard]] const Port& output() const { return input_rates[static_cast<std::size_t>(output_port)]; }

  // Every mode's total damping must equal the sum of its port rates.
  void validate() const {
    if (drift.rows() != drift.cols() || drift.rows() < 2)
      throw std::invalid_argument("LinearNetwork: drift must be square with dimension >= 2");
    if (output_port < 0 || output_port >= static_cast<int>(input_rates.size()))
      throw std::invalid_argument("LinearNetwork: output_port out of range");
    std::vector<double> per_mode(static_cast<std::size_t>(dim()), 0.0);
    for (const Port& p : input_rates) {
      if (p.mode < 0 || p.mode >= dim())
        throw std::invalid_argument("LinearNetwork: port mode out of range");
      if (!(p.rate >= 0.0) || !(p.occupation >= 0.0))
        throw std::invalid_argument("LinearNetwork: port rates and occupations must be >= 0");
      per_mode[static_cast<std::size_t>(p.mode)] += p.rate;
    }
    for (int m = 0; m < dim(); ++m) {
      const double damping = -2.0 * drift(m, m).real();
      const double ports = per_mode[static_cast<std::size_t>(m)];
      const double scale = std::max({1.0, damping, ports});
      if (std::abs(damping - ports) > 1e-9 * scale)
        throw std::invalid_argument("LinearNetwork: mode damping inconsistent with port rates");
    }
  }

  [[nodiscard]] Eigen::VectorXcd eigenvalues() const {
    return Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(drift, false).eigenvalues();
  }

  [[nodiscard]] bool stable() const {
    const Eigen::VectorXcd ev = eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
      if (!(ev[i].real() < 0.0))
        return false;
    return true;
  }
};

// Cavity at detuning 0 with damping (kappa+gamma)/2; sub-ensemble k at
// detuning delta + offset_k with damping r/2 and bath occupation n_c.
// EQUAL_POWER divides g^2 evenly across lines; PER_ENSEMBLE repeats g.
[[nodiscard]] inline LinearNetwork build_network(const SystemParams& p, double delta,
                                                 const SpinBath& bath, const ThermalEnv& env) {
  p.validate();
  bath.validate();
  const int k = static_cast<int>(bath.hyperfine_offsets.size());
  const double g_k = bath.coupling_split_mode == CouplingSplitMode::EQUAL_POWER
                         ? p.g / std::sqrt(static_cast<double>(k))
                         : p.g;
  const double n_c = cold_bath_occupation(bath.polarization);

  LinearNetwork net;
  net.drift = Eigen::MatrixXcd::Zero(1 + k, 1 + k);
  net.drift(0, 0) = Complex(-0.5 * (p.kappa + p.gamma), 0.0);
  net.input_rates.push_back({p.kappa, env.n_T, 0});
  net.input_rates.push_back({p.gamma, env.n_T, 0});
  net.output_port = 0;
  for (int j = 0; j < k; ++j) {
    const double det = delta + bath.hyperfine_offsets[static_cast<std::size_t>(j)];
    net.drift(1 + j, 1 + j) = Complex(-0.5 * p.r, -det);
    net.drift(0, 1 + j) = Complex(0.0, -g_k);
    net.drift(1 + j, 0) = Complex(0.0, -g_k);
    net.input_rates.push_back({p.r, n_c, 1 + j});
  }
  net.validate();
  return net;
}

namespace detail {

// Row of the susceptibility chi(omega) = (-i omega I - drift)^(-1) belonging
// to `row`, obtained from one linear solve of the transposed system.
[[nodiscard]] inline Eigen::VectorXcd susceptibility_row(const LinearNetwork& net, double omega,
                                                         int row) {
  const int n = net.dim();
  Eigen::MatrixXcd m = -net.drift.transpose();
  for (int i = 0; i < n; ++i)
    m(i, i) += Complex(0.0, -omega);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const Complex det = lu.determinant();
  if (!(std::isfinite(det.real()) && std::isfinite(det.imag())) || det == Complex(0.0, 0.0))
    throw std::runtime_error("frequency_spectrum: singular network response at omega = " +
                             std::to_string(omega) + " rad/s");
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e[row] = Complex(1.0, 0.0);
  return lu.solve(e);
}

} // namespace detail

// Normally ordered occupation spectrum of the field leaving the monitored
// port: S(omega) = sum_p |t_p(omega)|^2 n_p with t_p = sqrt(rate_out rate_p)
// chi_{0,m(p)} - delta_{p,out}. A bare thermal port reads exactly n_T.
[[nodiscard]] inline Spectrum frequency_spectrum(const LinearNetwork& net,
                                                 const std::vector<double>& grid) {
  net.validate();
  spinfridge::detail::check_grid(grid, "frequency_spectrum");
  if (!net.stable())
    throw std::invalid_argument("frequency_spectrum: network is not stable");
  const int out_mode = net.output().mode;
  const double out_rate = net.output().rate;

  Spectrum s;
  s.detuning_grid = grid;
  s.values.reserve(grid.size());
  for (double omega : grid) {
    const Eigen::VectorXcd chi = detail::susceptibility_row(net, omega, out_mode);
    double acc = 0.0;
    for (std::size_t ip = 0; ip < net.input_rates.size(); ++ip) {
      const Port& p = net.input_rates[ip];
      Complex t = std::sqrt(out_rate * p.rate) * chi[p.mode];
      if (static_cast<int>(ip) == net.output_port)
        t -= 1.0;
      acc += std::norm(t) * p.occupation;
    }
    s.values.push_back(acc);
  }
  return s;
}

// Intracavity spectral density of the monitored mode,
// S_a(omega) = sum_p rate_p n_p |chi_{0,m(p)}|^2; its integral over
// omega / (2 pi) is the steady-state occupation.
[[nodiscard]] inline Spectrum intracavity_spectrum(const LinearNetwork& net,
                                                   const std::vector<double>& grid) {
  net.validate();
  spinfridge::detail::check_grid(grid, "intracavity_spectrum");
  if (!net.stable())
    throw std::invalid_argument("intracavity_spectrum: network is not stable");
  const int out_mode = net.output().mode;

  Spectrum s;
  s.detuning_grid = grid;
  s.values.reserve(grid.size());
  for (double omega : grid) {
    const Eigen::VectorXcd chi = detail::susceptibility_row(net, omega, out_mode);
    double acc = 0.0;
    for (const Port& p : net.input_rates)
      acc += p.rate * p.occupation * std::norm(chi[p.mode]);
    s.values.push_back(acc);
  }
  return s;
}

// Steady-state mode occupations from the Lyapunov equation
// drift C + C drift^dagger + D = 0, D = diag(sum_p rate_p n_p), solved by
// Kronecker vectorization (dimensions here are tiny).
[[nodiscard]] inline std::vector<double> steady_state_occupations(const LinearNetwork& net) {
  net.validate();
  if (!net.stable())
    throw std::invalid_argument("steady_state_occupations: network is not stable");
  const int n = net.dim();
  const Eigen::MatrixXcd& a = net.drift;

  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(n * n, n * n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int row = i + n * j;
      for (int k2 = 0; k2 < n; ++k2) {
        big(row, k2 + n * j) += a(i, k2);
        big(row, i + n * k2) += std::conj(a(j, k2));
      }
    }
  }
  for (const Port& p : net.input_rates)
    rhs[p.mode + n * p.mode] -= p.rate * p.occupation;
  const Eigen::VectorXcd c = big.partialPivLu().solve(rhs);

  std::vector<double> occ(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m)
    occ[static_cast<std::size_t>(m)] = c[m + n * m].real();
  return occ;
}

// S11(omega) = 1 - rate_out chi_{00}(omega); |S11| <= 1 for passive networks.
[[nodiscard]] inline std::vector<Complex> reflection_spectrum(const LinearNetwork& net,
                                                              const std::vector<double>& grid) {
  net.validate();
  spinfridge::detail::check_grid(grid, "reflection_spectrum");
  if (!net.stable())
    throw std::invalid_argument("reflection_spectrum: network is not stable");
  const int out_mode = net.output().mode;
  const double out_rate = net.output().rate;

  std::vector<Complex> s11;
  s11.reserve(grid.size());
  for (double omega : grid) {
    const Eigen::VectorXcd chi = detail::susceptibility_row(net, omega, out_mode);
    s11.push_back(Complex(1.0, 0.0) - out_rate * chi[out_mode]);
  }
  return s11;
}

// Real-frequency separation of the two hybrid modes, |Im l+ - Im l-|.
// Returns 0 in the unresolved regime 4 g^2 <= ((kappa+gamma)/2 - r/2)^2.
// Defined for one sub-ensemble on resonance; multi-line splittings must be
// read off reflection_spectrum instead.
[[nodiscard]] inline double mode_splitting(const LinearNetwork& net) {
  net.validate();
  if (net.dim() != 2)
    throw std::invalid_argument("mode_splitting: defined for a single sub-ensemble network");
  const Complex a = net.drift(0, 0);
  const Complex d = net.drift(1, 1);
  const Complex half = 0.5 * (a - d);
  const Complex disc = std::sqrt(half * half + net.drift(0, 1) * net.drift(1, 0));
  return std::abs(2.0 * disc.imag());
}

//
// Quadrature cross-check (Parseval): integrate the intracavity density.
//

namespace detail {

// Adaptive Simpson on [a, b] with seeded midpoint; absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                               double b, double fb, double whole, double fm, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, fa, b, fb, whole, fm, tol, 48);
}

} // namespace detail

// (1/2pi) integral of the intracavity spectral density, evaluated with an
// arctangent frequency compression seeded at every network resonance. Cross-
// checks steady_state_occupations without touching the Lyapunov route.
[[nodiscard]] inline double cavity_occupation_by_quadrature(const LinearNetwork& net,
                                                            double rel_tol = 1e-10) {
  net.validate();
  if (!net.stable())
    throw std::invalid_argument("cavity_occupation_by_quadrature: network is not stable");
  const int out_mode = net.output().mode;

  const auto density = [&](double omega) {
    const Eigen::VectorXcd chi = detail::susceptibility_row(net, omega, out_mode);
    double acc = 0.0;
    for (const Port& p : net.input_rates)
      acc += p.rate * p.occupation * std::norm(chi[p.mode]);
    return acc;
  };

  // Resonances sit at omega = -Im(lambda) with half-width |Re(lambda)|.
  const Eigen::VectorXcd ev = net.eigenvalues();
  double center = 0.0;
  double span = 0.0;
  for (int i = 0; i < ev.size(); ++i)
    center += -ev[i].imag() / static_cast<double>(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    span = std::max({span, std::abs(-ev[i].imag() - center), std::abs(ev[i].real())});
  span *= 4.0;

  const auto mapped = [&](double theta) {
    const double t = std::tan(theta);
    const double omega = center + span * t;
    return density(omega) * span * (1.0 + t * t);
  };

  // Breakpoints: each resonance contributes its center and a few widths out.
  std::vector<double> cuts;
  const double edge = 0.5 * pi - 1e-8;
  cuts.push_back(-edge);
  cuts.push_back(edge);
  for (int i = 0; i < ev.size(); ++i) {
    const double c0 = -ev[i].imag();
    const double w = std::abs(ev[i].real());
    for (double k2 : {-30.0, -8.0, -2.0, 0.0, 2.0, 8.0, 30.0}) {
      const double theta = std::atan((c0 + k2 * w - center) / span);
      if (theta > -edge && theta < edge)
        cuts.push_back(theta);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  // Coarse scale estimate sets the absolute tolerance per panel.
  double scale = 0.0;
  for (double theta : cuts)
    scale = std::max(scale, std::abs(mapped(theta)));
  const double tol = rel_tol * scale;

  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (cuts[i] > cuts[i - 1])
      total += detail::integrate(mapped, cuts[i - 1], cuts[i], tol * (cuts[i] - cuts[i - 1]) / pi);
  return total / two_pi;
}

} // namespace spinfridge::langevin
