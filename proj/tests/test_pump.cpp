// Optical pumping model: relaxation law, polarization saturation, coupling
// scalings, splitting curves, and Monte-Carlo band determinism.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "spinfridge/constants.hpp"
#include "spinfridge/parallel.hpp"
#include "spinfridge/pump.hpp"

using namespace spinfridge;
using namespace spinfridge::pump;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemParams matched_params() {
  SystemParams p;
  p.g = hz_to_angular(197.7e3);
  p.kappa = hz_to_angular(185.1e3);
  p.gamma = hz_to_angular(140.0e3);
  p.r = p.kappa + p.gamma; // matched damping: splitting = 2 g exactly
  p.omega_c = hz_to_angular(2.891e9);
  return p;
}

} // namespace

TEST_CASE("relaxation rate law") {
  SECTION("default coefficient pins") {
    const T1Model m;
    CHECK_THAT(t1_rate(m, 302.0), WithinRel(195.628260530515, 1e-12));
    CHECK_THAT(t1_rate(m, 300.0), WithinRel(190.994479569425, 1e-12));
    // Room-temperature T1 of order milliseconds.
    const double t1 = 1.0 / t1_rate(m, 300.0);
    CHECK(t1 > 1e-3);
    CHECK(t1 < 20e-3);
  }

  SECTION("constant when only the sample term survives") {
    T1Model m;
    m.a_raman = 0.0;
    m.a_orbach = 0.0;
    CHECK(t1_rate(m, 10.0) == m.a_sample);
    CHECK(t1_rate(m, 700.0) == m.a_sample);
  }

  SECTION("pure Raman term scales as T^5") {
    T1Model m;
    m.a_sample = 0.0;
    m.a_orbach = 0.0;
    CHECK_THAT(t1_rate(m, 400.0), WithinRel(32.0 * t1_rate(m, 200.0), 1e-12));
  }

  SECTION("strictly increasing in temperature") {
    const T1Model m;
    double prev = t1_rate(m, 4.0);
    for (double t = 8.0; t < 1000.0; t *= 1.5) {
      const double cur = t1_rate(m, t);
      CHECK(cur > prev);
      prev = cur;
    }
  }

  SECTION("bad inputs") {
    T1Model m;
    m.a_raman = -1.0;
    CHECK_THROWS_AS(t1_rate(m, 300.0), std::invalid_argument);
    CHECK_THROWS_AS(t1_rate(T1Model{}, 0.0), std::domain_error);
  }
}

TEST_CASE("beam intensity") {
  const PumpConfig cfg;
  // 5 mm top-hat-equivalent spot: 3 W sits at the 1e-4 mW/um^2 scale.
  CHECK_THAT(cfg.intensity(3.0), WithinRel(1.52788745368220e-4, 1e-12));
  CHECK(cfg.intensity(0.0) == 0.0);
}

TEST_CASE("steady-state polarization") {
  const PumpConfig cfg;

  SECTION("pinned curve with default constants") {
    CHECK(steady_polarization(cfg, 0.0) == 0.0);
    CHECK_THAT(steady_polarization(cfg, 0.5), WithinRel(0.429504744465042, 1e-12));
    CHECK_THAT(steady_polarization(cfg, 1.0), WithinRel(0.594953147141949, 1e-12));
    CHECK_THAT(steady_polarization(cfg, 3.0), WithinRel(0.799952006494701, 1e-12));
    CHECK_THAT(steady_polarization(cfg, 10.0), WithinRel(0.906604747883624, 1e-12));
  }

  SECTION("levels off near 3 W") {
    const double p3 = steady_polarization(cfg, 3.0);
    const double p10 = steady_polarization(cfg, 10.0);
    CHECK(p3 > 0.79);
    CHECK(p10 - p3 < 0.12);
  }

  SECTION("saturates toward 1 without heating") {
    PumpConfig cold = cfg;
    cold.heating_k_per_w = 0.0;
    CHECK(steady_polarization(cold, 1e4) > 0.9999);
    double prev = 0.0;
    for (double w = 0.25; w < 64.0; w *= 2.0) {
      const double p = steady_polarization(cold, w);
      CHECK(p > prev);
      CHECK(p < 1.0);
      prev = p;
    }
  }

  SECTION("monotone over the experimental range with default heating") {
    double prev = -1.0;
    for (double w = 0.0; w <= 10.0; w += 0.25) {
      const double p = steady_polarization(cfg, w);
      CHECK(p > prev);
      prev = p;
    }
  }

  CHECK_THROWS_AS(steady_polarization(cfg, -0.1), std::domain_error);
}

TEST_CASE("coupling scaling") {
  const double g0 = hz_to_angular(197.7e3);
  CHECK(coupling_scaling(g0, 1.0, CouplingScaling::SQRT) == g0);
  CHECK(coupling_scaling(g0, 1.0, CouplingScaling::LINEAR) == g0);
  CHECK(coupling_scaling(g0, 0.0, CouplingScaling::SQRT) == 0.0);
  CHECK(coupling_scaling(g0, 0.0, CouplingScaling::LINEAR) == 0.0);
  CHECK_THAT(coupling_scaling(g0, 0.25, CouplingScaling::SQRT), WithinRel(0.5 * g0, 1e-15));
  CHECK_THAT(coupling_scaling(g0, 0.25, CouplingScaling::LINEAR), WithinRel(0.25 * g0, 1e-15));
  CHECK_THROWS_AS(coupling_scaling(g0, -0.1, CouplingScaling::SQRT), std::domain_error);
  CHECK_THROWS_AS(coupling_scaling(g0, 1.1, CouplingScaling::LINEAR), std::domain_error);
}

TEST_CASE("splitting versus power") {
  const PumpConfig cfg;
  const SystemParams params = matched_params();
  const std::vector<double> powers{0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 10.0};

  SECTION("linear scaling with matched damping gives 2 g0 P") {
    const std::vector<double> dnu = splitting_vs_power(cfg, params, powers, CouplingScaling::LINEAR);
    REQUIRE(dnu.size() == powers.size());
    CHECK(dnu[0] == 0.0);
    for (std::size_t i = 1; i < powers.size(); ++i) {
      const double p = steady_polarization(cfg, powers[i]);
      CHECK_THAT(dnu[i], WithinRel(2.0 * params.g * p, 1e-12));
    }
  }

  SECTION("rises then levels off") {
    const std::vector<double> dnu = splitting_vs_power(cfg, params, powers, CouplingScaling::SQRT);
    for (std::size_t i = 1; i < dnu.size(); ++i)
      CHECK(dnu[i] > dnu[i - 1]);
    CHECK((dnu.back() - dnu[4]) / dnu[4] < 0.15); // beyond 3 W: < 15% left
  }

  SECTION("deterministic") {
    const auto a = splitting_vs_power(cfg, params, powers, CouplingScaling::SQRT);
    const auto b = splitting_vs_power(cfg, params, powers, CouplingScaling::SQRT);
    CHECK(a == b);
  }
}

TEST_CASE("Monte-Carlo band") {
  const PumpConfig cfg;
  const SystemParams params = matched_params();
  const std::vector<double> powers{0.5, 1.0, 2.0, 3.0, 5.0, 8.0};
  const std::vector<UncertainParam> uncertain{
      {"eta_pump", Distribution::LOG_NORMAL, cfg.eta_pump, 0.3},
      {"a_raman", Distribution::LOG_NORMAL, cfg.t1_model.a_raman, 0.2},
      {"g0", Distribution::LOG_NORMAL, params.g, 0.05},
  };

  SECTION("zero-width distributions collapse the band") {
    const MonteCarloBand band =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, {}, powers, 200, 7);
    for (std::size_t j = 0; j < powers.size(); ++j) {
      CHECK(band.polarization_lower[j] == band.polarization_upper[j]);
      CHECK_THAT(band.polarization_median[j],
                 WithinRel(steady_polarization(cfg, powers[j]), 1e-14));
      CHECK(band.splitting_lower[j] == band.splitting_upper[j]);
    }
  }

  SECTION("ordered percentiles and seed determinism") {
    const MonteCarloBand a =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, uncertain, powers, 400, 42);
    const MonteCarloBand b =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, uncertain, powers, 400, 42);
    for (std::size_t j = 0; j < powers.size(); ++j) {
      CHECK(a.polarization_lower[j] <= a.polarization_median[j]);
      CHECK(a.polarization_median[j] <= a.polarization_upper[j]);
      CHECK(a.splitting_lower[j] <= a.splitting_median[j]);
      CHECK(a.splitting_median[j] <= a.splitting_upper[j]);
      CHECK(a.polarization_median[j] == b.polarization_median[j]);
      CHECK(a.splitting_lower[j] == b.splitting_lower[j]);
      CHECK(a.splitting_upper[j] == b.splitting_upper[j]);
    }
    const MonteCarloBand c =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, uncertain, powers, 400, 43);
    CHECK(c.polarization_median != a.polarization_median);
  }

  SECTION("band width grows with the declared width") {
    std::vector<UncertainParam> narrow = uncertain;
    std::vector<UncertainParam> wide = uncertain;
    narrow[0].relative_width = 0.05;
    wide[0].relative_width = 0.6;
    const MonteCarloBand nb =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, narrow, {1.0}, 2000, 11);
    const MonteCarloBand wb =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, wide, {1.0}, 2000, 11);
    CHECK(wb.polarization_upper[0] - wb.polarization_lower[0] >
          nb.polarization_upper[0] - nb.polarization_lower[0]);
  }

  SECTION("worker count does not change the draws") {
    setenv("SPINFRIDGE_THREADS", "3", 1);
    const MonteCarloBand a =
        monte_carlo_band(cfg, params, CouplingScaling::SQRT, uncertain, powers, 300, 5);
    setenv("SPINFRIDGE_THREADS", "1", 1);
    const MonteCarloBand b =
        monte_carlo_band(cfg, params, CouplingScaling::SQRT, uncertain, powers, 300, 5);
    unsetenv("SPINFRIDGE_THREADS");
    CHECK(a.polarization_lower == b.polarization_lower);
    CHECK(a.polarization_median == b.polarization_median);
    CHECK(a.splitting_upper == b.splitting_upper);
  }

  SECTION("median is stable against doubling the sample count") {
    const MonteCarloBand a =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, uncertain, powers, 2000, 99);
    const MonteCarloBand b =
        monte_carlo_band(cfg, params, CouplingScaling::LINEAR, uncertain, powers, 4000, 99);
    for (std::size_t j = 0; j < powers.size(); ++j)
      CHECK(std::abs(a.polarization_median[j] - b.polarization_median[j]) /
                b.polarization_median[j] <
            0.03);
  }

  SECTION("input validation") {
    CHECK_THROWS_AS(monte_carlo_band(cfg, params, CouplingScaling::SQRT, uncertain, powers, 99, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(monte_carlo_band(cfg, params, CouplingScaling::SQRT,
                                     {{"not_a_knob", Distribution::NORMAL, 1.0, 0.1}}, powers,
                                     200, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("parallel_for partitioning is invisible") {
  std::vector<double> serial(1000), forked(1000);
  parallel_for(1000, [&](std::size_t i) { serial[i] = std::sin(0.1 * static_cast<double>(i)); },
               1);
  parallel_for(1000, [&](std::size_t i) { forked[i] = std::sin(0.1 * static_cast<double>(i)); },
               4);
  CHECK(serial == forked);

  SECTION("exceptions surface") {
    CHECK_THROWS_AS(parallel_for(100,
                                 [](std::size_t i) {
                                   if (i == 57)
                                     throw std::runtime_error("boom");
                                 },
                                 4),
                    std::runtime_error);
  }
}
