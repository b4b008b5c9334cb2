// constants.hpp: exact-SI physical constants and unit helpers.
#pragma once

namespace spinfridge {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

// SI defining constants, exact since the 2019 redefinition.
inline constexpr double planck = 6.62607015e-34;             // J s
inline constexpr double hbar = planck / two_pi;              // J s
inline constexpr double k_boltzmann = 1.380649e-23;          // J / K
inline constexpr double elementary_charge = 1.602176634e-19; // C

// Rates and detunings are angular frequencies (rad/s) everywhere inside the
// library; user-facing configuration speaks plain Hz and is converted once
// on input.
[[nodiscard]] constexpr double hz_to_angular(double hz) { return two_pi * hz; }
[[nodiscard]] constexpr double angular_to_hz(double omega) { return omega / two_pi; }

// Activation gaps of the relaxation model are quoted in meV.
[[nodiscard]] constexpr double mev_to_joule(double mev) {
  return mev * 1.0e-3 * elementary_charge;
}

} // namespace spinfridge
