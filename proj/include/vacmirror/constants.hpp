#pragma once

#include <numbers>

// SI 2019 exact values (CODATA 2018). Every constant below is exact by
// definition of the SI units except hbar and the flux quantum, which are
// derived here in double precision.
namespace vacmirror::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light = 299'792'458.0;      // m/s
inline constexpr double planck = 6.626'070'15e-34;           // J s
inline constexpr double elementary_charge = 1.602'176'634e-19;  // C
inline constexpr double hbar = planck / two_pi;              // 1.054571817...e-34 J s
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

}  // namespace vacmirror::constants
