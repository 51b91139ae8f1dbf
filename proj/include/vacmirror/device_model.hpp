#pragma once

#include <cmath>

#include "vacmirror/constants.hpp"

// Closed-form physics of a flux-tunable transmon at distance L in front of
// the shorted end of a transmission line.
//
// Internal convention: every frequency and rate is angular (rad/s). Energies
// are carried as frequencies E/h in Hz, the way they are usually quoted.
namespace vacmirror {

inline constexpr double kDefaultFluxValidityBound = 0.05;

struct TransmonParams {
  double ej0_hz = 0.0;  // maximum Josephson energy E_J0 / h
  double ec_hz = 0.0;   // charging energy E_C / h

  void validate() const;
};

struct FluxBias {
  double phi_over_phi0 = 0.0;

  // |cos(pi Phi / Phi0)|, the fraction of E_J0 left at this bias.
  double josephson_fraction() const;
};

struct LineGeometry {
  double length_m = 0.0;  // atom-to-mirror distance L
  double epsilon = 1.0;   // effective dielectric constant
  double z0_ohm = 50.0;

  void validate() const;
  double velocity() const {
    return constants::speed_of_light / std::sqrt(epsilon);
  }
};

struct CouplingParams {
  double gamma1_bare = 0.0;  // rad/s, radiative rate without the mirror
  double gamma_phi = 0.0;    // rad/s
  double beta = 0.0;         // C_c / C_sigma

  void validate() const;
};

// Round-trip phase atom -> mirror -> atom, stored in units of pi and never
// reduced. Keeping it in units of pi lets node/antinode landmarks evaluate
// to exact zeros and ones.
struct Phase {
  double over_pi = 0.0;

  double radians() const { return over_pi * constants::pi; }
};

// Everything needed to describe one device.
struct DeviceConfig {
  TransmonParams transmon;
  LineGeometry geometry;
  CouplingParams coupling;
  double flux_validity_bound = kDefaultFluxValidityBound;

  // E_J0/h = 13.1 GHz, E_C/h = 0.38 GHz, Gamma_1b/2pi = 33 MHz,
  // epsilon = 6.25, L = 11 mm, Z0 = 50 ohm, beta = 0.4. Gamma_phi/2pi = 1 MHz
  // is not a measured value; it is chosen so that the resonant zero of r_p
  // exists at zero flux.
  static DeviceConfig reference();

  void validate() const;
};

struct SpectralDensity {
  double joule_per_hz = 0.0;  // S = 2 hbar w cos^2(theta/2)
  double quanta = 0.0;        // S / (hbar w)
};

// cos(pi t) with exact reduction of t modulo 2; exact at multiples of 1/2.
double cos_pi(double t);

// Transition frequency w_a(Phi) in rad/s from the transmon-limit formula
// w_a/2pi = sqrt(8 E_C E_J(Phi)) - E_C. Throws FluxOutOfTransmonRegime when
// |cos(pi Phi/Phi0)| < validity_bound.
double transition_frequency(const TransmonParams& t, FluxBias f,
                            double validity_bound = kDefaultFluxValidityBound);

// Inverse of transition_frequency on the branch Phi/Phi0 in [0, 1/2).
FluxBias flux_for_frequency(const TransmonParams& t, double omega_a,
                            double validity_bound = kDefaultFluxValidityBound);

double wavelength(const LineGeometry& g, double omega_a);
double l_over_lambda(const LineGeometry& g, double omega_a);
double frequency_for_l_over_lambda(const LineGeometry& g, double x);

Phase roundtrip_phase(const LineGeometry& g, double lambda);
Phase roundtrip_phase_at(double l_over_lambda);

// Gamma_1 = 2 Gamma_1b cos^2(theta/2), in [0, 2 Gamma_1b].
double gamma1_theory(const CouplingParams& c, Phase theta);

SpectralDensity spectral_density_theory(double omega_a, Phase theta);

// Atom-field coupling k (s^-1 / sqrt(W)) from circuit parameters,
// k = e beta sqrt(Z0) (E_J / 2 E_C)^(1/4) / hbar, with E_J taken at `flux`.
double coupling_from_circuit(const TransmonParams& t, const LineGeometry& g,
                             double beta, FluxBias flux = {},
                             double validity_bound = kDefaultFluxValidityBound);

// Lowest frequency in [omega_lo, omega_hi] where the round-trip phase is an
// odd multiple of pi (a voltage node at the atom). Found by bisection on the
// phase rather than from v / 2L. Throws InvalidParameter if the band holds
// no node.
double node_frequency(const LineGeometry& g, double omega_lo, double omega_hi);

}  // namespace vacmirror
