#include "vacmirror/device_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "vacmirror/errors.hpp"

namespace vacmirror {

void TransmonParams::validate() const {
  if (!(ej0_hz > 0.0) || !(ec_hz > 0.0)) {
    throw InvalidParameter(
        fmt::format("transmon energies must be positive (ej0={}, ec={})",
                    ej0_hz, ec_hz));
  }
}

double FluxBias::josephson_fraction() const {
  return std::abs(cos_pi(phi_over_phi0));
}

void LineGeometry::validate() const {
  if (!(length_m > 0.0) || !(epsilon >= 1.0) || !(z0_ohm > 0.0)) {
    throw InvalidParameter(fmt::format(
        "line geometry out of range (L={} m, epsilon={}, Z0={} ohm)", length_m,
        epsilon, z0_ohm));
  }
}

void CouplingParams::validate() const {
  if (!(gamma1_bare > 0.0) || !(gamma_phi >= 0.0) || !(beta > 0.0 && beta < 1.0)) {
    throw InvalidParameter(fmt::format(
        "coupling parameters out of range (gamma1_bare={}, gamma_phi={}, beta={})",
        gamma1_bare, gamma_phi, beta));
  }
}

DeviceConfig DeviceConfig::reference() {
  DeviceConfig c;
  c.transmon = {13.1e9, 0.38e9};
  c.geometry = {11e-3, 6.25, 50.0};
  c.coupling = {constants::two_pi * 33e6, constants::two_pi * 1e6, 0.4};
  return c;
}

void DeviceConfig::validate() const {
  transmon.validate();
  geometry.validate();
  coupling.validate();
  if (!(flux_validity_bound > 0.0 && flux_validity_bound < 1.0)) {
    throw InvalidParameter(fmt::format(
        "flux validity bound must lie in (0, 1), got {}", flux_validity_bound));
  }
  // 8 E_J E_C > E_C^2 down to the validity bound keeps w_a positive.
  if (!(8.0 * transmon.ej0_hz * flux_validity_bound > transmon.ec_hz)) {
    throw InvalidParameter("transmon leaves the E_J >> E_C regime above the validity bound");
  }
}

double cos_pi(double t) {
  double r = std::abs(std::fmod(t, 2.0));  // exact, in [0, 2)
  if (r > 1.0) r = 2.0 - r;                // exact by Sterbenz, now in [0, 1]
  if (r == 0.0) return 1.0;
  if (r == 0.5) return 0.0;
  if (r == 1.0) return -1.0;
  if (r > 0.5) return -std::cos(constants::pi * (1.0 - r));
  return std::cos(constants::pi * r);
}

namespace {

void check_regime(FluxBias f, double fraction, double validity_bound) {
  if (!(fraction >= validity_bound)) {
    throw FluxOutOfTransmonRegime(fmt::format(
        "FluxOutOfTransmonRegime: |cos(pi Phi/Phi0)| = {:.6g} at Phi/Phi0 = {:.6g} "
        "is below the validity bound {:.6g}",
        fraction, f.phi_over_phi0, validity_bound));
  }
}

}  // namespace

double transition_frequency(const TransmonParams& t, FluxBias f,
                            double validity_bound) {
  t.validate();
  const double fraction = f.josephson_fraction();
  check_regime(f, fraction, validity_bound);
  const double f_hz = std::sqrt(8.0 * t.ec_hz * t.ej0_hz * fraction) - t.ec_hz;
  if (!(f_hz > 0.0)) {
    throw FluxOutOfTransmonRegime(fmt::format(
        "FluxOutOfTransmonRegime: transmon formula gives a non-positive "
        "frequency at Phi/Phi0 = {:.6g}",
        f.phi_over_phi0));
  }
  return constants::two_pi * f_hz;
}

FluxBias flux_for_frequency(const TransmonParams& t, double omega_a,
                            double validity_bound) {
  t.validate();
  const double f_hz = omega_a / constants::two_pi;
  const double s = f_hz + t.ec_hz;
  double fraction = s * s / (8.0 * t.ec_hz * t.ej0_hz);
  if (fraction > 1.0 && fraction < 1.0 + 1e-12) fraction = 1.0;
  if (!(f_hz > 0.0) || fraction > 1.0) {
    const double f_max = std::sqrt(8.0 * t.ec_hz * t.ej0_hz) - t.ec_hz;
    throw FluxOutOfTransmonRegime(fmt::format(
        "FluxOutOfTransmonRegime: {:.9g} Hz is outside the tunable band "
        "(maximum {:.9g} Hz at zero flux)",
        f_hz, f_max));
  }
  FluxBias flux{std::acos(fraction) / constants::pi};
  check_regime(flux, fraction, validity_bound);
  return flux;
}

double wavelength(const LineGeometry& g, double omega_a) {
  if (!(omega_a > 0.0)) {
    throw InvalidParameter(fmt::format("wavelength needs omega_a > 0, got {}", omega_a));
  }
  return constants::two_pi * g.velocity() / omega_a;
}

double l_over_lambda(const LineGeometry& g, double omega_a) {
  return g.length_m / wavelength(g, omega_a);
}

double frequency_for_l_over_lambda(const LineGeometry& g, double x) {
  if (!(x > 0.0)) {
    throw InvalidParameter(fmt::format("L/lambda must be positive, got {}", x));
  }
  return constants::two_pi * g.velocity() * x / g.length_m;
}

Phase roundtrip_phase(const LineGeometry& g, double lambda) {
  if (!(lambda > 0.0)) {
    throw InvalidParameter(fmt::format("wavelength must be positive, got {}", lambda));
  }
  return roundtrip_phase_at(g.length_m / lambda);
}

Phase roundtrip_phase_at(double l_over_lambda) {
  // theta = 2 (2 pi L / lambda) + pi; the extra pi is the mirror.
  return Phase{4.0 * l_over_lambda + 1.0};
}

double gamma1_theory(const CouplingParams& c, Phase theta) {
  // 2 cos^2(theta/2) == 1 + cos(theta)
  return c.gamma1_bare * (1.0 + cos_pi(theta.over_pi));
}

SpectralDensity spectral_density_theory(double omega_a, Phase theta) {
  if (!(omega_a > 0.0)) {
    throw InvalidParameter(
        fmt::format("spectral density needs omega_a > 0, got {}", omega_a));
  }
  const double quanta = 1.0 + cos_pi(theta.over_pi);
  return {quanta * constants::hbar * omega_a, quanta};
}

double coupling_from_circuit(const TransmonParams& t, const LineGeometry& g,
                             double beta, FluxBias flux, double validity_bound) {
  t.validate();
  g.validate();
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InvalidParameter(fmt::format("beta must lie in (0, 1), got {}", beta));
  }
  const double fraction = flux.josephson_fraction();
  check_regime(flux, fraction, validity_bound);
  const double ej = t.ej0_hz * fraction;
  return constants::elementary_charge * beta * std::sqrt(g.z0_ohm) *
         std::pow(ej / (2.0 * t.ec_hz), 0.25) / constants::hbar;
}

double node_frequency(const LineGeometry& g, double omega_lo, double omega_hi) {
  g.validate();
  if (!(omega_lo > 0.0) || !(omega_hi > omega_lo)) {
    throw InvalidParameter("node_frequency needs 0 < omega_lo < omega_hi");
  }
  auto phase = [&](double w) { return roundtrip_phase_at(l_over_lambda(g, w)).over_pi; };
  double target = std::ceil(phase(omega_lo));
  if (std::fmod(target, 2.0) == 0.0) target += 1.0;
  if (phase(omega_hi) < target) {
    throw InvalidParameter(fmt::format(
        "no voltage node between {:.9g} Hz and {:.9g} Hz",
        omega_lo / constants::two_pi, omega_hi / constants::two_pi));
  }
  double lo = omega_lo;
  double hi = omega_hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phase(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace vacmirror
