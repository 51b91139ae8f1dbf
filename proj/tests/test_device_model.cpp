#include <doctest.h>

#include <cmath>
#include <random>

#include "vacmirror/device_model.hpp"
#include "vacmirror/errors.hpp"

using namespace vacmirror;
using doctest::Approx;
using constants::two_pi;

namespace {

// Reference values below were computed with 30-digit arithmetic from the
// same formulas and frozen here.
constexpr double kF0 = 5.930625959443326e9;
constexpr double kF03 = 4.458177331112973e9;
constexpr double kVelocity = 1.199169832e8;
constexpr double kNodeHz = 5.450771963636364e9;
constexpr double kKs = 8.7557560319774579e15;

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

}  // namespace

TEST_CASE("transition frequency at zero and 0.3 flux quanta") {
  const auto t = DeviceConfig::reference().transmon;
  CHECK(close(transition_frequency(t, {0.0}) / two_pi, kF0, 1e-14));
  CHECK(close(transition_frequency(t, {0.3}) / two_pi, kF03, 1e-13));
  // within 0.1% of the quoted 5.93 GHz
  CHECK(close(transition_frequency(t, {0.0}) / two_pi, 5.93e9, 1e-3));
}

TEST_CASE("transition frequency is even and periodic in flux") {
  const auto t = DeviceConfig::reference().transmon;
  for (double phi : {0.0, 0.05, 0.17, 0.31, 0.44}) {
    const double w = transition_frequency(t, {phi});
    CHECK(close(transition_frequency(t, {-phi}), w, 1e-14));
    CHECK(close(transition_frequency(t, {phi + 1.0}), w, 1e-12));
  }
}

TEST_CASE("flux near half a quantum is rejected") {
  const auto t = DeviceConfig::reference().transmon;
  CHECK_THROWS_AS(transition_frequency(t, {0.5}), FluxOutOfTransmonRegime);
  CHECK_THROWS_AS(transition_frequency(t, {0.49}), FluxOutOfTransmonRegime);
  // |cos(pi*0.48)| = 0.0628 is still inside the default bound
  CHECK_NOTHROW(transition_frequency(t, {0.48}));
  CHECK_THROWS_AS(transition_frequency(t, {0.48}, 0.1), FluxOutOfTransmonRegime);
}

TEST_CASE("flux_for_frequency inverts the frequency formula") {
  const auto t = DeviceConfig::reference().transmon;
  CHECK(flux_for_frequency(t, two_pi * 4.8e9).phi_over_phi0 ==
        Approx(0.2646718686271026).epsilon(1e-12));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.48);
  for (int i = 0; i < 200; ++i) {
    const double phi = u(rng);
    const double w = transition_frequency(t, {phi});
    CHECK(flux_for_frequency(t, w).phi_over_phi0 == Approx(phi).epsilon(1e-9));
  }
  CHECK_THROWS_AS(flux_for_frequency(t, two_pi * 6.0e9), FluxOutOfTransmonRegime);
  // below the frequency reached at the validity bound, 1.0311 GHz
  CHECK_THROWS_AS(flux_for_frequency(t, two_pi * 1.0e9), FluxOutOfTransmonRegime);
  CHECK_NOTHROW(flux_for_frequency(t, two_pi * 1.04e9));
}

TEST_CASE("line geometry: velocity, wavelength and phase") {
  const auto g = DeviceConfig::reference().geometry;
  CHECK(g.velocity() == Approx(kVelocity).epsilon(1e-15));
  const double w = two_pi * 5.93e9;
  CHECK(wavelength(g, w) == Approx(0.02022208822934233).epsilon(1e-14));
  CHECK(l_over_lambda(g, w) == Approx(0.5439596482443865).epsilon(1e-14));
  CHECK(roundtrip_phase(g, wavelength(g, w)).radians() ==
        Approx(9.977191192685203).epsilon(1e-14));
  // the rounded figure of 9.978 rad
  CHECK(std::abs(roundtrip_phase(g, wavelength(g, w)).radians() - 9.978) < 1e-3);
  CHECK(frequency_for_l_over_lambda(g, 0.5) == Approx(two_pi * kNodeHz).epsilon(1e-14));
}

TEST_CASE("phase is stored unreduced") {
  CHECK(roundtrip_phase_at(0.75).over_pi == 4.0);
  CHECK(roundtrip_phase_at(2.5).over_pi == 11.0);
}

TEST_CASE("cos_pi is exact at half-integer multiples") {
  CHECK(cos_pi(0.0) == 1.0);
  CHECK(cos_pi(0.5) == 0.0);
  CHECK(cos_pi(1.0) == -1.0);
  CHECK(cos_pi(1.5) == 0.0);
  CHECK(cos_pi(3.0) == -1.0);
  CHECK(cos_pi(4.0) == 1.0);
  CHECK(cos_pi(-3.5) == 0.0);
  CHECK(cos_pi(1.0 / 3.0) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("Gamma_1 versus phase: bounds, node and antinode") {
  const auto c = DeviceConfig::reference().coupling;
  CHECK(gamma1_theory(c, roundtrip_phase_at(0.5)) == 0.0);
  CHECK(gamma1_theory(c, roundtrip_phase_at(0.75)) == 2.0 * c.gamma1_bare);
  CHECK(gamma1_theory(c, roundtrip_phase_at(0.625)) == c.gamma1_bare);
  const auto g = DeviceConfig::reference().geometry;
  const double g1 = gamma1_theory(c, roundtrip_phase(g, wavelength(g, two_pi * 5.93e9)));
  CHECK(g1 / two_pi == Approx(4.908397713000292e6).epsilon(1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double v = gamma1_theory(c, roundtrip_phase_at(u(rng)));
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 * c.gamma1_bare);
  }
}

TEST_CASE("spectral density in quanta") {
  const double w = two_pi * 5e9;
  CHECK(spectral_density_theory(w, roundtrip_phase_at(0.5)).quanta == 0.0);
  CHECK(spectral_density_theory(w, roundtrip_phase_at(0.625)).quanta == 1.0);
  CHECK(spectral_density_theory(w, roundtrip_phase_at(0.75)).quanta == 2.0);
  const auto s = spectral_density_theory(w, roundtrip_phase_at(0.6));
  CHECK(s.joule_per_hz == Approx(s.quanta * constants::hbar * w).epsilon(1e-15));
  // s = 0.02 at L/lambda = 0.51594214021463
  CHECK(spectral_density_theory(w, roundtrip_phase_at(0.51594214021463)).quanta ==
        Approx(0.02).epsilon(1e-10));
}

TEST_CASE("coupling from circuit parameters") {
  const auto d = DeviceConfig::reference();
  const double k = coupling_from_circuit(d.transmon, d.geometry, d.coupling.beta);
  CHECK(k == Approx(kKs).epsilon(1e-13));
  CHECK(close(k, 8.8e15, 1e-2));
  // at a third of a flux quantum E_J halves, so k drops by 2^(-1/4)
  const double k_q = coupling_from_circuit(d.transmon, d.geometry, d.coupling.beta, {1.0 / 3.0});
  CHECK(k_q / k == Approx(std::pow(0.5, 0.25)).epsilon(1e-13));
  CHECK(coupling_from_circuit(d.transmon, d.geometry, 2 * d.coupling.beta) ==
        Approx(2 * k).epsilon(1e-15));
}

TEST_CASE("node frequency by bisection") {
  const auto d = DeviceConfig::reference();
  const double w = node_frequency(d.geometry, two_pi * 4.8e9, two_pi * 5.93e9);
  CHECK(std::abs(w / two_pi - kNodeHz) < 1.0);
  CHECK(flux_for_frequency(d.transmon, w).phi_over_phi0 ==
        Approx(0.17435092125525273).epsilon(1e-9));
  CHECK_THROWS_AS(node_frequency(d.geometry, two_pi * 5.5e9, two_pi * 5.9e9), InvalidParameter);
}

TEST_CASE("parameter validation") {
  auto d = DeviceConfig::reference();
  CHECK_NOTHROW(d.validate());
  d.transmon.ec_hz = -1.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = DeviceConfig::reference();
  d.geometry.epsilon = 0.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = DeviceConfig::reference();
  d.coupling.gamma_phi = -1.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = DeviceConfig::reference();
  d.geometry.length_m = 0.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
}
