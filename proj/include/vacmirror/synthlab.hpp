#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vacmirror/device_model.hpp"
#include "vacmirror/scattering.hpp"

// Synthetic spectroscopy: weak-probe line scans per flux bias, 2D
// flux/probe maps, and resonant power sweeps, with additive circular complex
// Gaussian noise drawn from a counter-based generator.
namespace vacmirror {

// How the synthetic device's Gamma_1(Phi) is generated.
//  bare_rate:       Gamma_1 = 2 Gamma_1b cos^2(theta/2), constant Gamma_1b.
//  vacuum_coupling: Gamma_1 = k_true^2 S(w_a) = 2 k_true^2 hbar w_a cos^2(theta/2).
enum class Gamma1Model { bare_rate, vacuum_coupling };

// Probe window centred on the theoretical w_a of each trace, with a
// half-width given in theoretical linewidths gamma.
struct ProbeWindow {
  double linewidths = 15.0;
  std::size_t points = 301;
};

struct SimulationSettings {
  Gamma1Model gamma1_model = Gamma1Model::bare_rate;
  std::optional<double> k_true;       // s^-1 / sqrt(W)
  double power_calibration_db = 0.0;  // recorded power = true power * 10^(dB/10)
  double noise_sigma = 0.01;          // per quadrature
  double band_lo_hz = 4.8e9;
  double band_hi_hz = 5.93e9;
  std::size_t flux_points = 121;
  ProbeWindow window;
  std::vector<double> line_fluxes_phi0;
  double sweep_flux_phi0 = 0.0;
  std::size_t sweep_points = 121;
  double sweep_decades_below = 3.0;  // relative to the zero crossing
  double sweep_decades_above = 2.0;

  void validate() const;
};

struct AtomTruth {
  FluxBias flux;
  double omega_a = 0.0;
  double l_over_lambda = 0.0;
  RateSet rates{0.0, 0.0};
};

AtomTruth atom_truth(const DeviceConfig& cfg, const SimulationSettings& sim, FluxBias flux);

struct SpectroscopyPoint {
  double omega_p = 0.0;  // rad/s
  complex r_p;
};

struct SpectroscopyTrace {
  FluxBias flux;
  std::vector<SpectroscopyPoint> points;
  std::optional<double> noise_sigma;
  std::optional<std::uint64_t> seed;
};

struct PowerPoint {
  double power_w = 0.0;
  complex r_p;
};

struct PowerSweep {
  FluxBias flux;
  std::vector<PowerPoint> points;
  std::optional<double> noise_sigma;
  std::optional<std::uint64_t> seed;
};

// Noise streams. Each trace draws from its own stream; point i of a trace is
// counter i within it.
namespace streams {
inline constexpr std::uint64_t flux_map = 0;
inline constexpr std::uint64_t lines = std::uint64_t{1} << 40;
inline constexpr std::uint64_t power_sweep = std::uint64_t{1} << 41;
}  // namespace streams

// [lo, hi] in rad/s that probe frequencies must stay inside: the transmon's
// tunable range (validity bound to zero flux) widened by 10% of its top.
std::pair<double, double> device_band(const DeviceConfig& cfg);

// Flux biases in [0, 1/2) whose transition frequencies span [lo_hz, hi_hz],
// evenly spaced in flux and ordered by increasing flux.
std::vector<FluxBias> flux_grid_for_band(const DeviceConfig& cfg, double lo_hz,
                                         double hi_hz, std::size_t n);

// Evenly spaced probe grid (rad/s) around truth.omega_a.
std::vector<double> probe_grid(const AtomTruth& truth, const ProbeWindow& window);

SpectroscopyTrace synth_line(const DeviceConfig& cfg, const SimulationSettings& sim,
                             FluxBias flux, std::span<const double> grid,
                             double noise_sigma, std::uint64_t seed,
                             std::uint64_t stream = streams::lines);

std::vector<SpectroscopyTrace> synth_flux_map(const DeviceConfig& cfg,
                                              const SimulationSettings& sim,
                                              std::span<const FluxBias> fluxes,
                                              const ProbeWindow& window,
                                              double noise_sigma, std::uint64_t seed);

// Log-spaced recorded powers around the resonant zero crossing of r_p.
std::vector<double> default_power_grid(const DeviceConfig& cfg,
                                       const SimulationSettings& sim, FluxBias flux);

PowerSweep synth_power_sweep(const DeviceConfig& cfg, const SimulationSettings& sim,
                             FluxBias flux, std::span<const double> powers_w,
                             double noise_sigma, std::uint64_t seed);

// Flux in [lo, hi] where the theoretical Gamma_1 equals target, by bisection.
// Gamma_1 must be monotone on the bracket.
FluxBias flux_for_gamma1(const DeviceConfig& cfg, const SimulationSettings& sim,
                         double gamma1_target, FluxBias lo, FluxBias hi);

}  // namespace vacmirror
