#include "vacmirror/synthlab.hpp"

#include <fmt/format.h>

#include <cmath>

#include "vacmirror/errors.hpp"
#include "vacmirror/parallel.hpp"
#include "vacmirror/random.hpp"

namespace vacmirror {

void SimulationSettings::validate() const {
  if (!(noise_sigma >= 0.0)) throw InvalidParameter("noise_sigma must be non-negative");
  if (!(band_lo_hz > 0.0 && band_hi_hz > band_lo_hz)) {
    throw InvalidParameter("band must satisfy 0 < band_lo_hz < band_hi_hz");
  }
  if (flux_points < 1) throw InvalidParameter("flux_points must be at least 1");
  if (!(window.linewidths > 0.0) || window.points < 2) {
    throw InvalidParameter("probe window needs linewidths > 0 and at least 2 points");
  }
  if (k_true && !(*k_true > 0.0)) throw InvalidParameter("k_true must be positive");
  if (!std::isfinite(power_calibration_db)) {
    throw InvalidParameter("power_calibration_db must be finite");
  }
  if (sweep_points < 2 || !(sweep_decades_below >= 0.0) || !(sweep_decades_above >= 0.0) ||
      !(sweep_decades_below + sweep_decades_above > 0.0)) {
    throw InvalidParameter("power sweep needs at least 2 points over a nonzero range");
  }
}

namespace {

double require_k_true(const SimulationSettings& sim) {
  if (!sim.k_true) {
    throw MissingTrueCoupling(
        "MissingTrueCoupling: this synthesis needs simulation.k_true_hz_per_sqrt_w");
  }
  return *sim.k_true;
}

double calibration_scale(const SimulationSettings& sim) {
  return std::pow(10.0, sim.power_calibration_db / 10.0);
}

void check_increasing(std::span<const double> xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw InvalidParameter(fmt::format("{} must be strictly increasing (index {})", what, i));
    }
  }
}

}  // namespace

AtomTruth atom_truth(const DeviceConfig& cfg, const SimulationSettings& sim, FluxBias flux) {
  const double omega_a = transition_frequency(cfg.transmon, flux, cfg.flux_validity_bound);
  const double x = l_over_lambda(cfg.geometry, omega_a);
  const Phase theta = roundtrip_phase_at(x);
  double gamma1 = 0.0;
  switch (sim.gamma1_model) {
    case Gamma1Model::bare_rate:
      gamma1 = gamma1_theory(cfg.coupling, theta);
      break;
    case Gamma1Model::vacuum_coupling: {
      const double k = require_k_true(sim);
      gamma1 = k * k * spectral_density_theory(omega_a, theta).joule_per_hz;
      break;
    }
  }
  return {flux, omega_a, x, RateSet(gamma1, cfg.coupling.gamma_phi)};
}

std::pair<double, double> device_band(const DeviceConfig& cfg) {
  const auto& t = cfg.transmon;
  const double f_lo =
      std::sqrt(8.0 * t.ec_hz * t.ej0_hz * cfg.flux_validity_bound) - t.ec_hz;
  const double f_hi = std::sqrt(8.0 * t.ec_hz * t.ej0_hz) - t.ec_hz;
  const double margin = 0.1 * f_hi;
  return {constants::two_pi * std::max(f_lo - margin, 0.0),
          constants::two_pi * (f_hi + margin)};
}

std::vector<FluxBias> flux_grid_for_band(const DeviceConfig& cfg, double lo_hz,
                                         double hi_hz, std::size_t n) {
  if (!(lo_hz > 0.0 && hi_hz > lo_hz) || n < 1) {
    throw InvalidParameter("flux grid needs 0 < lo < hi and n >= 1");
  }
  // Frequency falls with flux on [0, 1/2), so the top of the band sets the
  // smallest flux.
  const double phi_lo =
      flux_for_frequency(cfg.transmon, constants::two_pi * hi_hz, cfg.flux_validity_bound)
          .phi_over_phi0;
  const double phi_hi =
      flux_for_frequency(cfg.transmon, constants::two_pi * lo_hz, cfg.flux_validity_bound)
          .phi_over_phi0;
  std::vector<FluxBias> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back({phi_lo});
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({phi_lo + u * (phi_hi - phi_lo)});
  }
  return out;
}

std::vector<double> probe_grid(const AtomTruth& truth, const ProbeWindow& window) {
  const double gamma = truth.rates.gamma();
  if (!(gamma > 0.0) || window.points < 2 || !(window.linewidths > 0.0)) {
    throw InvalidParameter("probe grid needs gamma > 0 and a non-empty window");
  }
  const double half = window.linewidths * gamma;
  const double step = 2.0 * half / static_cast<double>(window.points - 1);
  std::vector<double> grid(window.points);
  for (std::size_t i = 0; i < window.points; ++i) {
    grid[i] = truth.omega_a - half + step * static_cast<double>(i);
  }
  return grid;
}

SpectroscopyTrace synth_line(const DeviceConfig& cfg, const SimulationSettings& sim,
                             FluxBias flux, std::span<const double> grid,
                             double noise_sigma, std::uint64_t seed,
                             std::uint64_t stream) {
  if (grid.empty()) throw InvalidParameter("probe grid is empty");
  if (!(noise_sigma >= 0.0)) throw InvalidParameter("noise_sigma must be non-negative");
  check_increasing(grid, "probe grid");
  const auto [band_lo, band_hi] = device_band(cfg);
  if (grid.front() < band_lo || grid.back() > band_hi) {
    throw GridOutsideBand(fmt::format(
        "GridOutsideBand: probe grid [{:.9g}, {:.9g}] Hz leaves the device band "
        "[{:.9g}, {:.9g}] Hz",
        grid.front() / constants::two_pi, grid.back() / constants::two_pi,
        band_lo / constants::two_pi, band_hi / constants::two_pi));
  }

  const AtomTruth truth = atom_truth(cfg, sim, flux);
  const double gamma = truth.rates.gamma();
  if (gamma > 0.0) {
    // At least 8 samples per linewidth.
    const double max_step = gamma / 8.0 * (1.0 + 1e-9);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (grid[i] - grid[i - 1] > max_step) {
        throw GridTooCoarse(fmt::format(
            "GridTooCoarse: probe spacing {:.6g} Hz exceeds gamma/8 = {:.6g} Hz",
            (grid[i] - grid[i - 1]) / constants::two_pi, gamma / 8.0 / constants::two_pi));
      }
    }
  }

  SpectroscopyTrace trace;
  trace.flux = flux;
  trace.noise_sigma = noise_sigma;
  trace.seed = seed;
  trace.points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    complex rp = reflection_weak(truth.rates, truth.omega_a - grid[i]);
    if (noise_sigma > 0.0) {
      const auto [re, im] = gaussian_pair(seed, stream, i);
      rp += noise_sigma * complex(re, im);
    }
    trace.points.push_back({grid[i], rp});
  }
  return trace;
}

std::vector<SpectroscopyTrace> synth_flux_map(const DeviceConfig& cfg,
                                              const SimulationSettings& sim,
                                              std::span<const FluxBias> fluxes,
                                              const ProbeWindow& window,
                                              double noise_sigma, std::uint64_t seed) {
  std::vector<SpectroscopyTrace> traces(fluxes.size());
  detail::parallel_for(fluxes.size(), [&](std::size_t i) {
    const auto grid = probe_grid(atom_truth(cfg, sim, fluxes[i]), window);
    traces[i] = synth_line(cfg, sim, fluxes[i], grid, noise_sigma, seed,
                           streams::flux_map + i);
  });
  return traces;
}

std::vector<double> default_power_grid(const DeviceConfig& cfg,
                                       const SimulationSettings& sim, FluxBias flux) {
  const double k = require_k_true(sim);
  const AtomTruth truth = atom_truth(cfg, sim, flux);
  const double g1 = truth.rates.gamma1();
  const double gamma = truth.rates.gamma();
  if (!(g1 > 0.0)) throw InvalidParameter("power sweep needs Gamma1 > 0 at the sweep flux");
  // Centre on the zero crossing when it exists, otherwise on saturation.
  const double centre_true = g1 > gamma ? (g1 * g1 - g1 * gamma) / (k * k) : g1 * gamma / (k * k);
  const double centre = centre_true * calibration_scale(sim);
  const double lo = -sim.sweep_decades_below;
  const double span = sim.sweep_decades_below + sim.sweep_decades_above;
  std::vector<double> grid(sim.sweep_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    grid[i] = centre * std::pow(10.0, lo + u * span);
  }
  return grid;
}

PowerSweep synth_power_sweep(const DeviceConfig& cfg, const SimulationSettings& sim,
                             FluxBias flux, std::span<const double> powers_w,
                             double noise_sigma, std::uint64_t seed) {
  const double k = require_k_true(sim);
  if (!(noise_sigma >= 0.0)) throw InvalidParameter("noise_sigma must be non-negative");
  check_increasing(powers_w, "power grid");
  if (!powers_w.empty() && !(powers_w.front() >= 0.0)) {
    throw InvalidParameter("powers must be non-negative");
  }
  const AtomTruth truth = atom_truth(cfg, sim, flux);
  const double scale = calibration_scale(sim);

  PowerSweep sweep;
  sweep.flux = flux;
  sweep.noise_sigma = noise_sigma;
  sweep.seed = seed;
  sweep.points.reserve(powers_w.size());
  for (std::size_t i = 0; i < powers_w.size(); ++i) {
    const double rabi = k * std::sqrt(powers_w[i] / scale);
    complex rp(reflection_power(truth.rates, rabi), 0.0);
    if (noise_sigma > 0.0) {
      const auto [re, im] = gaussian_pair(seed, streams::power_sweep, i);
      rp += noise_sigma * complex(re, im);
    }
    sweep.points.push_back({powers_w[i], rp});
  }
  return sweep;
}

FluxBias flux_for_gamma1(const DeviceConfig& cfg, const SimulationSettings& sim,
                         double gamma1_target, FluxBias lo, FluxBias hi) {
  auto excess = [&](double phi) {
    return atom_truth(cfg, sim, {phi}).rates.gamma1() - gamma1_target;
  };
  double a = lo.phi_over_phi0;
  double b = hi.phi_over_phi0;
  double fa = excess(a);
  const double fb = excess(b);
  if (fa * fb > 0.0) {
    throw InvalidParameter(fmt::format(
        "target Gamma1 = {:.6g} Hz is not bracketed by flux [{}, {}]",
        gamma1_target / constants::two_pi, a, b));
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= std::min(a, b) || mid >= std::max(a, b)) break;
    const double fm = excess(mid);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return {0.5 * (a + b)};
}

}  // namespace vacmirror
