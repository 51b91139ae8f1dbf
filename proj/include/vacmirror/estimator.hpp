#pragma once

#include <span>
#include <string>
#include <vector>

#include "vacmirror/device_model.hpp"
#include "vacmirror/synthlab.hpp"

// Inverse pipeline: weak-probe line fits per flux bias, coupling calibration
// from a resonant power sweep, and conversion of Gamma_1 into the vacuum
// spectral density in quanta.
namespace vacmirror {

struct FitOptions {
  // A line counts as resolved when its fitted depth Gamma_1/gamma exceeds
  // this many times the residual RMS and its fitted gamma is at least the
  // mean probe spacing.
  double resolvability_factor = 5.0;
  int max_iterations = 500;
};

enum class FitStatus { converged, unresolved, diverged };

const char* to_string(FitStatus s);

// Rates and frequencies in rad/s; the *_sigma fields are 1-sigma.
struct LineFit {
  FluxBias flux;
  double omega_a = 0.0;
  double gamma1 = 0.0;
  double gamma_phi = 0.0;
  double gamma = 0.0;
  double omega_a_sigma = 0.0;
  double gamma1_sigma = 0.0;
  double gamma_phi_sigma = 0.0;
  double gamma_sigma = 0.0;
  // Distance of the on-resonance response from the bare mirror, |r_p + 1| at
  // delta = 0, i.e. Gamma_1 / gamma.
  double depth = 0.0;
  double residual_rms = 0.0;
  bool resolved = false;
  FitStatus status = FitStatus::unresolved;
  int iterations = 0;
  std::string message;
};

// Damped least-squares fit of r_p = -1 + Gamma_1 / (gamma + i (w_a - w_p)) to
// both quadratures of the trace, over (w_a, log Gamma_1, log Gamma_phi).
// Throws InsufficientData below 16 points and FitDiverged when a resolvable
// line fails to converge. A line too weak to see comes back with
// resolved == false rather than as an exception.
LineFit fit_line(const SpectroscopyTrace& trace, const FitOptions& opts = {});

// fit_line on every trace, in input order. A trace that throws is kept with
// status diverged and the error text in `message`.
std::vector<LineFit> fit_flux_map(std::span<const SpectroscopyTrace> traces,
                                  const FitOptions& opts = {});

struct CouplingFit {
  double k = 0.0;          // s^-1 / sqrt(W)
  double k_sigma = 0.0;    // statistical, 1-sigma
  double zero_power_w = 0.0;  // recorded power where the fitted r_p crosses zero
  double residual_rms = 0.0;
};

// One-parameter fit of r_p(P) = -1 + Gamma_1^2 / (Gamma_1 gamma + k^2 P) with
// Gamma_1 and gamma held at the values from `line`.
CouplingFit calibrate_k_experimental(const PowerSweep& sweep, const LineFit& line);

struct CouplingEstimate {
  double k_e = 0.0;
  double k_s = 0.0;
  double k_m = 0.0;
  double k_sigma = 0.0;  // systematic
};

CouplingEstimate reconcile_k(double k_e, double k_s);

struct SpectralPoint {
  FluxBias flux;
  double omega_a = 0.0;
  double l_over_lambda = 0.0;
  double s_quanta = 0.0;
  double s_sigma = 0.0;
};

// s = Gamma_1 / (k_m^2 hbar w_a) for every resolved fit, with
// s_sigma / s = sqrt((sigma_Gamma1 / Gamma_1)^2 + (2 k_sigma / k_m)^2).
std::vector<SpectralPoint> extract_spectrum(std::span<const LineFit> fits,
                                            const CouplingEstimate& k,
                                            const LineGeometry& geom);

}  // namespace vacmirror
