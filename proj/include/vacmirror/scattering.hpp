#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

// Driven two-level atom in front of a mirror: Bloch equations in the frame
// rotating at the probe frequency, their stationary solution, and the
// coherent reflection coefficient r_p built from it.
namespace vacmirror {

using complex = std::complex<double>;

struct AtomState {
  complex sigma_minus{0.0, 0.0};
  double sigma_z = -1.0;

  static AtomState ground() { return {}; }

  // 4 |<sigma_->|^2 + <sigma_z>^2, at most 1 for a physical state.
  double bloch_norm_sq() const {
    return 4.0 * std::norm(sigma_minus) + sigma_z * sigma_z;
  }
};

// Probe settings. detuning is w_a - w_p, in rad/s like everything else.
struct DriveSettings {
  double omega_p = 0.0;
  double rabi = 0.0;
  double detuning = 0.0;

  static DriveSettings probe(double omega_a, double omega_p, double rabi) {
    return {omega_p, rabi, omega_a - omega_p};
  }
};

// Gamma_1, Gamma_phi and the decoherence rate gamma = Gamma_1/2 + Gamma_phi.
class RateSet {
 public:
  RateSet(double gamma1, double gamma_phi);

  double gamma1() const { return gamma1_; }
  double gamma_phi() const { return gamma_phi_; }
  double gamma() const { return gamma_; }

 private:
  double gamma1_;
  double gamma_phi_;
  double gamma_;
};

// Exact stationary point of the Bloch equations. Throws DegenerateRates when
// gamma == 0 and the drive is on.
AtomState bloch_steady_state(const RateSet& r, const DriveSettings& d);

// (<sigma_+>, <sigma_->, <sigma_z>) integrated as three independent complex
// components, exactly as the equations of motion are written.
struct BlochVector {
  complex sigma_plus{0.0, 0.0};
  complex sigma_minus{0.0, 0.0};
  complex sigma_z{-1.0, 0.0};

  static BlochVector from(const AtomState& s) {
    return {std::conj(s.sigma_minus), s.sigma_minus, complex(s.sigma_z, 0.0)};
  }
  AtomState state() const { return {sigma_minus, sigma_z.real()}; }
};

// Right-hand side of the Bloch equations.
BlochVector bloch_rhs(const RateSet& r, const DriveSettings& d, const BlochVector& y);

struct TrajectoryPoint {
  double t = 0.0;
  BlochVector y;
};

struct IntegratorOptions {
  // Upper bound on the step. The default is 0.01 / max(gamma, Omega_p,
  // |delta|, Gamma_1); a smaller value here wins.
  std::optional<double> max_step;
  // Keep every n-th step in the trajectory (the endpoint is always kept).
  std::size_t record_every = 1;
};

struct Trajectory {
  double step = 0.0;
  std::vector<TrajectoryPoint> points;

  const TrajectoryPoint& back() const { return points.back(); }
  AtomState final_state() const { return points.back().y.state(); }
};

// Fixed-step classical RK4 on the three Bloch components. Throws
// StepUnderflow if the step needed is below 1e-18 s and InvalidParameter on a
// non-positive duration or an unphysical initial state.
Trajectory integrate_bloch(const RateSet& r, const DriveSettings& d,
                           const AtomState& initial, double duration,
                           const IntegratorOptions& opts = {});

struct RelaxationResult {
  AtomState state;
  double elapsed = 0.0;
  bool converged = false;
};

// Integrates from `initial` until every derivative component is below
// 1e-12 * max(gamma, Gamma_1), or until 1e4 / gamma has elapsed.
RelaxationResult relax_to_steady_state(const RateSet& r, const DriveSettings& d,
                                       const AtomState& initial = AtomState::ground());

// r_p = -[1 + 2 Gamma_1 <sigma_-> / Omega_p], times exp(i 4 pi L/lambda) when
// include_global_phase is set. For Omega_p == 0 falls back to reflection_weak.
complex reflection_full(const RateSet& r, const DriveSettings& d,
                        const AtomState& state, double l_over_lambda,
                        bool include_global_phase = false);

// Weak-probe limit, r_p = -1 + Gamma_1 / (gamma + i delta).
complex reflection_weak(const RateSet& r, double detuning);

// Resonant drive, r_p = -1 + Gamma_1^2 / (Gamma_1 gamma + Omega_p^2).
double reflection_power(const RateSet& r, double rabi);

}  // namespace vacmirror
