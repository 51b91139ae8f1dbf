#include "vacmirror/scattering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "vacmirror/device_model.hpp"
#include "vacmirror/errors.hpp"

namespace vacmirror {

RateSet::RateSet(double gamma1, double gamma_phi)
    : gamma1_(gamma1), gamma_phi_(gamma_phi), gamma_(0.5 * gamma1 + gamma_phi) {
  if (!(gamma1 >= 0.0) || !(gamma_phi >= 0.0) || !std::isfinite(gamma_)) {
    throw InvalidParameter(fmt::format(
        "rates must be finite and non-negative (Gamma1={}, Gamma_phi={})", gamma1,
        gamma_phi));
  }
}

AtomState bloch_steady_state(const RateSet& r, const DriveSettings& d) {
  if (d.rabi < 0.0) throw InvalidParameter("Rabi frequency must be non-negative");
  if (d.rabi == 0.0) return AtomState::ground();
  const double gamma = r.gamma();
  if (gamma == 0.0) {
    throw DegenerateRates("DegenerateRates: gamma == 0 with a nonzero drive has no stationary point");
  }
  // <sigma_-> = Omega <sigma_z> / 2(gamma + i delta); substituting into the
  // population equation gives <sigma_z> in closed form.
  const double lorentz = gamma * gamma + d.detuning * d.detuning;
  const double g1 = r.gamma1();
  const double omega2 = d.rabi * d.rabi;
  const double sz = -g1 * lorentz / (g1 * lorentz + omega2 * gamma);
  const complex sm = d.rabi * sz / (2.0 * complex(gamma, d.detuning));
  return {sm, sz};
}

BlochVector bloch_rhs(const RateSet& r, const DriveSettings& d, const BlochVector& y) {
  const complex i(0.0, 1.0);
  const double half_rabi = 0.5 * d.rabi;
  BlochVector dy;
  dy.sigma_plus = (i * d.detuning - r.gamma()) * y.sigma_plus + half_rabi * y.sigma_z;
  dy.sigma_minus = (-i * d.detuning - r.gamma()) * y.sigma_minus + half_rabi * y.sigma_z;
  dy.sigma_z = -r.gamma1() * (1.0 + y.sigma_z) - d.rabi * (y.sigma_plus + y.sigma_minus);
  return dy;
}

namespace {

BlochVector axpy(const BlochVector& y, double h, const BlochVector& k) {
  return {y.sigma_plus + h * k.sigma_plus, y.sigma_minus + h * k.sigma_minus,
          y.sigma_z + h * k.sigma_z};
}

BlochVector rk4_step(const RateSet& r, const DriveSettings& d, const BlochVector& y,
                     double h) {
  const BlochVector k1 = bloch_rhs(r, d, y);
  const BlochVector k2 = bloch_rhs(r, d, axpy(y, 0.5 * h, k1));
  const BlochVector k3 = bloch_rhs(r, d, axpy(y, 0.5 * h, k2));
  const BlochVector k4 = bloch_rhs(r, d, axpy(y, h, k3));
  const double w = h / 6.0;
  return {y.sigma_plus + w * (k1.sigma_plus + 2.0 * k2.sigma_plus + 2.0 * k3.sigma_plus + k4.sigma_plus),
          y.sigma_minus + w * (k1.sigma_minus + 2.0 * k2.sigma_minus + 2.0 * k3.sigma_minus + k4.sigma_minus),
          y.sigma_z + w * (k1.sigma_z + 2.0 * k2.sigma_z + 2.0 * k3.sigma_z + k4.sigma_z)};
}

double fastest_rate(const RateSet& r, const DriveSettings& d) {
  return std::max({r.gamma(), d.rabi, std::abs(d.detuning), r.gamma1()});
}

double max_abs(const BlochVector& v) {
  return std::max({std::abs(v.sigma_plus), std::abs(v.sigma_minus), std::abs(v.sigma_z)});
}

void check_initial(const AtomState& s) {
  if (!(s.sigma_z >= -1.0 && s.sigma_z <= 1.0) || !(s.bloch_norm_sq() <= 1.0 + 1e-12)) {
    throw InvalidParameter(fmt::format(
        "initial state outside the Bloch ball (sigma_z={}, |sigma_-|={})", s.sigma_z,
        std::abs(s.sigma_minus)));
  }
}

}  // namespace

Trajectory integrate_bloch(const RateSet& r, const DriveSettings& d,
                           const AtomState& initial, double duration,
                           const IntegratorOptions& opts) {
  if (!(duration > 0.0)) {
    throw InvalidParameter(fmt::format("duration must be positive, got {}", duration));
  }
  if (d.rabi < 0.0) throw InvalidParameter("Rabi frequency must be non-negative");
  check_initial(initial);

  const double scale = fastest_rate(r, d);
  double h_max = scale > 0.0 ? 0.01 / scale : duration;
  if (opts.max_step) h_max = std::min(h_max, *opts.max_step);
  if (!(h_max >= 1e-18)) {
    throw StepUnderflow(fmt::format("StepUnderflow: required step {:.3g} s is below 1e-18 s", h_max));
  }
  const auto steps = static_cast<std::size_t>(std::ceil(duration / h_max));
  const double h = duration / static_cast<double>(steps);
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);

  Trajectory traj;
  traj.step = h;
  traj.points.reserve(steps / every + 2);
  BlochVector y = BlochVector::from(initial);
  traj.points.push_back({0.0, y});
  for (std::size_t n = 1; n <= steps; ++n) {
    y = rk4_step(r, d, y, h);
    if (n % every == 0 || n == steps) {
      traj.points.push_back({h * static_cast<double>(n), y});
    }
  }
  return traj;
}

RelaxationResult relax_to_steady_state(const RateSet& r, const DriveSettings& d,
                                       const AtomState& initial) {
  check_initial(initial);
  BlochVector y = BlochVector::from(initial);
  const double slowest = std::max(r.gamma(), r.gamma1());
  if (slowest == 0.0) {
    // No damping at all: only a state that is already stationary counts.
    return {initial, 0.0, max_abs(bloch_rhs(r, d, y)) == 0.0};
  }
  const double tol = 1e-12 * slowest;
  const double cap = 1e4 / r.gamma();
  const double h = 0.01 / fastest_rate(r, d);
  double t = 0.0;
  while (t < cap) {
    if (max_abs(bloch_rhs(r, d, y)) < tol) return {y.state(), t, true};
    y = rk4_step(r, d, y, h);
    t += h;
  }
  return {y.state(), t, max_abs(bloch_rhs(r, d, y)) < tol};
}

namespace {

complex global_phase(double l_over_lambda) {
  const double turns = 4.0 * l_over_lambda;  // exp(i 4 pi L/lambda)
  return {cos_pi(turns), cos_pi(turns - 0.5)};
}

}  // namespace

complex reflection_full(const RateSet& r, const DriveSettings& d,
                        const AtomState& state, double l_over_lambda,
                        bool include_global_phase) {
  if (d.rabi < 0.0) throw InvalidParameter("Rabi frequency must be non-negative");
  complex rp = d.rabi == 0.0
                   ? reflection_weak(r, d.detuning)
                   : -(1.0 + 2.0 * r.gamma1() * state.sigma_minus / d.rabi);
  if (include_global_phase) rp *= global_phase(l_over_lambda);
  return rp;
}

complex reflection_weak(const RateSet& r, double detuning) {
  if (!(r.gamma() > 0.0)) {
    throw DegenerateRates("DegenerateRates: weak-probe reflection needs gamma > 0");
  }
  return -1.0 + r.gamma1() / complex(r.gamma(), detuning);
}

double reflection_power(const RateSet& r, double rabi) {
  if (!(r.gamma() > 0.0)) {
    throw DegenerateRates("DegenerateRates: resonant reflection needs gamma > 0");
  }
  const double g1 = r.gamma1();
  return -1.0 + g1 * g1 / (g1 * r.gamma() + rabi * rabi);
}

}  // namespace vacmirror
