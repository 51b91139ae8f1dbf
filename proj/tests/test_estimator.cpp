#include <doctest.h>

#include <cmath>
#include <limits>

#include "vacmirror/errors.hpp"
#include "vacmirror/estimator.hpp"
#include "vacmirror/random.hpp"

using namespace vacmirror;
using doctest::Approx;
using constants::two_pi;

namespace {

constexpr double kMHz = two_pi * 1e6;
constexpr double kCentre = two_pi * 5.2e9;

// A hand-built trace, independent of the synthlab band and grid checks.
SpectroscopyTrace make_trace(double omega_a, double g1, double gphi, double sigma,
                             std::uint64_t seed, double half_width_gammas = 15.0,
                             std::size_t n = 301) {
  const RateSet r(g1, gphi);
  const double half = half_width_gammas * r.gamma();
  SpectroscopyTrace t;
  t.flux = {0.2};
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega_a - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
    complex rp = reflection_weak(r, omega_a - w);
    if (sigma > 0.0) {
      const auto [a, b] = gaussian_pair(seed, 9, i);
      rp += sigma * complex(a, b);
    }
    t.points.push_back({w, rp});
  }
  return t;
}

double cost(const SpectroscopyTrace& t, double omega_a, double g1, double gphi) {
  const RateSet r(g1, gphi);
  double c = 0.0;
  for (const auto& p : t.points) c += std::norm(reflection_weak(r, omega_a - p.omega_p) - p.r_p);
  return c;
}

}  // namespace

TEST_CASE("noiseless line fit recovers the truth") {
  for (double g1 : {0.2, 1.0, 5.0, 20.0}) {
    for (double gphi : {0.0, 0.5, 3.0}) {
      const auto t = make_trace(kCentre, g1 * kMHz, gphi * kMHz, 0.0, 0);
      const LineFit f = fit_line(t);
      CAPTURE(g1);
      CAPTURE(gphi);
      CHECK(f.resolved);
      CHECK(f.status == FitStatus::converged);
      CHECK(std::abs(f.omega_a - kCentre) < 1e-6 * g1 * kMHz);
      CHECK(f.gamma1 == Approx(g1 * kMHz).epsilon(1e-6));
      CHECK(f.gamma == Approx((0.5 * g1 + gphi) * kMHz).epsilon(1e-6));
      if (gphi > 0.0) CHECK(f.gamma_phi == Approx(gphi * kMHz).epsilon(1e-5));
    }
  }
}

TEST_CASE("fit beats a brute-force grid search") {
  const double g1 = 4.0 * kMHz, gphi = 1.0 * kMHz;
  const auto t = make_trace(kCentre, g1, gphi, 0.02, 17);
  const LineFit f = fit_line(t);
  REQUIRE(f.resolved);
  const double fit_cost = cost(t, f.omega_a, f.gamma1, f.gamma_phi);

  // 60^3 grid spanning +-5 sigma of each parameter around the truth.
  const int n = 60;
  double best = std::numeric_limits<double>::infinity();
  double best_w = 0, best_g1 = 0, best_gp = 0;
  for (int i = 0; i < n; ++i) {
    const double w = kCentre + (-5.0 + 10.0 * i / (n - 1)) * f.omega_a_sigma;
    for (int j = 0; j < n; ++j) {
      const double a = g1 + (-5.0 + 10.0 * j / (n - 1)) * f.gamma1_sigma;
      for (int k = 0; k < n; ++k) {
        const double b = gphi + (-5.0 + 10.0 * k / (n - 1)) * f.gamma_phi_sigma;
        if (a <= 0.0 || b < 0.0) continue;
        const double c = cost(t, w, a, b);
        if (c < best) {
          best = c;
          best_w = w;
          best_g1 = a;
          best_gp = b;
        }
      }
    }
  }
  CHECK(fit_cost <= best * (1.0 + 1e-12));
  // and the grid minimum is within one grid cell of the fit
  CHECK(std::abs(best_w - f.omega_a) <= 10.0 / (n - 1) * f.omega_a_sigma * 1.01 + 1.0);
  CHECK(std::abs(best_g1 - f.gamma1) <= 10.0 / (n - 1) * f.gamma1_sigma * 1.01);
  CHECK(std::abs(best_gp - f.gamma_phi) <= 10.0 / (n - 1) * f.gamma_phi_sigma * 1.01);
}

TEST_CASE("reported sigmas cover the truth") {
  const double g1 = 3.0 * kMHz, gphi = 1.0 * kMHz;
  int cover_w = 0, cover_g1 = 0, cover_gp = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const LineFit f = fit_line(make_trace(kCentre, g1, gphi, 0.02, 1000 + s));
    cover_w += std::abs(f.omega_a - kCentre) <= 2.0 * f.omega_a_sigma;
    cover_g1 += std::abs(f.gamma1 - g1) <= 2.0 * f.gamma1_sigma;
    cover_gp += std::abs(f.gamma_phi - gphi) <= 2.0 * f.gamma_phi_sigma;
  }
  // 95.4% expected; 90 of 100 leaves about 2.5 binomial sigmas of slack
  CHECK(cover_w >= 90);
  CHECK(cover_g1 >= 90);
  CHECK(cover_gp >= 90);
}

TEST_CASE("fit is equivariant under a frequency rescaling") {
  const auto t = make_trace(kCentre, 3.0 * kMHz, 1.0 * kMHz, 0.02, 5);
  const LineFit f = fit_line(t);
  const double c = 3.5;
  SpectroscopyTrace scaled = t;
  for (auto& p : scaled.points) p.omega_p *= c;
  const LineFit g = fit_line(scaled);
  CHECK(g.omega_a == Approx(c * f.omega_a).epsilon(1e-9));
  CHECK(g.gamma1 == Approx(c * f.gamma1).epsilon(1e-6));
  CHECK(g.gamma_phi == Approx(c * f.gamma_phi).epsilon(1e-6));
  CHECK(g.gamma1_sigma == Approx(c * f.gamma1_sigma).epsilon(1e-4));
  CHECK(g.residual_rms == Approx(f.residual_rms).epsilon(1e-9));
}

TEST_CASE("more noise gives larger error bars") {
  double prev = 0.0;
  for (double sigma : {0.005, 0.01, 0.02, 0.04}) {
    const LineFit f = fit_line(make_trace(kCentre, 3.0 * kMHz, 1.0 * kMHz, sigma, 8));
    CHECK(f.gamma1_sigma > prev);
    prev = f.gamma1_sigma;
  }
}

TEST_CASE("a trace with no line is unresolved, not an error") {
  const auto t = make_trace(kCentre, 1e-6 * kMHz, 1.0 * kMHz, 0.01, 12);
  LineFit f;
  CHECK_NOTHROW(f = fit_line(t));
  CHECK_FALSE(f.resolved);
  CHECK(f.status == FitStatus::unresolved);
  CHECK_FALSE(f.message.empty());

  // exactly the bare mirror
  SpectroscopyTrace flat = t;
  for (auto& p : flat.points) p.r_p = complex(-1.0, 0.0);
  CHECK_FALSE(fit_line(flat).resolved);
}

TEST_CASE("a line narrower than the probe spacing is not resolved") {
  // one noise spike on an otherwise flat trace
  SpectroscopyTrace t = make_trace(kCentre, 1e-9 * kMHz, 1.0 * kMHz, 0.0, 0);
  t.points[150].r_p += complex(0.2, 0.0);
  const LineFit f = fit_line(t);
  CHECK_FALSE(f.resolved);
}

TEST_CASE("line fit input checks") {
  const auto t = make_trace(kCentre, kMHz, kMHz, 0.0, 0, 15.0, 15);
  CHECK_THROWS_AS(fit_line(t), InsufficientData);
  auto bad = make_trace(kCentre, kMHz, kMHz, 0.0, 0);
  std::swap(bad.points[3], bad.points[4]);
  CHECK_THROWS_AS(fit_line(bad), InsufficientData);
}

TEST_CASE("fit_flux_map keeps order and records failures") {
  std::vector<SpectroscopyTrace> traces;
  for (int i = 0; i < 6; ++i) {
    traces.push_back(make_trace(kCentre + i * 50 * kMHz, (1.0 + i) * kMHz, kMHz, 0.01, i));
    traces.back().flux = {0.01 * i};
  }
  traces.push_back(make_trace(kCentre, kMHz, kMHz, 0.0, 0, 15.0, 10));
  const auto fits = fit_flux_map(traces);
  REQUIRE(fits.size() == 7);
  for (int i = 0; i < 6; ++i) {
    CHECK(fits[i].flux.phi_over_phi0 == 0.01 * i);
    CHECK(fits[i].gamma1 == Approx((1.0 + i) * kMHz).epsilon(0.1));
  }
  CHECK(fits[6].status == FitStatus::diverged);
  CHECK(fits[6].message.find("InsufficientData") != std::string::npos);
}

namespace {

PowerSweep make_sweep(const RateSet& r, double k, double sigma, std::uint64_t seed) {
  const double p0 = (r.gamma1() * r.gamma1() - r.gamma1() * r.gamma()) / (k * k);
  PowerSweep s;
  for (int i = 0; i < 121; ++i) {
    const double p = p0 * std::pow(10.0, -3.0 + 5.0 * i / 120.0);
    complex rp(reflection_power(r, k * std::sqrt(p)), 0.0);
    if (sigma > 0.0) {
      const auto [a, b] = gaussian_pair(seed, 4, static_cast<std::uint64_t>(i));
      rp += sigma * complex(a, b);
    }
    s.points.push_back({p, rp});
  }
  return s;
}

LineFit exact_line(const RateSet& r) {
  LineFit f;
  f.gamma1 = r.gamma1();
  f.gamma_phi = r.gamma_phi();
  f.gamma = r.gamma();
  f.gamma1_sigma = f.gamma_phi_sigma = f.gamma_sigma = 0.0;
  f.resolved = true;
  f.status = FitStatus::converged;
  return f;
}

}  // namespace

TEST_CASE("coupling calibration recovers k and the zero crossing") {
  const RateSet r(66.0 * kMHz, 1.0 * kMHz);
  const double k = 6.1e15;
  const CouplingFit c = calibrate_k_experimental(make_sweep(r, k, 0.0, 0), exact_line(r));
  CHECK(c.k == Approx(k).epsilon(1e-9));
  const double om0 = std::sqrt(r.gamma1() * r.gamma1() - r.gamma1() * r.gamma());
  CHECK(c.k * std::sqrt(c.zero_power_w) == Approx(om0).epsilon(1e-9));

  const CouplingFit noisy = calibrate_k_experimental(make_sweep(r, k, 0.01, 3), exact_line(r));
  CHECK(std::abs(noisy.k - k) < 4.0 * noisy.k_sigma);
  CHECK(noisy.residual_rms == Approx(0.01).epsilon(0.2));
}

TEST_CASE("coupling calibration preconditions") {
  const RateSet weak(1.0 * kMHz, 5.0 * kMHz);
  CHECK_THROWS_AS(calibrate_k_experimental(make_sweep(RateSet(66 * kMHz, kMHz), 6e15, 0, 0),
                                           exact_line(weak)),
                  RequiresGamma1GreaterThanGamma);
  // a sweep that never reaches the zero
  const RateSet r(66.0 * kMHz, 1.0 * kMHz);
  PowerSweep low = make_sweep(r, 6.1e15, 0.0, 0);
  low.points.resize(40);
  CHECK_THROWS_AS(calibrate_k_experimental(low, exact_line(r)), NoZeroCrossing);
  LineFit unresolved = exact_line(r);
  unresolved.resolved = false;
  CHECK_THROWS_AS(calibrate_k_experimental(make_sweep(r, 6.1e15, 0, 0), unresolved),
                  InvalidParameter);
}

TEST_CASE("reconciling experimental and circuit couplings") {
  const CouplingEstimate k = reconcile_k(6.1e15, 8.8e15);
  CHECK(k.k_m == 7.45e15);
  CHECK(k.k_sigma == 1.35e15);
  CHECK(k.k_e == 6.1e15);
  CHECK(k.k_s == 8.8e15);
  // symmetric in its arguments
  const CouplingEstimate swapped = reconcile_k(8.8e15, 6.1e15);
  CHECK(swapped.k_m == k.k_m);
  CHECK(swapped.k_sigma == k.k_sigma);
}

TEST_CASE("spectral extraction") {
  const auto geom = DeviceConfig::reference().geometry;
  const CouplingEstimate k = reconcile_k(7.0e15, 8.0e15);
  LineFit f = exact_line(RateSet(2.0 * kMHz, kMHz));
  f.omega_a = two_pi * 5.5e9;
  f.gamma1_sigma = 0.1 * kMHz;
  LineFit hidden = f;
  hidden.resolved = false;
  const std::vector<LineFit> fits{f, hidden};
  const auto pts = extract_spectrum(fits, k, geom);
  REQUIRE(pts.size() == 1);
  const double s = f.gamma1 / (k.k_m * k.k_m * constants::hbar * f.omega_a);
  CHECK(pts[0].s_quanta == Approx(s).epsilon(1e-14));
  CHECK(pts[0].l_over_lambda == Approx(l_over_lambda(geom, f.omega_a)).epsilon(1e-15));
  const double rel = std::hypot(0.05, 2.0 * k.k_sigma / k.k_m);
  CHECK(pts[0].s_sigma == Approx(s * rel).epsilon(1e-12));
}
