#include "vacmirror/estimator.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "vacmirror/errors.hpp"
#include "vacmirror/parallel.hpp"

namespace vacmirror {

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::unresolved: return "unresolved";
    case FitStatus::diverged: return "diverged";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct InitialGuess {
  double omega_a;
  double gamma;
  double gamma1;
  double peak;  // max |r_p + 1|^2 after smoothing
};

// Closed-form start from the Lorentzian geometry of the line. |r_p + 1|^2 =
// Gamma_1^2 / (gamma^2 + delta^2) peaks at w_a with half width gamma whatever
// Gamma_phi is, so it is used instead of |r_p|, which is flat when
// Gamma_phi = 0.
InitialGuess initial_guess(std::span<const SpectroscopyPoint> pts) {
  const std::size_t n = pts.size();
  std::vector<double> resp(n);
  for (std::size_t i = 0; i < n; ++i) resp[i] = std::norm(pts[i].r_p + 1.0);
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(n - 1, i + 1);
    double sum = 0.0;
    for (std::size_t j = a; j <= b; ++j) sum += resp[j];
    smooth[i] = sum / static_cast<double>(b - a + 1);
  }
  const std::size_t imax =
      static_cast<std::size_t>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  const double peak = smooth[imax];
  const double half = 0.5 * peak;

  auto crossing = [&](std::size_t i, std::size_t j) {
    // linear interpolation of the half-peak point between samples i and j
    const double t = (smooth[i] - half) / (smooth[i] - smooth[j]);
    return pts[i].omega_p + t * (pts[j].omega_p - pts[i].omega_p);
  };
  double left = pts.front().omega_p;
  for (std::size_t i = imax; i > 0; --i) {
    if (smooth[i - 1] < half) {
      left = crossing(i, i - 1);
      break;
    }
  }
  double right = pts.back().omega_p;
  for (std::size_t i = imax; i + 1 < n; ++i) {
    if (smooth[i + 1] < half) {
      right = crossing(i, i + 1);
      break;
    }
  }
  const double spacing = (pts.back().omega_p - pts.front().omega_p) / static_cast<double>(n - 1);
  const double gamma = std::max(0.5 * (right - left), spacing);
  const double gamma1 = std::clamp(gamma * std::sqrt(peak), 1e-6 * gamma, 2.0 * gamma);
  return {pts[imax].omega_p, gamma, gamma1, peak};
}

// Residual vector and Jacobian for the line model in scaled coordinates:
// p = ((w_a - w0)/s, ln(Gamma_1/s), ln(Gamma_phi/s)).
struct LineProblem {
  std::span<const SpectroscopyPoint> pts;
  double omega0;
  double scale;

  void evaluate(const Eigen::Vector3d& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const double g1 = std::exp(p[1]);
    const double gp = std::exp(p[2]);
    const double g = 0.5 * g1 + gp;
    const complex i1(0.0, 1.0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double detuning = p[0] - (pts[k].omega_p - omega0) / scale;
      const complex denom(g, detuning);
      const complex model = -1.0 + g1 / denom;
      const complex diff = model - pts[k].r_p;
      r[2 * k] = diff.real();
      r[2 * k + 1] = diff.imag();
      if (jac) {
        const complex inv = 1.0 / denom;
        const complex inv2 = inv * inv;
        const complex d_u = -g1 * i1 * inv2;
        const complex d_a = g1 * (inv - 0.5 * g1 * inv2);
        const complex d_b = -g1 * gp * inv2;
        (*jac)(2 * k, 0) = d_u.real();
        (*jac)(2 * k + 1, 0) = d_u.imag();
        (*jac)(2 * k, 1) = d_a.real();
        (*jac)(2 * k + 1, 1) = d_a.imag();
        (*jac)(2 * k, 2) = d_b.real();
        (*jac)(2 * k + 1, 2) = d_b.imag();
      }
    }
  }
};

struct LmResult {
  Eigen::Vector3d p;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

LmResult levenberg_marquardt(const LineProblem& prob, Eigen::Vector3d p, int max_iterations) {
  const Eigen::Index m = static_cast<Eigen::Index>(2 * prob.pts.size());
  Eigen::VectorXd r(m), r_trial(m);
  Eigen::MatrixXd jac(m, 3);
  prob.evaluate(p, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  LmResult out;
  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (cost == 0.0 || grad.lpNorm<Eigen::Infinity>() == 0.0) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-30);
      const Eigen::Vector3d step = damped.ldlt().solve(-grad);
      const Eigen::Vector3d trial = p + step;
      prob.evaluate(trial, r_trial, nullptr);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double drop = cost - trial_cost;
        p = trial;
        cost = trial_cost;
        prob.evaluate(p, r, &jac);
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (drop <= 1e-15 * cost || step.lpNorm<Eigen::Infinity>() < 1e-12) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: we are at the numerical minimum.
    if (!accepted) out.converged = true;
    if (out.converged) break;
  }
  out.p = p;
  out.cost = cost;
  return out;
}

}  // namespace

LineFit fit_line(const SpectroscopyTrace& trace, const FitOptions& opts) {
  const auto& pts = trace.points;
  if (pts.size() < 16) {
    throw InsufficientData(fmt::format(
        "InsufficientData: line fit needs at least 16 points, trace at Phi/Phi0 = {} has {}",
        trace.flux.phi_over_phi0, pts.size()));
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].omega_p > pts[i - 1].omega_p)) {
      throw InsufficientData("probe frequencies must be strictly increasing");
    }
  }

  LineFit fit;
  fit.flux = trace.flux;
  const InitialGuess guess = initial_guess(pts);
  if (!(guess.peak > 0.0)) {
    // Data sit exactly on the bare mirror: no line at all.
    fit.omega_a = guess.omega_a;
    fit.gamma = fit.gamma_phi = guess.gamma;
    fit.omega_a_sigma = fit.gamma1_sigma = fit.gamma_phi_sigma = fit.gamma_sigma = kNaN;
    fit.status = FitStatus::unresolved;
    fit.message = "no response above the bare-mirror reflection";
    return fit;
  }

  const double scale = guess.gamma;
  const LineProblem prob{pts, guess.omega_a, scale};
  const double gamma_phi0 = std::max(guess.gamma - 0.5 * guess.gamma1, 1e-3 * guess.gamma);
  Eigen::Vector3d p0(0.0, std::log(guess.gamma1 / scale), std::log(gamma_phi0 / scale));
  const LmResult lm = levenberg_marquardt(prob, p0, opts.max_iterations);

  const std::size_t n = pts.size();
  const double g1 = scale * std::exp(lm.p[1]);
  const double gp = scale * std::exp(lm.p[2]);
  fit.omega_a = guess.omega_a + scale * lm.p[0];
  fit.gamma1 = g1;
  fit.gamma_phi = gp;
  fit.gamma = 0.5 * g1 + gp;
  fit.depth = g1 / fit.gamma;
  fit.residual_rms = std::sqrt(lm.cost / static_cast<double>(2 * n));
  fit.iterations = lm.iterations;

  const bool deep_enough = fit.depth > opts.resolvability_factor * fit.residual_rms;
  // A single noisy sample can be matched by a line far narrower than the
  // probe grid. Such a line is not resolved no matter how deep it looks.
  const double spacing = (pts.back().omega_p - pts.front().omega_p) / static_cast<double>(n - 1);
  const bool sampled = fit.gamma >= spacing;
  if (!lm.converged || !std::isfinite(lm.cost) || !lm.p.allFinite()) {
    if (!deep_enough || !sampled) {
      fit.status = FitStatus::unresolved;
      fit.message = deep_enough ? "fit did not settle on a line wider than the probe spacing"
                                : "fit did not settle and the line is below the noise floor";
      fit.omega_a_sigma = fit.gamma1_sigma = fit.gamma_phi_sigma = fit.gamma_sigma = kNaN;
      return fit;
    }
    throw FitDiverged(fmt::format(
        "FitDiverged: line fit at Phi/Phi0 = {} did not converge in {} iterations",
        trace.flux.phi_over_phi0, opts.max_iterations));
  }

  // Covariance from the residual-scaled inverse normal matrix.
  Eigen::VectorXd r(2 * n);
  Eigen::MatrixXd jac(2 * n, 3);
  prob.evaluate(lm.p, r, &jac);
  const double s2 = lm.cost / static_cast<double>(2 * n - 3);
  const Eigen::Matrix3d normal = jac.transpose() * jac;
  const Eigen::Matrix3d cov =
      s2 * normal.completeOrthogonalDecomposition().pseudoInverse();
  fit.omega_a_sigma = scale * std::sqrt(std::max(cov(0, 0), 0.0));
  fit.gamma1_sigma = g1 * std::sqrt(std::max(cov(1, 1), 0.0));
  fit.gamma_phi_sigma = gp * std::sqrt(std::max(cov(2, 2), 0.0));
  const double var_gamma =
      0.25 * g1 * g1 * cov(1, 1) + gp * gp * cov(2, 2) + g1 * gp * cov(1, 2);
  fit.gamma_sigma = std::sqrt(std::max(var_gamma, 0.0));

  fit.resolved = deep_enough && sampled;
  fit.status = fit.resolved ? FitStatus::converged : FitStatus::unresolved;
  if (!deep_enough) {
    fit.message = "line depth below the resolvability threshold";
  } else if (!sampled) {
    fit.message = "fitted linewidth narrower than the probe spacing";
  }
  return fit;
}

std::vector<LineFit> fit_flux_map(std::span<const SpectroscopyTrace> traces,
                                  const FitOptions& opts) {
  std::vector<LineFit> fits(traces.size());
  detail::parallel_for(traces.size(), [&](std::size_t i) {
    try {
      fits[i] = fit_line(traces[i], opts);
    } catch (const Error& e) {
      LineFit failed;
      failed.flux = traces[i].flux;
      failed.omega_a = failed.gamma1 = failed.gamma_phi = failed.gamma = kNaN;
      failed.omega_a_sigma = failed.gamma1_sigma = failed.gamma_phi_sigma =
          failed.gamma_sigma = kNaN;
      failed.depth = failed.residual_rms = kNaN;
      failed.status = FitStatus::diverged;
      failed.message = e.what();
      fits[i] = std::move(failed);
    }
  });
  return fits;
}

CouplingFit calibrate_k_experimental(const PowerSweep& sweep, const LineFit& line) {
  if (!line.resolved) {
    throw InvalidParameter("coupling calibration needs a resolved line fit at the sweep flux");
  }
  const double g1 = line.gamma1;
  const double gamma = line.gamma;
  if (!(g1 > gamma)) {
    throw RequiresGamma1GreaterThanGamma(fmt::format(
        "RequiresGamma1GreaterThanGamma: resonant r_p has no zero unless Gamma1 > gamma "
        "(Gamma1 = {:.6g} Hz, gamma = {:.6g} Hz)",
        g1 / constants::two_pi, gamma / constants::two_pi));
  }
  const auto& pts = sweep.points;
  const std::size_t n = pts.size();
  if (n < 8) throw InsufficientData("power sweep needs at least 8 points");

  // Zero crossing of Re r_p on a 5-point running mean, from positive at low
  // power to negative at high power.
  auto mean_re = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += pts[i].r_p.real();
    return s / static_cast<double>(b - a);
  };
  const std::size_t w = 5;
  if (!(mean_re(0, w) > 0.0) || !(mean_re(n - w, n) < 0.0)) {
    throw NoZeroCrossing(
        "NoZeroCrossing: Re r_p does not go from positive to negative across the sweep");
  }
  std::size_t cross = 0;
  for (std::size_t i = 0; i + w <= n; ++i) {
    if (mean_re(i, i + w) < 0.0) {
      cross = i + w / 2;
      break;
    }
  }
  const double p_cross = std::max(pts[cross].power_w, pts[std::min(cross + 1, n - 1)].power_w);
  if (!(p_cross > 0.0)) throw NoZeroCrossing("NoZeroCrossing: crossing at zero power");

  const double zero_num = g1 * g1 - g1 * gamma;  // k^2 P at the zero
  double u = 0.5 * std::log(zero_num / p_cross);  // u = ln k

  auto residuals = [&](double uu, std::vector<double>* jac) {
    const double k2 = std::exp(2.0 * uu);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = g1 * gamma + k2 * pts[i].power_w;
      const double model = -1.0 + g1 * g1 / denom;
      const double re = model - pts[i].r_p.real();
      const double im = pts[i].r_p.imag();
      ss += re * re + im * im;
      if (jac) (*jac)[i] = -2.0 * g1 * g1 * k2 * pts[i].power_w / (denom * denom);
    }
    return ss;
  };

  std::vector<double> jac(n);
  double cost = residuals(u, &jac);
  double lambda = 1e-3;
  bool done = false;
  for (int it = 0; it < 200 && !done; ++it) {
    double jtj = 0.0;
    double jtr = 0.0;
    const double k2 = std::exp(2.0 * u);
    for (std::size_t i = 0; i < n; ++i) {
      const double model = -1.0 + g1 * g1 / (g1 * gamma + k2 * pts[i].power_w);
      jtj += jac[i] * jac[i];
      jtr += jac[i] * (model - pts[i].r_p.real());
    }
    if (jtj == 0.0 || jtr == 0.0) break;
    bool accepted = false;
    double step = 0.0;
    while (lambda < 1e16) {
      step = -jtr / (jtj * (1.0 + lambda));
      const double trial_cost = residuals(u + step, nullptr);
      if (trial_cost < cost) {
        accepted = true;
        const double drop = cost - trial_cost;
        u += step;
        cost = residuals(u, &jac);
        lambda = std::max(lambda * 0.3, 1e-12);
        done = drop <= 1e-15 * cost || std::abs(step) < 1e-14;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }

  double jtj = 0.0;
  for (double j : jac) jtj += j * j;
  const double s2 = cost / static_cast<double>(2 * n - 1);
  CouplingFit out;
  out.k = std::exp(u);
  out.k_sigma = jtj > 0.0 ? out.k * std::sqrt(s2 / jtj) : kNaN;
  out.zero_power_w = zero_num / (out.k * out.k);
  out.residual_rms = std::sqrt(cost / static_cast<double>(2 * n));
  return out;
}

CouplingEstimate reconcile_k(double k_e, double k_s) {
  if (!(k_e > 0.0) || !(k_s > 0.0)) {
    throw InvalidParameter(fmt::format("couplings must be positive (k_e={}, k_s={})", k_e, k_s));
  }
  return {k_e, k_s, 0.5 * (k_e + k_s), 0.5 * std::abs(k_s - k_e)};
}

std::vector<SpectralPoint> extract_spectrum(std::span<const LineFit> fits,
                                            const CouplingEstimate& k,
                                            const LineGeometry& geom) {
  if (!(k.k_m > 0.0)) throw InvalidParameter("extract_spectrum needs k_m > 0");
  const double coupling_rel = 2.0 * k.k_sigma / k.k_m;
  std::vector<SpectralPoint> out;
  for (const LineFit& f : fits) {
    if (!f.resolved) continue;
    SpectralPoint sp;
    sp.flux = f.flux;
    sp.omega_a = f.omega_a;
    sp.l_over_lambda = l_over_lambda(geom, f.omega_a);
    sp.s_quanta = f.gamma1 / (k.k_m * k.k_m * constants::hbar * f.omega_a);
    const double fit_rel = f.gamma1 > 0.0 ? f.gamma1_sigma / f.gamma1 : 0.0;
    sp.s_sigma = sp.s_quanta * std::hypot(fit_rel, coupling_rel);
    out.push_back(sp);
  }
  return out;
}

}  // namespace vacmirror
