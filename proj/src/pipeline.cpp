#include "vacmirror/pipeline.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include "vacmirror/errors.hpp"
#include "vacmirror/io.hpp"

namespace vacmirror::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = constants::two_pi;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError(fmt::format("cannot create output directory '{}': {}", dir.string(),
                                ec ? ec.message() : "not a directory"));
  }
}

// Every emitted file is read back through its own parser before we move on.
void emit_traces(const fs::path& p, std::span<const SpectroscopyTrace> traces) {
  std::ostringstream ss;
  io::write_traces_csv(ss, traces);
  io::write_text(p, ss.str());
  std::istringstream back(io::read_text(p));
  const auto parsed = io::read_traces_csv(back, p.filename().string());
  if (parsed.size() != traces.size()) {
    throw DataError(fmt::format("{}: read back {} traces, wrote {}", p.string(), parsed.size(),
                                traces.size()));
  }
}

void emit_sweep(const fs::path& p, const PowerSweep& sweep) {
  std::ostringstream ss;
  io::write_sweep_csv(ss, sweep);
  io::write_text(p, ss.str());
  std::istringstream back(io::read_text(p));
  if (io::read_sweep_csv(back, p.filename().string(), sweep.flux).points.size() !=
      sweep.points.size()) {
    throw DataError(fmt::format("{}: row count changed on read-back", p.string()));
  }
}

void emit_table(const fs::path& p, const io::Table& t) {
  std::ostringstream ss;
  io::write_table_csv(ss, t);
  io::write_text(p, ss.str());
  std::istringstream back(io::read_text(p));
  if (io::read_table_csv(back, p.filename().string(), t.columns).rows.size() != t.rows.size()) {
    throw DataError(fmt::format("{}: row count changed on read-back", p.string()));
  }
}

void emit_json(const fs::path& p, const json& j) {
  io::write_json(p, j);
  // NaN is written as null, so compare the serialized forms.
  if (io::read_json(p).dump() != j.dump()) {
    throw DataError(fmt::format("{}: content changed on read-back", p.string()));
  }
}

std::vector<SpectroscopyTrace> load_traces(const fs::path& p) {
  std::istringstream in(io::read_text(p));
  return io::read_traces_csv(in, p.filename().string());
}

SpectroscopyTrace load_single_trace(const fs::path& p) {
  auto traces = load_traces(p);
  if (traces.size() != 1) {
    throw DataError(fmt::format("{}: expected one trace, found {}", p.string(), traces.size()));
  }
  return std::move(traces.front());
}

std::string artifact(const json& artifacts, const char* key) {
  if (!artifacts.contains(key) || !artifacts.at(key).is_string()) {
    throw DataError(fmt::format("manifest: artifacts.{} missing", key));
  }
  return artifacts.at(key).get<std::string>();
}

double theory_quanta(double l_over_lambda) {
  return 1.0 + cos_pi(roundtrip_phase_at(l_over_lambda).over_pi);
}

}  // namespace

json RunManifest::to_json() const {
  return {{"command", command},         {"seed", seed},
          {"config_digest", config_digest}, {"tool_version", tool_version},
          {"created_utc", created_utc}, {"artifacts", artifacts}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.created_utc = j.at("created_utc").get<std::string>();
    m.artifacts = j.at("artifacts");
    return m;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest: {}", e.what()));
  }
}

std::string config_digest(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex = "sha256:";
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out, std::uint64_t seed) {
  cfg.device.validate();
  cfg.simulation.validate();
  const SimulationSettings& sim = cfg.simulation;
  const DeviceConfig& dev = cfg.device;

  // Resolve everything that can fail on bad configuration before touching
  // the filesystem.
  const auto fluxes = flux_grid_for_band(dev, sim.band_lo_hz, sim.band_hi_hz, sim.flux_points);
  const FluxBias sweep_flux{sim.sweep_flux_phi0};
  const auto powers = default_power_grid(dev, sim, sweep_flux);

  const auto map = synth_flux_map(dev, sim, fluxes, sim.window, sim.noise_sigma, seed);
  std::vector<SpectroscopyTrace> lines;
  for (std::size_t i = 0; i < sim.line_fluxes_phi0.size(); ++i) {
    const FluxBias f{sim.line_fluxes_phi0[i]};
    const auto grid = probe_grid(atom_truth(dev, sim, f), sim.window);
    lines.push_back(synth_line(dev, sim, f, grid, sim.noise_sigma, seed, streams::lines + i));
  }
  const auto cal_grid = probe_grid(atom_truth(dev, sim, sweep_flux), sim.window);
  const auto calibration = synth_line(dev, sim, sweep_flux, cal_grid, sim.noise_sigma, seed,
                                      streams::lines + (std::uint64_t{1} << 20));
  const auto sweep = synth_power_sweep(dev, sim, sweep_flux, powers, sim.noise_sigma, seed);

  ensure_dir(out);
  emit_json(out / "config.json", to_json(cfg));
  emit_traces(out / "flux_map.csv", map);
  json line_files = json::array();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string name = fmt::format("line_{}.csv", i);
    emit_traces(out / name, std::span(&lines[i], 1));
    line_files.push_back(name);
  }
  emit_traces(out / "line_calibration.csv", std::span(&calibration, 1));
  emit_sweep(out / "power_sweep.csv", sweep);

  RunManifest m;
  m.command = "simulate";
  m.seed = seed;
  m.config_digest = config_digest(cfg);
  m.created_utc = utc_now();
  m.artifacts = {{"config", "config.json"},
                 {"flux_map", "flux_map.csv"},
                 {"lines", line_files},
                 {"calibration_line", "line_calibration.csv"},
                 {"power_sweep", "power_sweep.csv"},
                 {"sweep_flux_phi0", sim.sweep_flux_phi0}};
  emit_json(out / "manifest.json", m.to_json());
}

void cmd_fit(const fs::path& data_dir, const fs::path& out, const FitOptions& opts) {
  const RunManifest data = RunManifest::from_json(io::read_json(data_dir / "manifest.json"));
  if (data.command != "simulate") {
    throw DataError(fmt::format("{}: not a simulate output (command '{}')",
                                (data_dir / "manifest.json").string(), data.command));
  }
  RunConfig cfg;
  try {
    cfg = run_config_from_json(io::read_json(data_dir / artifact(data.artifacts, "config")));
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  const DeviceConfig& dev = cfg.device;

  const auto map = load_traces(data_dir / artifact(data.artifacts, "flux_map"));
  std::vector<SpectroscopyTrace> lines;
  if (data.artifacts.contains("lines")) {
    for (const json& name : data.artifacts.at("lines")) {
      lines.push_back(load_single_trace(data_dir / name.get<std::string>()));
    }
  }
  const SpectroscopyTrace cal_trace =
      load_single_trace(data_dir / artifact(data.artifacts, "calibration_line"));
  const FluxBias sweep_flux{data.artifacts.value("sweep_flux_phi0", cal_trace.flux.phi_over_phi0)};
  PowerSweep sweep;
  {
    const fs::path p = data_dir / artifact(data.artifacts, "power_sweep");
    std::istringstream in(io::read_text(p));
    sweep = io::read_sweep_csv(in, p.filename().string(), sweep_flux);
  }

  const auto map_fits = fit_flux_map(map, opts);
  const auto line_fits = fit_flux_map(lines, opts);
  const LineFit cal_fit = fit_line(cal_trace, opts);

  CouplingFit k_fit;
  try {
    k_fit = calibrate_k_experimental(sweep, cal_fit);
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(fmt::format("coupling calibration failed: {}", e.what()));
  }
  const double k_s = coupling_from_circuit(dev.transmon, dev.geometry, dev.coupling.beta,
                                           sweep_flux, dev.flux_validity_bound);
  const CouplingEstimate k = reconcile_k(k_fit.k, k_s);
  const auto spectrum = extract_spectrum(map_fits, k, dev.geometry);

  ensure_dir(out);
  emit_json(out / "config.json", to_json(cfg));

  json fits = {{"flux_map", json::array()}, {"lines", json::array()},
               {"calibration_line", io::to_json(cal_fit)}};
  for (const auto& f : map_fits) fits["flux_map"].push_back(io::to_json(f));
  for (const auto& f : line_fits) fits["lines"].push_back(io::to_json(f));
  emit_json(out / "fits.json", fits);

  json coupling = io::to_json(k);
  coupling["k_e_stat_sigma"] = k_fit.k_sigma;
  coupling["zero_power_w"] = k_fit.zero_power_w;
  coupling["sweep_residual_rms"] = k_fit.residual_rms;
  coupling["sweep_flux_phi0"] = sweep_flux.phi_over_phi0;
  emit_json(out / "coupling.json", coupling);

  json spec = {{"spectrum", json::array()}};
  for (const auto& p : spectrum) spec["spectrum"].push_back(io::to_json(p));
  emit_json(out / "spectrum.json", spec);

  // Plot-ready tables: x, y, yerr plus a fitted or theoretical curve.
  io::Table lines_tab{{"series", "x", "y", "yerr", "y_fit"}, {}};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const LineFit& f = line_fits[i];
    const bool ok = f.status != FitStatus::diverged && std::isfinite(f.gamma);
    for (const auto& p : lines[i].points) {
      double y_fit = std::nan("");
      if (ok) {
        y_fit = std::abs(reflection_weak(RateSet(f.gamma1, f.gamma_phi), f.omega_a - p.omega_p));
      }
      lines_tab.rows.push_back({static_cast<double>(i), p.omega_p / kTwoPi, std::abs(p.r_p),
                                f.residual_rms, y_fit});
    }
  }
  emit_table(out / "plot_lines.csv", lines_tab);

  io::Table rates_tab{{"series", "x", "y", "yerr", "y_theory"}, {}};
  for (const auto& f : map_fits) {
    if (!f.resolved) continue;
    const double x = l_over_lambda(dev.geometry, f.omega_a);
    const double g1_theory = gamma1_theory(dev.coupling, roundtrip_phase_at(x));
    rates_tab.rows.push_back({0.0, x, f.gamma1 / kTwoPi, f.gamma1_sigma / kTwoPi,
                              g1_theory / kTwoPi});
    rates_tab.rows.push_back({1.0, x, f.gamma_phi / kTwoPi, f.gamma_phi_sigma / kTwoPi,
                              dev.coupling.gamma_phi / kTwoPi});
  }
  emit_table(out / "plot_rates.csv", rates_tab);

  io::Table power_tab{{"series", "x", "y", "yerr", "y_fit"}, {}};
  const RateSet cal_rates(cal_fit.gamma1, cal_fit.gamma_phi);
  for (int part = 0; part < 2; ++part) {
    for (const auto& p : sweep.points) {
      const double fit_re = reflection_power(cal_rates, k_fit.k * std::sqrt(p.power_w));
      power_tab.rows.push_back({static_cast<double>(part), p.power_w,
                                part == 0 ? p.r_p.real() : p.r_p.imag(), k_fit.residual_rms,
                                part == 0 ? fit_re : 0.0});
    }
  }
  emit_table(out / "plot_power.csv", power_tab);

  io::Table spec_tab{{"x", "y", "yerr", "y_theory"}, {}};
  for (const auto& p : spectrum) {
    spec_tab.rows.push_back({p.l_over_lambda, p.s_quanta, p.s_sigma, theory_quanta(p.l_over_lambda)});
  }
  emit_table(out / "plot_spectrum.csv", spec_tab);

  RunManifest m;
  m.command = "fit";
  m.seed = data.seed;
  m.config_digest = config_digest(cfg);
  m.created_utc = utc_now();
  m.artifacts = {{"config", "config.json"},
                 {"fits", "fits.json"},
                 {"coupling", "coupling.json"},
                 {"spectrum", "spectrum.json"},
                 {"plots", {"plot_lines.csv", "plot_rates.csv", "plot_power.csv",
                            "plot_spectrum.csv"}},
                 {"source", fs::absolute(data_dir).lexically_normal().string()}};
  emit_json(out / "manifest.json", m.to_json());
}

void cmd_theory(const RunConfig& cfg, const fs::path& out, TheoryRange range) {
  cfg.device.validate();
  if (!(range.lo > 0.0 && range.hi > range.lo) || range.per_unit < 1) {
    throw ConfigError("theory range needs 0 < lo < hi and per_unit >= 1");
  }
  const DeviceConfig& dev = cfg.device;
  const double v_over_l = dev.geometry.velocity() / dev.geometry.length_m;

  // x = i / per_unit, so grid points such as 0.5 or 0.625 are exact.
  const auto first = static_cast<long>(std::ceil(range.lo * range.per_unit - 1e-9));
  const auto last = static_cast<long>(std::floor(range.hi * range.per_unit + 1e-9));
  io::Table tab{{"l_over_lambda", "omega_a_hz", "gamma1_hz", "s_quanta"}, {}};
  for (long i = first; i <= last; ++i) {
    const double x = static_cast<double>(i) / range.per_unit;
    const Phase theta = roundtrip_phase_at(x);
    tab.rows.push_back({x, x * v_over_l, gamma1_theory(dev.coupling, theta) / kTwoPi,
                        1.0 + cos_pi(theta.over_pi)});
  }

  const double top = transition_frequency(dev.transmon, {}, dev.flux_validity_bound);
  const double bottom = kTwoPi * (std::sqrt(8.0 * dev.transmon.ec_hz * dev.transmon.ej0_hz *
                                            dev.flux_validity_bound) -
                                  dev.transmon.ec_hz);
  json landmarks = json::array();
  for (const auto& [name, x] : {std::pair{"node", 0.5}, std::pair{"free_space", 0.625},
                                std::pair{"antinode", 0.75}}) {
    landmarks.push_back({{"name", name},
                         {"l_over_lambda", x},
                         {"omega_a_hz", x * v_over_l},
                         {"s_quanta", theory_quanta(x)}});
  }
  json summary = {{"landmarks", landmarks}};
  try {
    const double node = node_frequency(dev.geometry, bottom, top);
    summary["node_frequency_hz"] = node / kTwoPi;
    summary["node_flux_phi0"] =
        flux_for_frequency(dev.transmon, node, dev.flux_validity_bound).phi_over_phi0;
  } catch (const InvalidParameter&) {
    summary["node_frequency_hz"] = nullptr;  // tuning band holds no node
  }

  ensure_dir(out);
  emit_table(out / "theory.csv", tab);
  emit_json(out / "landmarks.json", summary);
  RunManifest m;
  m.command = "theory";
  m.config_digest = config_digest(cfg);
  m.created_utc = utc_now();
  m.artifacts = {{"theory", "theory.csv"}, {"landmarks", "landmarks.json"}};
  emit_json(out / "manifest.json", m.to_json());
}

ReportSummary summarize(const fs::path& fit_dir) {
  RunConfig cfg;
  try {
    cfg = run_config_from_json(io::read_json(fit_dir / "config.json"));
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  const json fits = io::read_json(fit_dir / "fits.json");
  const CouplingEstimate k = io::coupling_from_json(io::read_json(fit_dir / "coupling.json"));
  const json spec = io::read_json(fit_dir / "spectrum.json");
  const DeviceConfig& dev = cfg.device;

  ReportSummary s;
  s.coupling = k;
  std::vector<LineFit> map;
  try {
    for (const json& j : fits.at("flux_map")) map.push_back(io::line_fit_from_json(j));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("fits.json: {}", e.what()));
  }
  s.biases = map.size();
  std::optional<double> hidden_lo, hidden_hi;
  for (const auto& f : map) {
    if (f.resolved) {
      ++s.resolved;
      const double g = f.gamma1 / kTwoPi;
      if (s.resolved == 1 || g > s.gamma1_max_hz) {
        s.gamma1_max_hz = g;
        s.gamma1_max_flux = f.flux.phi_over_phi0;
      }
      if (s.resolved == 1 || g < s.gamma1_min_hz) {
        s.gamma1_min_hz = g;
        s.gamma1_min_flux = f.flux.phi_over_phi0;
      }
    } else {
      const double w = transition_frequency(dev.transmon, f.flux, dev.flux_validity_bound) / kTwoPi;
      hidden_lo = hidden_lo ? std::min(*hidden_lo, w) : w;
      hidden_hi = hidden_hi ? std::max(*hidden_hi, w) : w;
    }
  }
  if (s.resolved > 0) s.gamma1_ratio = s.gamma1_max_hz / s.gamma1_min_hz;
  if (hidden_lo) s.hidden_band_hz = std::pair{*hidden_lo, *hidden_hi};

  std::vector<double> line_rates;
  for (const json& j : fits.value("lines", json::array())) {
    const LineFit f = io::line_fit_from_json(j);
    if (f.resolved) line_rates.push_back(f.gamma1);
  }
  if (line_rates.size() >= 2) {
    const auto [mn, mx] = std::minmax_element(line_rates.begin(), line_rates.end());
    s.line_gamma1_ratio = *mx / *mn;
  }

  std::vector<SpectralPoint> points;
  try {
    for (const json& j : spec.at("spectrum")) points.push_back(io::spectral_point_from_json(j));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("spectrum.json: {}", e.what()));
  }
  s.spectrum_points = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (i == 0 || p.s_quanta < s.s_min) {
      s.s_min = p.s_quanta;
      s.s_min_sigma = p.s_sigma;
      s.s_min_l_over_lambda = p.l_over_lambda;
    }
    if (!(std::abs(p.s_quanta - theory_quanta(p.l_over_lambda)) <= p.s_sigma)) {
      ++s.outside_error_bars;
    }
  }

  const double top = transition_frequency(dev.transmon, {}, dev.flux_validity_bound);
  const double bottom = kTwoPi * (std::sqrt(8.0 * dev.transmon.ec_hz * dev.transmon.ej0_hz *
                                            dev.flux_validity_bound) -
                                  dev.transmon.ec_hz);
  try {
    s.node_frequency_hz = node_frequency(dev.geometry, bottom, top) / kTwoPi;
  } catch (const InvalidParameter&) {
    s.node_frequency_hz = std::nan("");
  }
  return s;
}

std::string render(const ReportSummary& s) {
  std::string out;
  auto line = [&](const std::string& text) { out += text + "\n"; };
  line(fmt::format("resolved biases:        {} of {}", s.resolved, s.biases));
  if (s.resolved > 0) {
    line(fmt::format("Gamma1/2pi max:         {:.6g} Hz at Phi/Phi0 = {:.6f}", s.gamma1_max_hz,
                     s.gamma1_max_flux));
    line(fmt::format("Gamma1/2pi min:         {:.6g} Hz at Phi/Phi0 = {:.6f}", s.gamma1_min_hz,
                     s.gamma1_min_flux));
    line(fmt::format("Gamma1 max/min ratio:   {:.4f}", s.gamma1_ratio));
  }
  if (s.line_gamma1_ratio) {
    line(fmt::format("line-cut Gamma1 ratio:  {:.4f}", *s.line_gamma1_ratio));
  }
  if (s.spectrum_points > 0) {
    line(fmt::format("minimum S:              {:.4g} +/- {:.2g} quanta at L/lambda = {:.5f}",
                     s.s_min, s.s_min_sigma, s.s_min_l_over_lambda));
    line(fmt::format("suppression vs no mirror: {:.3g}x", 1.0 / s.s_min));
  }
  line(fmt::format("node frequency (theory): {:.1f} Hz", s.node_frequency_hz));
  if (s.hidden_band_hz) {
    line(fmt::format("unresolved band:        {:.6g} - {:.6g} Hz", s.hidden_band_hz->first,
                     s.hidden_band_hz->second));
  }
  line(fmt::format("k_e = {:.4g}, k_s = {:.4g}, k_m = {:.4g} +/- {:.3g} Hz/sqrt(W)",
                   s.coupling.k_e, s.coupling.k_s, s.coupling.k_m, s.coupling.k_sigma));
  line(fmt::format("spectrum vs theory:     {} of {} points outside 1-sigma error bars",
                   s.outside_error_bars, s.spectrum_points));
  return out;
}

}  // namespace vacmirror::pipeline
