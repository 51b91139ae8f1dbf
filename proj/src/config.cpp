#include "vacmirror/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

#include "vacmirror/errors.hpp"

namespace vacmirror {

using nlohmann::json;

RunConfig RunConfig::reference() {
  RunConfig c;
  c.device = DeviceConfig::reference();
  c.simulation.k_true = 7.45e15;
  c.simulation.power_calibration_db = 1.7365287547505162;  // 20 log10(7.45 / 6.1)
  // 4.8 GHz band edge, and the bias on the same flank with Gamma_1 9.8x lower.
  c.simulation.line_fluxes_phi0 = {0.26467186862710262, 0.20739143127510809};
  return c;
}

const char* to_string(Gamma1Model m) {
  switch (m) {
    case Gamma1Model::bare_rate: return "bare_rate";
    case Gamma1Model::vacuum_coupling: return "vacuum_coupling";
  }
  return "unknown";
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(fmt::format("config: unknown key '{}' in {}", key, where));
    }
  }
}

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("config: missing key '{}'", key));
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("config: '{}' must be a number", key));
  return v.get<double>();
}

std::size_t count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(fmt::format("config: '{}' must be a non-negative integer", key));
  }
  return v.get<std::size_t>();
}

std::pair<double, double> number_pair(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(fmt::format("config: '{}' must be a two-element numeric array", key));
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

SimulationSettings simulation_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'simulation' must be an object");
  reject_unknown(j,
                 {"gamma1_model", "k_true_hz_per_sqrt_w", "power_calibration_db",
                  "noise_sigma", "band_hz", "flux_points", "probe_window",
                  "line_fluxes_phi0", "sweep_flux_phi0", "sweep_points", "sweep_decades"},
                 "simulation");
  SimulationSettings s;
  if (j.contains("gamma1_model")) {
    const std::string m = j.at("gamma1_model").get<std::string>();
    if (m == "bare_rate") {
      s.gamma1_model = Gamma1Model::bare_rate;
    } else if (m == "vacuum_coupling") {
      s.gamma1_model = Gamma1Model::vacuum_coupling;
    } else {
      throw ConfigError(fmt::format(
          "config: gamma1_model must be 'bare_rate' or 'vacuum_coupling', got '{}'", m));
    }
  }
  if (j.contains("k_true_hz_per_sqrt_w")) s.k_true = number(j, "k_true_hz_per_sqrt_w");
  if (j.contains("power_calibration_db")) s.power_calibration_db = number(j, "power_calibration_db");
  if (j.contains("noise_sigma")) s.noise_sigma = number(j, "noise_sigma");
  if (j.contains("band_hz")) std::tie(s.band_lo_hz, s.band_hi_hz) = number_pair(j, "band_hz");
  if (j.contains("flux_points")) s.flux_points = count(j, "flux_points");
  if (j.contains("probe_window")) {
    const json& w = j.at("probe_window");
    if (!w.is_object()) throw ConfigError("config: 'probe_window' must be an object");
    reject_unknown(w, {"linewidths", "points"}, "probe_window");
    if (w.contains("linewidths")) s.window.linewidths = number(w, "linewidths");
    if (w.contains("points")) s.window.points = count(w, "points");
  }
  if (j.contains("line_fluxes_phi0")) {
    const json& v = j.at("line_fluxes_phi0");
    if (!v.is_array()) throw ConfigError("config: 'line_fluxes_phi0' must be an array");
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError("config: 'line_fluxes_phi0' entries must be numbers");
      s.line_fluxes_phi0.push_back(x.get<double>());
    }
  }
  if (j.contains("sweep_flux_phi0")) s.sweep_flux_phi0 = number(j, "sweep_flux_phi0");
  if (j.contains("sweep_points")) s.sweep_points = count(j, "sweep_points");
  if (j.contains("sweep_decades")) {
    std::tie(s.sweep_decades_below, s.sweep_decades_above) = number_pair(j, "sweep_decades");
  }
  return s;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(j,
                 {"ej0_hz", "ec_hz", "gamma1_bare_hz", "gamma_phi_hz", "beta", "length_m",
                  "epsilon", "z0_ohm", "flux_validity_bound", "simulation"},
                 "device config");
  RunConfig c;
  try {
    c.device.transmon = {number(j, "ej0_hz"), number(j, "ec_hz")};
    c.device.coupling = {constants::two_pi * number(j, "gamma1_bare_hz"),
                         constants::two_pi * number(j, "gamma_phi_hz"), number(j, "beta")};
    c.device.geometry = {number(j, "length_m"), number(j, "epsilon"), number(j, "z0_ohm")};
    if (j.contains("flux_validity_bound")) {
      c.device.flux_validity_bound = number(j, "flux_validity_bound");
    }
    if (j.contains("simulation")) c.simulation = simulation_from_json(j.at("simulation"));
    c.device.validate();
    c.simulation.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  return c;
}

json to_json(const RunConfig& cfg) {
  const DeviceConfig& d = cfg.device;
  const SimulationSettings& s = cfg.simulation;
  json sim = {
      {"gamma1_model", to_string(s.gamma1_model)},
      {"power_calibration_db", s.power_calibration_db},
      {"noise_sigma", s.noise_sigma},
      {"band_hz", {s.band_lo_hz, s.band_hi_hz}},
      {"flux_points", s.flux_points},
      {"probe_window", {{"linewidths", s.window.linewidths}, {"points", s.window.points}}},
      {"line_fluxes_phi0", s.line_fluxes_phi0},
      {"sweep_flux_phi0", s.sweep_flux_phi0},
      {"sweep_points", s.sweep_points},
      {"sweep_decades", {s.sweep_decades_below, s.sweep_decades_above}},
  };
  if (s.k_true) sim["k_true_hz_per_sqrt_w"] = *s.k_true;
  return {
      {"ej0_hz", d.transmon.ej0_hz},
      {"ec_hz", d.transmon.ec_hz},
      {"gamma1_bare_hz", d.coupling.gamma1_bare / constants::two_pi},
      {"gamma_phi_hz", d.coupling.gamma_phi / constants::two_pi},
      {"beta", d.coupling.beta},
      {"length_m", d.geometry.length_m},
      {"epsilon", d.geometry.epsilon},
      {"z0_ohm", d.geometry.z0_ohm},
      {"flux_validity_bound", d.flux_validity_bound},
      {"simulation", sim},
  };
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config: '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return run_config_from_json(j);
}

}  // namespace vacmirror
