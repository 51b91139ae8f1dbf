#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vacmirror/device_model.hpp"
#include "vacmirror/synthlab.hpp"

// Run configuration: device parameters plus an optional "simulation" block.
// Every value crossing this boundary is cyclic (Hz); the structs hold rad/s.
namespace vacmirror {

struct RunConfig {
  DeviceConfig device;
  SimulationSettings simulation;

  // Reference device with the simulation defaults used by the shipped profile:
  // k_true = 7.45e15, a 1.74 dB power miscalibration (so the sweep yields
  // k_e ~ 6.1e15), and two line cuts whose Gamma_1 differ by 9.8x.
  static RunConfig reference();
};

// Throws ConfigError on missing or unknown keys and on values that fail the
// domain invariants.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::filesystem::path& path);

const char* to_string(Gamma1Model m);

}  // namespace vacmirror
