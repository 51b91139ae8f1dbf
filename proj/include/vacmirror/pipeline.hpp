#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vacmirror/config.hpp"
#include "vacmirror/estimator.hpp"

// The four CLI commands as library calls. Each writes into an output
// directory together with a manifest.json describing the run.
namespace vacmirror::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::string created_utc;
  nlohmann::json artifacts = nlohmann::json::object();

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// "sha256:<hex>" of the canonical (key-sorted) JSON form of the config.
std::string config_digest(const RunConfig& cfg);

// Writes config.json, flux_map.csv, line_<i>.csv for each configured line
// cut, line_calibration.csv at the sweep flux, power_sweep.csv and
// manifest.json.
void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out, std::uint64_t seed);

// Fits a directory produced by cmd_simulate. Writes fits.json,
// coupling.json, spectrum.json, plot_*.csv, config.json and manifest.json.
void cmd_fit(const std::filesystem::path& data_dir, const std::filesystem::path& out,
             const FitOptions& opts = {});

struct TheoryRange {
  double lo = 0.4;
  double hi = 0.8;
  int per_unit = 1000;  // grid points per unit of L/lambda
};

// Writes theory.csv (Gamma_1 and quanta versus L/lambda), landmarks.json and
// manifest.json.
void cmd_theory(const RunConfig& cfg, const std::filesystem::path& out, TheoryRange range = {});

struct ReportSummary {
  std::size_t biases = 0;
  std::size_t resolved = 0;
  double gamma1_max_hz = 0.0;
  double gamma1_max_flux = 0.0;
  double gamma1_min_hz = 0.0;
  double gamma1_min_flux = 0.0;
  double gamma1_ratio = 0.0;
  std::optional<double> line_gamma1_ratio;
  double s_min = 0.0;
  double s_min_sigma = 0.0;
  double s_min_l_over_lambda = 0.0;
  double node_frequency_hz = 0.0;
  std::optional<std::pair<double, double>> hidden_band_hz;
  CouplingEstimate coupling;
  std::size_t spectrum_points = 0;
  std::size_t outside_error_bars = 0;

  bool check_passed() const { return spectrum_points > 0 && outside_error_bars == 0; }
};

ReportSummary summarize(const std::filesystem::path& fit_dir);
std::string render(const ReportSummary& s);

}  // namespace vacmirror::pipeline
