#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "vacmirror/config.hpp"
#include "vacmirror/errors.hpp"
#include "vacmirror/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vacmirror;

namespace {

enum Exit : int { ok = 0, config_error = 2, data_error = 3, check_failed = 4 };

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig::reference() : load_run_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmon-in-front-of-a-mirror simulation and fitting pipeline"};
  app.set_version_flag("--version", pipeline::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::uint64_t seed = 1;
  bool check = false;
  pipeline::TheoryRange range;

  auto* simulate = app.add_subcommand("simulate", "Generate synthetic spectroscopy data");
  simulate->add_option("--config", config_path, "Run configuration JSON (default: built-in reference profile)");
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--seed", seed, "Noise seed");

  auto* fit = app.add_subcommand("fit", "Fit a simulate output directory");
  fit->add_option("data", data_dir, "Directory written by 'simulate'")->required();
  fit->add_option("--out", out_dir, "Output directory")->required();

  auto* theory = app.add_subcommand("theory", "Emit theory curves versus L/lambda");
  theory->add_option("--config", config_path, "Run configuration JSON (default: built-in reference profile)");
  theory->add_option("--out", out_dir, "Output directory")->required();
  theory->add_option("--from", range.lo, "Lowest L/lambda")->capture_default_str();
  theory->add_option("--to", range.hi, "Highest L/lambda")->capture_default_str();
  theory->add_option("--per-unit", range.per_unit, "Grid points per unit of L/lambda")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarise a fit output directory");
  report->add_option("--out", out_dir, "Directory written by 'fit'")->required();
  report->add_flag("--check", check, "Exit with status 4 if the spectrum disagrees with theory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  // Errors that are not explicitly about data come from bad parameters in
  // the config when running simulate or theory, and from bad inputs otherwise.
  const bool config_driven = simulate->parsed() || theory->parsed();
  try {
    if (simulate->parsed()) {
      pipeline::cmd_simulate(config_or_default(config_path), out_dir, seed);
      fmt::print("wrote simulation to {}\n", out_dir);
    } else if (fit->parsed()) {
      pipeline::cmd_fit(data_dir, out_dir);
      fmt::print("wrote fits to {}\n", out_dir);
    } else if (theory->parsed()) {
      pipeline::cmd_theory(config_or_default(config_path), out_dir, range);
      fmt::print("wrote theory curves to {}\n", out_dir);
    } else if (report->parsed()) {
      const auto summary = pipeline::summarize(out_dir);
      fmt::print("{}", pipeline::render(summary));
      if (check) {
        if (!summary.check_passed()) {
          fmt::print(stderr, "check failed: {} of {} spectral points outside error bars\n",
                     summary.outside_error_bars, summary.spectrum_points);
          return check_failed;
        }
        fmt::print("check passed\n");
      }
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return config_error;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return data_error;
  } catch (const FluxOutOfTransmonRegime& e) {
    fmt::print(stderr, "FluxOutOfTransmonRegime: {}\n", e.what());
    return config_driven ? config_error : data_error;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return config_driven ? config_error : data_error;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return data_error;
  }
  return ok;
}
