#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vacmirror/estimator.hpp"
#include "vacmirror/synthlab.hpp"

// Text formats at the edge of the pipeline. Numbers are written with 17
// significant digits so doubles survive a round trip; frequencies and rates
// are written in Hz.
namespace vacmirror::io {

std::string format_double(double x);

// Trace CSV: flux_phi0,omega_p_hz,re_rp,im_rp. A file may hold several
// traces; consecutive rows with the same flux_phi0 form one trace.
void write_traces_csv(std::ostream& out, std::span<const SpectroscopyTrace> traces);
std::vector<SpectroscopyTrace> read_traces_csv(std::istream& in, const std::string& name);

// Sweep CSV: power_w,re_rp,im_rp. The flux is not part of the file.
void write_sweep_csv(std::ostream& out, const PowerSweep& sweep);
PowerSweep read_sweep_csv(std::istream& in, const std::string& name, FluxBias flux);

// A generic numeric table with a mandatory header, for plot-ready files.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_table_csv(std::ostream& out, const Table& t);
Table read_table_csv(std::istream& in, const std::string& name,
                     std::span<const std::string> required_columns);

nlohmann::json to_json(const LineFit& f);
LineFit line_fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CouplingEstimate& k);
CouplingEstimate coupling_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpectralPoint& p);
SpectralPoint spectral_point_from_json(const nlohmann::json& j);

// File helpers that throw DataError with the path in the message.
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& p);
void write_json(const std::filesystem::path& p, const nlohmann::json& j);

}  // namespace vacmirror::io
