#include "vacmirror/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "vacmirror/errors.hpp"

namespace vacmirror::io {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = constants::two_pi;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& name, std::size_t row,
                    const std::string& column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataError(fmt::format("{}:{}: cannot parse '{}' as a number in column '{}'", name,
                                row, field, column),
                    row);
  }
  return v;
}

// Parses a CSV with a header row. Returns column indices for `required` in
// the order given; every row must have as many fields as the header.
struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::size_t> index;  // position of each required column
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
};

ParsedCsv parse_csv(std::istream& in, const std::string& name,
                    std::span<const std::string> required) {
  ParsedCsv out;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      for (auto f : split(line)) out.header.emplace_back(f);
      for (const std::string& col : required) {
        std::size_t pos = out.header.size();
        for (std::size_t i = 0; i < out.header.size(); ++i) {
          if (out.header[i] == col) pos = i;
        }
        if (pos == out.header.size()) {
          throw DataError(fmt::format("{}:{}: missing column '{}' in header", name, lineno, col),
                          lineno);
        }
        out.index.push_back(pos);
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != out.header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", name, lineno,
                                  out.header.size(), fields.size()),
                      lineno);
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      row[i] = parse_number(fields[i], name, lineno, out.header[i]);
    }
    out.rows.push_back(std::move(row));
    out.line_numbers.push_back(lineno);
  }
  if (!have_header) throw DataError(fmt::format("{}: empty file, header row required", name));
  return out;
}

const std::string kTraceColumns[] = {"flux_phi0", "omega_p_hz", "re_rp", "im_rp"};
const std::string kSweepColumns[] = {"power_w", "re_rp", "im_rp"};

double number_or_nan(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? kNaN : v.get<double>();
}

}  // namespace

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void write_traces_csv(std::ostream& out, std::span<const SpectroscopyTrace> traces) {
  out << "flux_phi0,omega_p_hz,re_rp,im_rp\n";
  for (const auto& t : traces) {
    const std::string flux = format_double(t.flux.phi_over_phi0);
    for (const auto& p : t.points) {
      out << flux << ',' << format_double(p.omega_p / kTwoPi) << ','
          << format_double(p.r_p.real()) << ',' << format_double(p.r_p.imag()) << '\n';
    }
  }
}

std::vector<SpectroscopyTrace> read_traces_csv(std::istream& in, const std::string& name) {
  const ParsedCsv csv = parse_csv(in, name, kTraceColumns);
  std::vector<SpectroscopyTrace> traces;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const double flux = row[csv.index[0]];
    const double omega_p = kTwoPi * row[csv.index[1]];
    if (traces.empty() || traces.back().flux.phi_over_phi0 != flux) {
      traces.push_back({FluxBias{flux}, {}, std::nullopt, std::nullopt});
    } else if (!(omega_p > traces.back().points.back().omega_p)) {
      throw DataError(fmt::format("{}:{}: omega_p_hz must increase within a trace", name,
                                  csv.line_numbers[r]),
                      csv.line_numbers[r]);
    }
    traces.back().points.push_back({omega_p, complex(row[csv.index[2]], row[csv.index[3]])});
  }
  return traces;
}

void write_sweep_csv(std::ostream& out, const PowerSweep& sweep) {
  out << "power_w,re_rp,im_rp\n";
  for (const auto& p : sweep.points) {
    out << format_double(p.power_w) << ',' << format_double(p.r_p.real()) << ','
        << format_double(p.r_p.imag()) << '\n';
  }
}

PowerSweep read_sweep_csv(std::istream& in, const std::string& name, FluxBias flux) {
  const ParsedCsv csv = parse_csv(in, name, kSweepColumns);
  PowerSweep sweep;
  sweep.flux = flux;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const double p = row[csv.index[0]];
    if (!(p >= 0.0) || (!sweep.points.empty() && !(p > sweep.points.back().power_w))) {
      throw DataError(fmt::format("{}:{}: power_w must be non-negative and increasing", name,
                                  csv.line_numbers[r]),
                      csv.line_numbers[r]);
    }
    sweep.points.push_back({p, complex(row[csv.index[1]], row[csv.index[2]])});
  }
  return sweep;
}

void write_table_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i ? "," : "") << t.columns[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

Table read_table_csv(std::istream& in, const std::string& name,
                     std::span<const std::string> required_columns) {
  ParsedCsv csv = parse_csv(in, name, required_columns);
  return {std::move(csv.header), std::move(csv.rows)};
}

json to_json(const LineFit& f) {
  return {
      {"flux_phi0", f.flux.phi_over_phi0},
      {"omega_a_hz", f.omega_a / kTwoPi},
      {"gamma1_hz", f.gamma1 / kTwoPi},
      {"gamma_phi_hz", f.gamma_phi / kTwoPi},
      {"gamma_hz", f.gamma / kTwoPi},
      {"omega_a_sigma_hz", f.omega_a_sigma / kTwoPi},
      {"gamma1_sigma_hz", f.gamma1_sigma / kTwoPi},
      {"gamma_phi_sigma_hz", f.gamma_phi_sigma / kTwoPi},
      {"gamma_sigma_hz", f.gamma_sigma / kTwoPi},
      {"depth", f.depth},
      {"residual_rms", f.residual_rms},
      {"resolved", f.resolved},
      {"status", to_string(f.status)},
      {"iterations", f.iterations},
      {"message", f.message},
  };
}

LineFit line_fit_from_json(const json& j) {
  try {
    LineFit f;
    f.flux = {j.at("flux_phi0").get<double>()};
    f.omega_a = kTwoPi * number_or_nan(j, "omega_a_hz");
    f.gamma1 = kTwoPi * number_or_nan(j, "gamma1_hz");
    f.gamma_phi = kTwoPi * number_or_nan(j, "gamma_phi_hz");
    f.gamma = kTwoPi * number_or_nan(j, "gamma_hz");
    f.omega_a_sigma = kTwoPi * number_or_nan(j, "omega_a_sigma_hz");
    f.gamma1_sigma = kTwoPi * number_or_nan(j, "gamma1_sigma_hz");
    f.gamma_phi_sigma = kTwoPi * number_or_nan(j, "gamma_phi_sigma_hz");
    f.gamma_sigma = kTwoPi * number_or_nan(j, "gamma_sigma_hz");
    f.depth = number_or_nan(j, "depth");
    f.residual_rms = number_or_nan(j, "residual_rms");
    f.resolved = j.at("resolved").get<bool>();
    const std::string status = j.at("status").get<std::string>();
    if (status == "converged") {
      f.status = FitStatus::converged;
    } else if (status == "unresolved") {
      f.status = FitStatus::unresolved;
    } else if (status == "diverged") {
      f.status = FitStatus::diverged;
    } else {
      throw DataError(fmt::format("line fit: unknown status '{}'", status));
    }
    f.iterations = j.at("iterations").get<int>();
    f.message = j.at("message").get<std::string>();
    return f;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("line fit: {}", e.what()));
  }
}

json to_json(const CouplingEstimate& k) {
  return {{"k_e", k.k_e}, {"k_s", k.k_s}, {"k_m", k.k_m}, {"k_sigma", k.k_sigma}};
}

CouplingEstimate coupling_from_json(const json& j) {
  try {
    return {j.at("k_e").get<double>(), j.at("k_s").get<double>(), j.at("k_m").get<double>(),
            j.at("k_sigma").get<double>()};
  } catch (const json::exception& e) {
    throw DataError(fmt::format("coupling: {}", e.what()));
  }
}

json to_json(const SpectralPoint& p) {
  return {{"flux_phi0", p.flux.phi_over_phi0},
          {"omega_a_hz", p.omega_a / kTwoPi},
          {"l_over_lambda", p.l_over_lambda},
          {"s_quanta", p.s_quanta},
          {"s_sigma", p.s_sigma}};
}

SpectralPoint spectral_point_from_json(const json& j) {
  try {
    SpectralPoint p;
    p.flux = {j.at("flux_phi0").get<double>()};
    p.omega_a = kTwoPi * j.at("omega_a_hz").get<double>();
    p.l_over_lambda = j.at("l_over_lambda").get<double>();
    p.s_quanta = j.at("s_quanta").get<double>();
    p.s_sigma = j.at("s_sigma").get<double>();
    return p;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("spectral point: {}", e.what()));
  }
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", p.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write to '{}' failed", p.string()));
}

json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("'{}' is not valid JSON: {}", p.string(), e.what()));
  }
}

void write_json(const std::filesystem::path& p, const json& j) {
  write_text(p, j.dump(2) + "\n");
}

}  // namespace vacmirror::io
