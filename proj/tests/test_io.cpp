#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vacmirror/config.hpp"
#include "vacmirror/errors.hpp"
#include "vacmirror/io.hpp"

using namespace vacmirror;
using nlohmann::json;

namespace {

std::vector<SpectroscopyTrace> sample_traces() {
  std::vector<SpectroscopyTrace> ts(2);
  ts[0].flux = {0.1};
  ts[1].flux = {0.2646718686271026};
  for (int i = 0; i < 5; ++i) {
    ts[0].points.push_back({3.7e10 + 1234.5678 * i, complex(-1.0 + 0.1 / (i + 3), 1.0 / 3.0)});
    ts[1].points.push_back({3.0e10 + std::sqrt(2.0) * i, complex(std::nextafter(0.5, 1.0), -1e-300)});
  }
  return ts;
}

template <class F>
std::size_t row_of(F&& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.row();
  }
  return 0;
}

}  // namespace

TEST_CASE("trace CSV round trip is bit exact") {
  const auto ts = sample_traces();
  std::ostringstream out;
  io::write_traces_csv(out, ts);
  std::istringstream in(out.str());
  const auto back = io::read_traces_csv(in, "t.csv");
  REQUIRE(back.size() == ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(back[i].flux.phi_over_phi0 == ts[i].flux.phi_over_phi0);
    REQUIRE(back[i].points.size() == ts[i].points.size());
    for (std::size_t j = 0; j < ts[i].points.size(); ++j) {
      // omega goes through /2pi and *2pi, which may cost one ulp
      CHECK(back[i].points[j].omega_p == doctest::Approx(ts[i].points[j].omega_p).epsilon(1e-15));
      CHECK(back[i].points[j].r_p == ts[i].points[j].r_p);
    }
  }
  // writing what was read reproduces the same text
  std::ostringstream again;
  io::write_traces_csv(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("17 significant digits") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("schema errors carry row numbers") {
  std::istringstream missing("flux_phi0,omega_p_hz,re_rp\n0.1,1,2\n");
  CHECK(row_of([&] { io::read_traces_csv(missing, "m.csv"); }) == 1);
  std::istringstream fields("flux_phi0,omega_p_hz,re_rp,im_rp\n0.1,1,2,3\n0.1,2,3\n");
  CHECK(row_of([&] { io::read_traces_csv(fields, "f.csv"); }) == 3);
  std::istringstream number("flux_phi0,omega_p_hz,re_rp,im_rp\n0.1,1,2,3\n0.1,2,x,3\n");
  CHECK(row_of([&] { io::read_traces_csv(number, "n.csv"); }) == 3);
  std::istringstream order("flux_phi0,omega_p_hz,re_rp,im_rp\n0.1,2,2,3\n0.1,1,3,3\n");
  CHECK(row_of([&] { io::read_traces_csv(order, "o.csv"); }) == 3);
  std::istringstream power("power_w,re_rp,im_rp\n1e-15,0,0\n1e-16,0,0\n");
  CHECK(row_of([&] { io::read_sweep_csv(power, "p.csv", {}); }) == 3);
  std::istringstream empty("");
  CHECK_THROWS_AS(io::read_traces_csv(empty, "e.csv"), DataError);

  std::istringstream again("flux_phi0,omega_p_hz,re_rp\n");
  try {
    io::read_traces_csv(again, "m.csv");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "m.csv:1: missing column 'im_rp' in header");
  }
}

TEST_CASE("extra columns and column order are tolerated") {
  std::istringstream in("im_rp,note,re_rp,omega_p_hz,flux_phi0\n0.5,7,0.25,1e9,0.1\n");
  const auto ts = io::read_traces_csv(in, "x.csv");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].points[0].r_p == complex(0.25, 0.5));
}

TEST_CASE("power sweep CSV round trip") {
  PowerSweep s;
  s.flux = {0.0};
  s.points = {{0.0, complex(0.9, 0.0)}, {1e-17, complex(0.1, 0.01)}, {3e-16, complex(-0.7, 0.0)}};
  std::ostringstream out;
  io::write_sweep_csv(out, s);
  std::istringstream in(out.str());
  const auto back = io::read_sweep_csv(in, "s.csv", s.flux);
  REQUIRE(back.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.points[i].power_w == s.points[i].power_w);
    CHECK(back.points[i].r_p == s.points[i].r_p);
  }
}

TEST_CASE("line fit JSON round trip keeps NaN as null") {
  LineFit f;
  f.flux = {0.2};
  f.omega_a = 3.3e10;
  f.gamma1 = 1.234e7;
  f.gamma_phi = 6.2e6;
  f.gamma = 0.5 * f.gamma1 + f.gamma_phi;
  f.omega_a_sigma = std::nan("");
  f.gamma1_sigma = 1e5;
  f.resolved = true;
  f.status = FitStatus::converged;
  f.iterations = 12;
  const json j = io::to_json(f);
  CHECK(j.dump().find("null") != std::string::npos);
  const LineFit back = io::line_fit_from_json(json::parse(j.dump()));
  CHECK(std::isnan(back.omega_a_sigma));
  CHECK(back.gamma1 == doctest::Approx(f.gamma1).epsilon(1e-15));
  CHECK(back.status == FitStatus::converged);
  CHECK(back.resolved);
  json broken = j;
  broken["status"] = "sideways";
  CHECK_THROWS_AS(io::line_fit_from_json(broken), DataError);
  broken.erase("status");
  CHECK_THROWS_AS(io::line_fit_from_json(broken), DataError);
}

TEST_CASE("config JSON round trip") {
  const RunConfig cfg = RunConfig::reference();
  const json j = to_json(cfg);
  const RunConfig back = run_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(j.at("ej0_hz") == 13.1e9);
  CHECK(j.at("gamma1_bare_hz").get<double>() == doctest::Approx(33e6).epsilon(1e-15));
  CHECK(back.device.coupling.gamma1_bare == doctest::Approx(cfg.device.coupling.gamma1_bare).epsilon(1e-15));
}

TEST_CASE("device keys alone are a valid config") {
  const json j = {{"ej0_hz", 13.1e9}, {"ec_hz", 0.38e9},   {"gamma1_bare_hz", 33e6},
                  {"gamma_phi_hz", 1e6}, {"beta", 0.4},    {"length_m", 11e-3},
                  {"epsilon", 6.25},     {"z0_ohm", 50.0}};
  const RunConfig cfg = run_config_from_json(j);
  CHECK(cfg.device.geometry.length_m == 11e-3);
  CHECK_FALSE(cfg.simulation.k_true.has_value());
}

TEST_CASE("config errors") {
  json j = to_json(RunConfig::reference());
  json unknown = j;
  unknown["ej_hz"] = 1.0;
  CHECK_THROWS_AS(run_config_from_json(unknown), ConfigError);
  json missing = j;
  missing.erase("ec_hz");
  CHECK_THROWS_AS(run_config_from_json(missing), ConfigError);
  json wrong_type = j;
  wrong_type["beta"] = "0.4";
  CHECK_THROWS_AS(run_config_from_json(wrong_type), ConfigError);
  json negative = j;
  negative["length_m"] = -1.0;
  CHECK_THROWS_AS(run_config_from_json(negative), ConfigError);
  json model = j;
  model["simulation"]["gamma1_model"] = "magic";
  CHECK_THROWS_AS(run_config_from_json(model), ConfigError);
  json nested = j;
  nested["simulation"]["probe_window"]["width"] = 3;
  CHECK_THROWS_AS(run_config_from_json(nested), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}
