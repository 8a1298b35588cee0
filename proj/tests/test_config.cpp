#include <doctest.h>

#include <filesystem>
#include <regex>
#include <string>

#include "geolab/config.hpp"
#include "geolab/errors.hpp"
#include "geolab/io.hpp"
#include "geolab/pipeline.hpp"

using namespace geolab;
using json = nlohmann::ordered_json;

namespace {

json minimal() {
  return json::parse(R"({
    "grid": {"n_points": 32},
    "time": {"n_time": 8},
    "endpoints": {"phi0": [], "phi1": [[1, 0.005, 0.0]]},
    "epsilons": [0.1, 0.01, 0.001],
    "deltas": [0.05, 0.025]
  })");
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.detail();
  }
  FAIL("config accepted");
  return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults and round trip") {
  ExperimentConfig c = parse_config(minimal());
  CHECK(c.n_points == 32);
  CHECK(c.n_time_refined == 16);
  CHECK(c.curvature_epsilons == std::vector<double>{1e-2});
  CHECK(c.n_seeds == 20);
  CHECK(c.tolerances.C_A_bound == 100.0);
  ExperimentConfig d = parse_config(to_json(c));
  CHECK(to_json(d).dump() == to_json(c).dump());
  CHECK(c.endpoint_1()[0] == doctest::Approx(0.005));
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"default.json", "equal_endpoints.json", "coarse.json"}) {
    CAPTURE(name);
    const auto path = std::filesystem::path(GEOLAB_SOURCE_DIR) / "configs" / name;
    CHECK_NOTHROW(load_config(path));
  }
}

TEST_CASE("rejections name the offending key") {
  json j = minimal();
  j["grid"]["bogus"] = 1;
  CHECK(config_error(j).find("grid.bogus") != std::string::npos);

  j = minimal();
  j["grid"]["n_points"] = 33;
  CHECK(config_error(j).find("grid.n_points") != std::string::npos);

  j = minimal();
  j["time"]["n_time"] = 4;
  CHECK(config_error(j).find("time.n_time") != std::string::npos);

  j = minimal();
  j["epsilons"] = {0.01, 0.1};
  CHECK(config_error(j).find("epsilons") != std::string::npos);

  j = minimal();
  j["deltas"] = {0.3};
  CHECK(config_error(j).find("deltas") != std::string::npos);

  j = minimal();
  j["truncation"] = {{"A", {0.5}}};
  CHECK(config_error(j).find("truncation.A") != std::string::npos);

  j = minimal();
  j["k_list"] = {0};
  CHECK(config_error(j).find("k_list") != std::string::npos);

  j = minimal();
  j["endpoints"]["phi1"] = json::parse("[[1, 1.0, 0.0]]");
  CHECK(config_error(j).find("endpoints.phi1") != std::string::npos);

  j = minimal();
  j["background"] = {{"psi", json::parse("[[1, 10.0, 0.0]]")}};
  CHECK(config_error(j).find("background.psi") != std::string::npos);

  j = minimal();
  j["endpoints"]["phi0"] = json::parse("[[1, 0.1]]");
  CHECK(config_error(j).find("endpoints.phi0") != std::string::npos);

  j = minimal();
  j["seed"] = -1;
  CHECK(config_error(j).find("seed") != std::string::npos);

  j = minimal();
  j["grid"]["scheme"] = "upwind";
  CHECK(config_error(j).find("grid.scheme") != std::string::npos);
}

TEST_CASE("required lists") {
  json j = minimal();
  j.erase("epsilons");
  ExperimentConfig c = parse_config(j);
  CHECK_THROWS_AS(require_list(c, "epsilons"), Error);
  CHECK_NOTHROW(require_list(c, "deltas"));
  CHECK_THROWS_AS(require_list(c, "k_list"), Error);
}

TEST_CASE("load errors are config errors") {
  const auto dir = std::filesystem::temp_directory_path() / "geolab_cfg_test";
  std::filesystem::create_directories(dir);
  io::write_atomic(dir / "broken.json", "{ not json");
  for (const auto& p : {dir / "broken.json", dir / "missing.json"}) {
    try {
      load_config(p);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
    }
  }
  std::filesystem::remove_all(dir);
}

}

TEST_SUITE("pipeline") {

TEST_CASE("names") {
  CHECK(parse_suite("entropy") == Suite::entropy);
  CHECK(parse_suite("all") == Suite::all);
  CHECK(parse_variant("epsA") == MabuchiVariant::epsA);
  CHECK(to_string(Suite::curvature) == "curvature");
  CHECK(to_string(MabuchiVariant::k) == "k");
  CHECK_THROWS_AS(parse_suite("everything"), Error);
  CHECK_THROWS_AS(parse_variant("K"), Error);
}

TEST_CASE("suite report semantics") {
  SuiteReport r;
  r.entries.push_back({make_result("a", 1.0), false});
  r.entries.push_back({make_result("b", -1.0), true});
  CHECK(r.checks_pass());
  CHECK(r.controls_fail());
  r.entries.push_back({skipped_result("c", "x"), true});
  CHECK_FALSE(r.controls_fail());
  r.entries.push_back({make_result("d", -1.0), false});
  CHECK_FALSE(r.checks_pass());
  json j = to_json(r, Suite::entropy);
  CHECK(j["suite"] == "entropy");
  CHECK(j["results"].size() == 4);
}

TEST_CASE("trace CSV") {
  FunctionalTrace t = make_trace("m", {0.0, 0.5, 1.0}, {0.25, 0.0, 0.5});
  const std::string csv = trace_to_csv(t);
  CHECK(csv == "t,value,second_difference\n0,0.25,\n0.5,0,3\n1,0.5,\n");
}

TEST_CASE("timestamp") {
  CHECK(std::regex_match(timestamp_utc(), std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST_CASE("ddc test path") {
  SpatialGrid g(32);
  PeriodicField a = PeriodicField::constant(g, 0.0), b = PeriodicField::constant(g, 1.0);
  PathField p = ddc_test_path(a, b, 8);
  CHECK(sup_distance(p.endpoint_0(), a) == 0.0);
  CHECK(sup_distance(p.endpoint_1(), b) == 0.0);
  CHECK(p(4, 0) == doctest::Approx(0.5));
}

TEST_CASE("workspace on equal endpoints") {
  json j = minimal();
  j["endpoints"]["phi1"] = json::array();
  Workspace ws(parse_config(j));
  CHECK(ws.oracle().has_value());
  CHECK(ws.weak().solves.size() == 3);
  SuiteReport r = run_suite(ws, Suite::bounds);
  CHECK(r.checks_pass());
  CHECK(r.controls_fail());
}

}
