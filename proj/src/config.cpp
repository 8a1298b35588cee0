#include "geolab/config.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "geolab/errors.hpp"
#include "geolab/io.hpp"

namespace geolab {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  fail(ErrorCode::config, "'" + key + "': " + why);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad(key, "must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, key));
  return out;
}

std::vector<FourierTerm> fourier(const json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "must be an array of [k, a, b]");
  std::vector<FourierTerm> out;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) bad(key, "each term must be [k, a, b]");
    const int k = integer(t[0], key);
    if (k < 0) bad(key, "wavenumbers must be >= 0");
    out.push_back({k, number(t[1], key), number(t[2], key)});
  }
  return out;
}

json fourier_json(const std::vector<FourierTerm>& terms) {
  json a = json::array();
  for (const auto& t : terms) a.push_back({t.k, t.a, t.b});
  return a;
}

void strictly_decreasing_positive(const std::vector<double>& v, const std::string& key) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) bad(key, "entries must be positive");
    if (i > 0 && !(v[i] < v[i - 1])) bad(key, "entries must be strictly decreasing");
  }
}

}  // namespace

Background ExperimentConfig::background() const {
  return make_background(fourier_field(grid(), psi), scheme);
}
PeriodicField ExperimentConfig::endpoint_0() const { return fourier_field(grid(), phi0); }
PeriodicField ExperimentConfig::endpoint_1() const { return fourier_field(grid(), phi1); }
PeriodicField ExperimentConfig::chi_field() const { return fourier_field(grid(), chi); }

ExperimentConfig parse_config(const json& j) {
  only_keys(j, "", {"grid", "time", "background", "endpoints", "epsilons", "deltas", "truncation",
                    "k_list", "curvature", "tolerances", "seed", "n_seeds", "out_dir"});
  ExperimentConfig c;
  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, "grid", {"n_points", "scheme"});
    if (g.contains("n_points")) c.n_points = integer(g["n_points"], "grid.n_points");
    if (g.contains("scheme")) {
      const std::string s = g["scheme"].is_string() ? g["scheme"].get<std::string>() : "";
      if (s == "central2")
        c.scheme = Scheme::central2;
      else if (s == "spectral")
        c.scheme = Scheme::spectral;
      else
        bad("grid.scheme", "must be \"central2\" or \"spectral\"");
    }
  }
  if (c.n_points < 8 || c.n_points % 2 != 0) bad("grid.n_points", "must be even and >= 8");

  if (j.contains("time")) {
    const json& t = j["time"];
    only_keys(t, "time", {"n_time", "n_time_refined"});
    if (t.contains("n_time")) c.n_time = integer(t["n_time"], "time.n_time");
    c.n_time_refined = 2 * c.n_time;
    if (t.contains("n_time_refined")) c.n_time_refined = integer(t["n_time_refined"], "time.n_time_refined");
  } else {
    c.n_time_refined = 2 * c.n_time;
  }
  if (c.n_time < 8) bad("time.n_time", "must be >= 8");
  if (c.n_time_refined <= c.n_time) bad("time.n_time_refined", "must exceed n_time");

  if (j.contains("background")) {
    only_keys(j["background"], "background", {"psi"});
    if (j["background"].contains("psi")) c.psi = fourier(j["background"]["psi"], "background.psi");
  }
  if (j.contains("endpoints")) {
    only_keys(j["endpoints"], "endpoints", {"phi0", "phi1"});
    if (j["endpoints"].contains("phi0")) c.phi0 = fourier(j["endpoints"]["phi0"], "endpoints.phi0");
    if (j["endpoints"].contains("phi1")) c.phi1 = fourier(j["endpoints"]["phi1"], "endpoints.phi1");
  }
  if (j.contains("epsilons")) c.epsilons = numbers(j["epsilons"], "epsilons");
  strictly_decreasing_positive(c.epsilons, "epsilons");
  if (j.contains("deltas")) c.deltas = numbers(j["deltas"], "deltas");
  strictly_decreasing_positive(c.deltas, "deltas");
  if (!c.deltas.empty() && c.deltas.front() > 0.25) bad("deltas", "entries must be <= 0.25");

  if (j.contains("truncation")) {
    only_keys(j["truncation"], "truncation", {"A", "chi"});
    if (j["truncation"].contains("A")) c.A_list = numbers(j["truncation"]["A"], "truncation.A");
    if (j["truncation"].contains("chi")) c.chi = fourier(j["truncation"]["chi"], "truncation.chi");
  }
  for (double A : c.A_list)
    if (!(A >= 1.0)) bad("truncation.A", "levels must be >= 1");

  if (j.contains("k_list")) {
    if (!j["k_list"].is_array()) bad("k_list", "must be an array");
    for (const auto& k : j["k_list"]) c.k_list.push_back(integer(k, "k_list"));
  }
  for (int k : c.k_list)
    if (k < 1) bad("k_list", "entries must be >= 1");

  if (j.contains("curvature")) {
    only_keys(j["curvature"], "curvature", {"epsilons", "kappa"});
    if (j["curvature"].contains("epsilons"))
      c.curvature_epsilons = numbers(j["curvature"]["epsilons"], "curvature.epsilons");
    if (j["curvature"].contains("kappa")) c.kappa = number(j["curvature"]["kappa"], "curvature.kappa");
  }
  strictly_decreasing_positive(c.curvature_epsilons, "curvature.epsilons");

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    only_keys(t, "tolerances", {"convexity", "k_convexity", "gap_abs", "C_A_bound"});
    if (t.contains("convexity")) c.tolerances.convexity = number(t["convexity"], "tolerances.convexity");
    if (t.contains("k_convexity")) c.tolerances.k_convexity = number(t["k_convexity"], "tolerances.k_convexity");
    if (t.contains("gap_abs")) c.tolerances.gap_abs = number(t["gap_abs"], "tolerances.gap_abs");
    if (t.contains("C_A_bound")) c.tolerances.C_A_bound = number(t["C_A_bound"], "tolerances.C_A_bound");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("n_seeds")) c.n_seeds = integer(j["n_seeds"], "n_seeds");
  if (c.n_seeds < 1) bad("n_seeds", "must be >= 1");
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) bad("out_dir", "must be a string");
    c.out_dir = j["out_dir"].get<std::string>();
  }

  try {
    const Background bg = c.background();
    if (!is_admissible(bg, c.endpoint_0())) bad("endpoints.phi0", "potential is not admissible");
    if (!is_admissible(bg, c.endpoint_1())) bad("endpoints.phi1", "potential is not admissible");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    bad("background.psi", e.detail());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::string text;
  try {
    text = io::read_file(file);
  } catch (const Error& e) {
    fail(ErrorCode::config, "cannot read config " + file.string() + ": " + e.detail());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, "config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["grid"] = {{"n_points", c.n_points}, {"scheme", c.scheme == Scheme::central2 ? "central2" : "spectral"}};
  j["time"] = {{"n_time", c.n_time}, {"n_time_refined", c.n_time_refined}};
  j["background"] = {{"psi", fourier_json(c.psi)}};
  j["endpoints"] = {{"phi0", fourier_json(c.phi0)}, {"phi1", fourier_json(c.phi1)}};
  j["epsilons"] = c.epsilons;
  j["deltas"] = c.deltas;
  j["truncation"] = {{"A", c.A_list}, {"chi", fourier_json(c.chi)}};
  j["k_list"] = c.k_list;
  j["curvature"] = {{"epsilons", c.curvature_epsilons}, {"kappa", c.kappa}};
  j["tolerances"] = {{"convexity", c.tolerances.convexity},
                     {"k_convexity", c.tolerances.k_convexity},
                     {"gap_abs", c.tolerances.gap_abs},
                     {"C_A_bound", c.tolerances.C_A_bound}};
  j["seed"] = c.seed;
  j["n_seeds"] = c.n_seeds;
  j["out_dir"] = c.out_dir;
  return j;
}

void require_list(const ExperimentConfig& c, std::string_view list) {
  bool empty = false;
  if (list == "epsilons") empty = c.epsilons.empty();
  else if (list == "deltas") empty = c.deltas.empty();
  else if (list == "truncation.A") empty = c.A_list.empty();
  else if (list == "k_list") empty = c.k_list.empty();
  else if (list == "curvature.epsilons") empty = c.curvature_epsilons.empty();
  else require(false, "unknown config list " + std::string(list));
  if (empty) fail(ErrorCode::config, "'" + std::string(list) + "' must be a nonempty list for this command");
}

}  // namespace geolab
