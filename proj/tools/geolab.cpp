// geolab: batch driver for the geodesic lab.
//
//   geolab <geodesic|fiberwise|mabuchi|verify|study> --config FILE
//          [--out DIR] [--threads N] [--suite NAME] [--variant NAME]
//
// Exit status: 0 ok, 1 configuration error, 2 runtime failure, 3 check failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "geolab/config.hpp"
#include "geolab/errors.hpp"
#include "geolab/io.hpp"
#include "geolab/kernels.hpp"
#include "geolab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace geolab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheck = 3;

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  std::string suite = "all";
  std::string variant = "exact";
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output directory (overrides GEOLAB_OUT_DIR and the config)");
  sub->add_option("--threads", o.threads, "Thread cap (overrides GEOLAB_THREADS)")->check(CLI::PositiveNumber);
}

void write_diagnostic(const fs::path& dir, const std::string& command, const Error& e) {
  nlohmann::ordered_json j;
  j["generated_at"] = timestamp_utc();
  j["command"] = command;
  j["error"] = std::string(to_string(e.code()));
  j["message"] = e.detail();
  try {
    io::write_atomic(dir / "error.json", j.dump(2) + "\n");
  } catch (const Error&) {
  }
}

void print_report(const SuiteReport& rep) {
  for (const auto& e : rep.entries) {
    const char* status = e.ok() ? "ok  " : "FAIL";
    std::printf("%s %-44s %-8s margin %.3e\n", status, e.result.name.c_str(),
                std::string(to_string(e.result.outcome)).c_str(), e.result.margin);
  }
  std::printf("checks %s, controls %s\n", rep.checks_pass() ? "pass" : "FAIL",
              rep.controls_fail() ? "fail as expected" : "DID NOT FAIL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for weak geodesics, eps-geodesics and Mabuchi convexity"};
  app.require_subcommand(1);
  Options o;
  CLI::App* geo = app.add_subcommand("geodesic", "eps-geodesic sweep, paths and oracle distances");
  CLI::App* fib = app.add_subcommand("fiberwise", "fiberwise Monge-Ampere family and its bounds");
  CLI::App* mab = app.add_subcommand("mabuchi", "Mabuchi-type functionals along the weak geodesic");
  CLI::App* ver = app.add_subcommand("verify", "verification suite");
  CLI::App* stu = app.add_subcommand("study", "every pipeline plus the full suite");
  for (CLI::App* s : {geo, fib, mab, ver, stu}) add_common(s, o);
  mab->add_option("--variant", o.variant, "exact | k | epsA");
  ver->add_option("--suite", o.suite, "entropy | convexity | curvature | bounds | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  fs::path out_dir;
  try {
    ExperimentConfig cfg = load_config(o.config);
    if (!o.out.empty())
      cfg.out_dir = o.out;
    else if (const char* env = std::getenv("GEOLAB_OUT_DIR"); env && *env)
      cfg.out_dir = env;
    out_dir = cfg.out_dir;

    int threads = o.threads;
    if (threads == 0)
      if (const char* env = std::getenv("GEOLAB_THREADS"); env && *env) {
        try {
          threads = std::stoi(env);
        } catch (const std::exception&) {
          fail(ErrorCode::config, "GEOLAB_THREADS must be a positive integer");
        }
        if (threads < 1) fail(ErrorCode::config, "GEOLAB_THREADS must be a positive integer");
      }
    if (threads > 0) kernels::set_threads(threads);

    // Parse names before any work so that a typo costs nothing.
    const Suite suite = parse_suite(o.suite);
    const MabuchiVariant variant = parse_variant(o.variant);

    Workspace ws(std::move(cfg));
    if (command == "geodesic") {
      const auto j = run_geodesic(ws, out_dir);
      std::printf("wrote %zu files to %s\n", j["files"].size() + 1, (out_dir / "geodesic").c_str());
      return kExitOk;
    }
    if (command == "fiberwise") {
      const auto j = run_fiberwise(ws, out_dir);
      std::printf("wrote %zu files to %s\n", j["files"].size() + 1, (out_dir / "fiberwise").c_str());
      return kExitOk;
    }
    if (command == "mabuchi") {
      const auto j = run_mabuchi(ws, variant, out_dir);
      std::printf("wrote %zu files to %s\n", j["files"].size() + 1, (out_dir / "mabuchi").c_str());
      return kExitOk;
    }
    const SuiteReport rep = command == "verify" ? run_verify(ws, suite, out_dir) : run_study(ws, out_dir);
    print_report(rep);
    return rep.checks_pass() ? kExitOk : kExitCheck;
  } catch (const Error& e) {
    std::fprintf(stderr, "geolab %s: %s\n", command.c_str(), e.what());
    if (e.code() == ErrorCode::config) return kExitConfig;
    if (!out_dir.empty()) write_diagnostic(out_dir, command, e);
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "geolab %s: %s\n", command.c_str(), e.what());
    return kExitRuntime;
  }
}
