#pragma once

// Solver pipelines and verification suites driven by an ExperimentConfig.
// Shared intermediate results (weak geodesic, refined run, fiber family)
// are computed once per Workspace.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geolab/config.hpp"
#include "geolab/verify.hpp"

namespace geolab {

class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const Background& background() const { return bg_; }
  const PeriodicField& endpoint_0() const { return phi0_; }
  const PeriodicField& endpoint_1() const { return phi1_; }

  // Lazily computed.
  const WeakGeodesic& weak();
  const WeakGeodesic& weak_refined();
  const FiberFamily& family();
  // Legendre oracle on n_time rows; nullopt when the oracle rejects the input.
  const std::optional<PathField>& oracle();

 private:
  ExperimentConfig cfg_;
  Background bg_;
  PeriodicField phi0_, phi1_;
  std::unique_ptr<WeakGeodesic> weak_, weak_refined_;
  std::unique_ptr<FiberFamily> family_;
  std::optional<std::optional<PathField>> oracle_;
};

enum class MabuchiVariant { exact, k, epsA };
enum class Suite { entropy, convexity, curvature, bounds, all };

MabuchiVariant parse_variant(std::string_view name);  // Error(config) on unknown names
Suite parse_suite(std::string_view name);
std::string_view to_string(MabuchiVariant v);
std::string_view to_string(Suite s);

// A check is either a real check (must pass) or a negative control (must fail).
struct SuiteEntry {
  PropertyResult result;
  bool control = false;
  bool ok() const { return control ? result.outcome == Outcome::failed : result.pass(); }
};

struct SuiteReport {
  std::vector<SuiteEntry> entries;
  bool checks_pass() const;     // every non-control entry passed
  bool controls_fail() const;   // every control entry failed
};

SuiteReport entropy_suite(Workspace& ws);
SuiteReport convexity_suite(Workspace& ws);
SuiteReport curvature_suite(Workspace& ws);
SuiteReport bounds_suite(Workspace& ws);
SuiteReport run_suite(Workspace& ws, Suite suite);

// The smooth non-geodesic path of the dd^c energy check.
PathField ddc_test_path(const PeriodicField& phi0, const PeriodicField& phi1, int n_time);

// Artifact writers. Each returns the JSON document written as the run index;
// files are written atomically under out_dir.
nlohmann::ordered_json run_geodesic(Workspace& ws, const std::filesystem::path& out_dir);
nlohmann::ordered_json run_fiberwise(Workspace& ws, const std::filesystem::path& out_dir);
nlohmann::ordered_json run_mabuchi(Workspace& ws, MabuchiVariant variant, const std::filesystem::path& out_dir);
// Writes verify_<suite>.json; the returned report decides the exit status.
SuiteReport run_verify(Workspace& ws, Suite suite, const std::filesystem::path& out_dir);
// geodesic + fiberwise + every Mabuchi variant + suite all.
SuiteReport run_study(Workspace& ws, const std::filesystem::path& out_dir);

nlohmann::ordered_json to_json(const SuiteReport& report, Suite suite);
nlohmann::ordered_json trace_meta(const FunctionalTrace& trace);
std::string trace_to_csv(const FunctionalTrace& trace);

// UTC ISO-8601; the only nondeterministic value in any report.
std::string timestamp_utc();

}  // namespace geolab
