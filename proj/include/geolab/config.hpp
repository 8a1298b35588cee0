#pragma once

// Experiment configuration: one JSON document. Potentials are Fourier
// coefficient lists [[k, a_k, b_k], ...].

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "geolab/model.hpp"

namespace geolab {

struct Tolerances {
  double convexity = 1e-3;     // Mabuchi second differences, relative
  double k_convexity = 1e-6;   // M_k second differences, relative
  double gap_abs = 5e-3;       // boundary gaps
  double C_A_bound = 100.0;    // cap on the almost-convexity constant
};

struct ExperimentConfig {
  int n_points = 256;
  Scheme scheme = Scheme::central2;
  int n_time = 64;
  int n_time_refined = 128;
  std::vector<FourierTerm> psi;
  std::vector<FourierTerm> phi0;
  std::vector<FourierTerm> phi1;
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<double> A_list;
  std::vector<FourierTerm> chi;
  std::vector<int> k_list;
  std::vector<double> curvature_epsilons = {1e-2};
  double kappa = 1.0;
  Tolerances tolerances;
  std::uint64_t seed = 1;
  int n_seeds = 20;
  std::string out_dir = "out";

  SpatialGrid grid() const { return SpatialGrid(n_points); }
  Background background() const;
  PeriodicField endpoint_0() const;
  PeriodicField endpoint_1() const;
  PeriodicField chi_field() const;
};

// Throws Error(config) with the offending key in the message.
ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

// Error(config) naming the list when it is empty.
void require_list(const ExperimentConfig& cfg, std::string_view list);

}  // namespace geolab
