#pragma once

// Energy, entropy and Mabuchi-type functionals for n = 1, evaluated slice by
// slice along paths.

#include <string>
#include <vector>

#include <json.hpp>

#include "geolab/geodesic.hpp"
#include "geolab/ma_fiber.hpp"
#include "geolab/model.hpp"

namespace geolab {

struct TruncationSpec {
  double A;
  PeriodicField chi;
};

TruncationSpec make_truncation(const SpatialGrid& grid, double A);  // chi = 0
void validate(const TruncationSpec& spec);

struct FunctionalTrace {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
  // (F_{i-1} - 2 F_i + F_{i+1}) / ds^2 at interior indices; NaN at both ends.
  std::vector<double> second_differences;
  std::vector<double> energy_part;   // empty when not applicable
  std::vector<double> entropy_part;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  double scale() const;              // max |value|
  double min_second_difference() const;
};

FunctionalTrace make_trace(std::string name, std::vector<double> times, std::vector<double> values);

// E(u) = int u (m[u] + w) dx
double energy(const Background& bg, const PeriodicField& u);
// E^alpha(u) = int u alpha dx
double energy_alpha(const PeriodicField& u, const PeriodicField& alpha);

// int f log f dmu with f = m[u] / w and 0 log 0 = 0. NegativeDensity below -1e-10.
double entropy(const Background& bg, const PeriodicField& u);
// Same, from a density ratio f against dmu = w dx.
double entropy_of_ratio(const Background& bg, const PeriodicField& f);

// int f log max(f, e^{chi - A}) dmu
double truncated_entropy(const Background& bg, const PeriodicField& u, const TruncationSpec& spec);
double truncated_entropy_of_ratio(const Background& bg, const PeriodicField& f, const TruncationSpec& spec);

struct DeltaA {
  double C1;
  double C2;
  double delta;
};

// C1 = -int (chi - A) e^{chi - A} dmu, C2 = 2 int e^{chi - A} dmu, delta = C1 + C2.
DeltaA delta_A(const Background& bg, const TruncationSpec& spec);

// (S/2) E - E^r + int log(m/w) m dx on every slice.
FunctionalTrace mabuchi(const Background& bg, const PathField& path);

// Entropy term replaced by int log((1/k) sum_{j<k} e^{phi_{eps_j}}) m dx.
FunctionalTrace mabuchi_k(const Background& bg, const PathField& path, const FiberFamily& family, int k);

// Both energy terms and the truncated entropy evaluated on Phi_eps.
FunctionalTrace mabuchi_eps_A(const Background& bg, const EpsGeodesic& eg, const TruncationSpec& spec);

struct DdcEnergyReport {
  double lhs = 0.0;  // sum_j E_j D^2 tau_j ds
  double rhs = 0.0;  // sum_j 2 int det_j dx tau_j ds
  double relative_discrepancy = 0.0;
};

// tau has n_time + 1 samples and must vanish on rows 0, 1, n_time - 1, n_time.
DdcEnergyReport ddc_energy_check(const Background& bg, const PathField& path, const std::vector<double>& tau);

// sin^4 bump vanishing outside (s_1, s_{n_time-1}).
std::vector<double> default_time_bump(int n_time);

}  // namespace geolab
