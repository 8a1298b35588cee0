#pragma once

// eps-geodesics on the strip X x [0, 1]:
//   (w + Phi_xx) Phi_ss - Phi_xs^2 = eps w  on interior rows,
// with Dirichlet rows at s = 0 and s = 1.

#include <vector>

#include "geolab/model.hpp"
#include "geolab/newton.hpp"

namespace geolab {

struct EpsGeodesicProblem {
  Background bg;
  PeriodicField endpoint_0;
  PeriodicField endpoint_1;
  double epsilon;
  int n_time;
};

void validate(const EpsGeodesicProblem& problem);

struct EpsGeodesic {
  PathField path;
  double epsilon = 0.0;
  double residual_sup = 0.0;
  double certificate_residual = 0.0;  // re-evaluated from the reduced Hessian
  double positivity_margin = 0.0;     // min over interior nodes of det, m_xx, m_ss
  int newton_iters = 0;
  std::vector<double> residual_history;
};

inline constexpr double kGeodesicTolerance = 1e-10;

// (1 - s) phi0 + s phi1 + (eps / 2)(s^2 - s).
PathField eps_geodesic_initial_guess(const EpsGeodesicProblem& problem);

// Throws UnsupportedScheme unless bg uses central2.
EpsGeodesic solve_eps_geodesic(const EpsGeodesicProblem& problem,
                               const PathField* warm_start = nullptr,
                               const NewtonOptions& options = {});

// (w + Phi_xx) Phi_ss - Phi_xs^2 - eps w on interior rows, (n_time - 1) * n_points entries.
std::vector<double> eps_geodesic_residual(const Background& bg, const PathField& path, double epsilon);

// Same quantity assembled from reduced_hessian; sup norm.
double certificate_residual(const Background& bg, const PathField& path, double epsilon);

struct WeakGeodesic {
  std::vector<EpsGeodesic> solves;  // one per eps, in sweep order
  std::vector<double> increments;   // sup |Phi_{eps_k} - Phi_{eps_{k+1}}|
  const PathField& path() const { return solves.back().path; }
  double epsilon_min() const { return solves.back().epsilon; }
};

// Continuation over a strictly decreasing eps sequence of length >= 3,
// each solve warm-started from the previous one.
WeakGeodesic weak_geodesic(const Background& bg, const PeriodicField& endpoint_0,
                           const PeriodicField& endpoint_1, const std::vector<double>& eps_sequence,
                           int n_time);

// Legendre-dual interpolation: conjugate P_i = x^2/2 + psi + phi_i on three
// unrolled periods at 4x resolution, interpolate the conjugates linearly in s,
// conjugate back at the grid nodes and subtract x^2/2 + psi.
// Throws NonConvexInput when a sample lies above its hull by more than 1e-8.
PathField legendre_oracle(const Background& bg, const PeriodicField& endpoint_0,
                          const PeriodicField& endpoint_1, int n_time);

}  // namespace geolab
