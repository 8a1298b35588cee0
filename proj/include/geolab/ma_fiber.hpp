#pragma once

// Fiberwise Monge-Ampere equations. With n = 1 they are semilinear:
//   Yau:   w + D^2 u = target,  int u w dx = 0
//   Aubin: theta + beta + D^2 phi = eps^{-1} e^phi w
// The Aubin residual is evaluated in the eps-scaled form
//   eps (theta + beta) + eps D^2 phi - w e^phi.

#include <vector>

#include "geolab/model.hpp"
#include "geolab/newton.hpp"

namespace geolab {

struct FiberProblem {
  Background bg;
  PeriodicField beta;
  double epsilon;
  PeriodicField theta;  // density of the canonical-bundle form, -r
};

FiberProblem make_fiber_problem(const Background& bg, PeriodicField beta, double epsilon);
void validate(const FiberProblem& problem);

struct FiberSolution {
  PeriodicField phi;
  double residual_sup = 0.0;
  int newton_iters = 0;
  double min_metric_eigen = 0.0;  // min of theta + beta + D^2 phi
  std::vector<double> residual_history;
};

inline constexpr double kFiberTolerance = 1e-11;

FiberSolution solve_yau(const Background& bg, const PeriodicField& target);
FiberSolution solve_aubin_fiber(const FiberProblem& problem, double tolerance = kFiberTolerance);

// eps (theta + beta) + eps D^2 phi - w e^phi, nodewise.
PeriodicField aubin_residual(const FiberProblem& problem, const PeriodicField& phi);

struct FiberFamily {
  SpatialGrid grid{8};
  std::vector<double> epsilons;  // strictly decreasing
  std::vector<double> deltas;    // strictly decreasing
  std::vector<double> times;
  // solutions[e][d][t]
  std::vector<std::vector<std::vector<FiberSolution>>> solutions;
  // cauchy_increments[e][k] = sup_t |phi_{e,d_k} - phi_{e,d_{k+1}}|
  std::vector<std::vector<double>> cauchy_increments;
  std::vector<double> slack_constants;  // C per delta; beta carries C delta w
  std::vector<double> equicontinuity;   // L(eps)
  double equicontinuity_constant = 0.0; // max eps L(eps)

  // The delta -> 0 representative: the solution at the smallest delta.
  const PeriodicField& phi(std::size_t e, std::size_t t) const {
    return solutions[e].back()[t].phi;
  }
  std::size_t n_eps() const { return epsilons.size(); }
  std::size_t n_times() const { return times.size(); }
};

// For every (t, eps, delta): mollify the path fiberwise at delta, set
// beta = eps^{-1}(w + D^2 phi_delta + C delta w) with C the measured slack
// max(0, -min m[phi_delta]) / delta, theta = -r, and solve.
FiberFamily solve_family(const Background& bg, const PathField& path,
                         const std::vector<double>& epsilons, const std::vector<double>& deltas);

struct BoundStats {
  double sup_phi = 0.0;
  double neg_eps_inf_phi = 0.0;
  double max_eps_d2_phi = 0.0;
};

struct BoundReport {
  // stats[e][d], maximized over t and clamped below at 0
  std::vector<std::vector<BoundStats>> stats;
  BoundStats family_max;
  BoundStats first_half_max;
  BoundStats second_half_max;
  bool pass = false;
  double margin = 0.0;  // min over the three of 1.5 first - second
};

// Halves of the eps sweep: first = [0, ceil(n/2)), second = [floor(n/2), n);
// for odd n the middle element belongs to both.
BoundReport check_bounds(const FiberFamily& family);

struct ConvergenceReport {
  // errors[xi][t][e]
  std::vector<std::vector<std::vector<double>>> errors;
  std::vector<double> max_error;     // per eps, over (t, xi)
  std::vector<double> mass_error;    // per eps, xi = 1, over t
  bool pass = false;
  double margin = 0.0;
};

std::vector<PeriodicField> default_test_set(const SpatialGrid& grid);

// |int (e^phi w - (w + D^2 Phi_t)) xi dx| per (t, xi, eps).
ConvergenceReport density_convergence(const Background& bg, const FiberFamily& family,
                                      const PathField& path,
                                      const std::vector<PeriodicField>& test_set);

struct VanishingReport {
  std::vector<double> sup_eps_phi;  // per eps
  bool pass = false;
  double margin = 0.0;
};

VanishingReport eps_phi_vanishing(const FiberFamily& family);

// max over nodes p of phi(p) - log(eps (theta + beta)(p) / w(p)) at the argmax of phi;
// the max principle says it is <= 0.
double max_principle_excess(const FiberProblem& problem, const FiberSolution& solution);

// |phi(beta + eta b) - phi(beta)|_inf / eta with b = cos(2 pi x) + 1.
std::vector<double> stability_constants(const FiberProblem& problem, const std::vector<double>& etas);

// int_{u<v} (m[u] - m[v]) dx; the comparison principle says it is >= 0.
double comparison_principle_margin(const Background& bg, const PeriodicField& u, const PeriodicField& v);

}  // namespace geolab
