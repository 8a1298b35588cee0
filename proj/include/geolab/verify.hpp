#pragma once

// Quantified pass/fail checks of the structural properties. Every check
// returns a PropertyResult whose margin is the signed distance to its
// threshold: passed iff margin >= 0.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "geolab/functionals.hpp"
#include "geolab/geodesic.hpp"
#include "geolab/ma_fiber.hpp"

namespace geolab {

enum class Outcome { passed, failed, skipped };
std::string_view to_string(Outcome o);

struct PropertyResult {
  std::string name;
  Outcome outcome = Outcome::failed;
  double margin = 0.0;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  bool pass() const { return outcome == Outcome::passed; }
};

PropertyResult make_result(std::string name, double margin, nlohmann::ordered_json details = {});
PropertyResult skipped_result(std::string name, std::string reason);
nlohmann::ordered_json to_json(const PropertyResult& r);

// 0 <= f_i <= bound, int f_i dmu = 1 to 1e-10, same for f_limit.
struct DensitySequence {
  PeriodicField f_limit;
  std::vector<PeriodicField> members;
  double bound;
};

// Checks the invariants against bg; throws InvalidSequence.
void validate(const Background& bg, const DensitySequence& seq);

// f_i = f (1 + a sin(2 pi i x + phase)) / Z_i for i = 1..count, count <= N/4, |a| < 1.
DensitySequence oscillating_sequence(const Background& bg, const PeriodicField& f_limit,
                                     double amplitude, int count, double phase = 0.0);

// A random smooth positive density of unit mass and a random amplitude; deterministic in seed.
DensitySequence random_oscillating_sequence(const Background& bg, std::uint64_t seed, int count);

PropertyResult entropy_semicontinuity(const Background& bg, const DensitySequence& seq);
PropertyResult truncated_semicontinuity(const Background& bg, const DensitySequence& seq,
                                        const TruncationSpec& spec);
// delta(A) decreasing and the check passing for every A (default {2, 5, 10, 20}).
PropertyResult truncated_semicontinuity_sweep(const Background& bg, const DensitySequence& seq,
                                              const PeriodicField& chi,
                                              const std::vector<double>& levels = {2, 5, 10, 20});

// Mixed determinant of (Hess L - diag(r, 0), reduced Hessian of the path)
// with L = log((1/k) sum_{j<k} e^{phi_{eps_j}}), plus the exact discrete
// log-sum-exp convexity along lattice lines.
PropertyResult convexity_inequality_k(const Background& bg, const PathField& path,
                                      const FiberFamily& family, int k);

struct CurvatureFields {
  std::vector<double> q_ineq;    // Hess(log m)(v, v), v = (-a, 1)
  std::vector<double> rhs;       // eps D^2(w / m) / m
  std::vector<double> grad_a_sq; // (D^1 a)^2
  int n_points = 0;
  int rows = 0;                  // interior rows 1..n_time-1
};

CurvatureFields curvature_fields(const Background& bg, const EpsGeodesic& eg);

// sup |Q - rhs - kappa (D^1 a)^2|
double curvature_identity_residual(const CurvatureFields& f, double kappa);

struct CurvatureOptions {
  double kappa = 1.0;
  std::vector<double> kappa_candidates = {0.25, 0.5, 1.0, 2.0, 4.0};
  int levels = 3;  // eg and its 2x and 4x coarsenings
};

// (A) Q - rhs >= -1e-6 scale nodewise; (B) identity residual ratios in [3, 5]
// across the coarsening levels; fails when the grids are too small to coarsen.
// Throws NotASolution unless eg.residual_sup <= 1e-10.
PropertyResult eps_curvature_identity(const Background& bg, const EpsGeodesic& eg,
                                      const CurvatureOptions& options = {});

// c = Phi_ss - Phi_xs^2 / m against eps w / m, and det(H - c e_ss) = 0, both to 1e-9.
PropertyResult eps_geodesic_residual_c(const Background& bg, const EpsGeodesic& eg);

// Minimal C >= 0 making M - eps C t (1 - t) discretely convex (tolerance 1e-8 scale
// plus the round-off level of the second differences).
double almost_convexity_constant(const FunctionalTrace& trace, double epsilon);

// traces ordered by decreasing eps, each with meta "epsilon".
PropertyResult mabuchi_eps_A_almost_convex(const std::vector<FunctionalTrace>& traces, double C_A_bound);

struct ContinuityOptions {
  std::vector<int> k_list = {1, 2, 4};
  double convexity_tol = 1e-3;
  double k_convexity_tol = 1e-6;
  double gap_abs_tol = 5e-3;
};

// path: weak geodesic; refined: same endpoints with 2x n_time (may be null to skip
// the refinement-decrease part); family aligned with path.
PropertyResult mabuchi_convexity_and_continuity(const Background& bg, const PathField& path,
                                                const PathField* refined, const FiberFamily& family,
                                                const ContinuityOptions& options = {});

// Omega-subharmonicity of max(u, v): hypotheses w + D^2 v >= -tol everywhere and
// w + D^2 u >= -tol on {u > v - 1}; conclusion
// sum max(u, v) D^2 xi h + int w xi >= -tol int xi for the bump family xi.
PropertyResult max_subharmonic_lemma(const Background& bg, const PeriodicField& u,
                                     const PeriodicField& v, double tol = 1e-9,
                                     bool check_hypotheses = true);

std::vector<PeriodicField> bump_test_family(const SpatialGrid& grid);

}  // namespace geolab
