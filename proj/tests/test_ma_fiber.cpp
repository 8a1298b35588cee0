#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/geodesic.hpp"
#include "geolab/ma_fiber.hpp"
#include "support.hpp"

using namespace geolab;
using namespace geolab::test;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::precondition;
}

PeriodicField exp_of(const PeriodicField& u) { return map(u, [](double v) { return std::exp(v); }); }

// Oracle geodesic between 0 and the canonical endpoint, shared by the family tests.
struct CosFamily {
  SpatialGrid g{128};
  Background bg = flat_background(g);
  PathField path = legendre_oracle(bg, zero(g), canonical(g), 16);
  FiberFamily fam = solve_family(bg, path, {0.1, 0.05, 0.025}, {0.05, 0.025});
};

const CosFamily& cos_family() {
  static const CosFamily f;
  return f;
}

}  // namespace

TEST_SUITE("ma_fiber") {

TEST_CASE("Yau: target w gives zero") {
  SpatialGrid g(64);
  Background bg = make_background(cos_field(g, 0.002, 2));
  FiberSolution s = solve_yau(bg, bg.w());
  CHECK(s.phi.sup_norm() <= 1e-12);
  CHECK(s.residual_sup <= 1e-11);
}

TEST_CASE("Yau: inverts the stencil symbol") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  PeriodicField target = PeriodicField::constant(g, 1.0) + cos_field(g, 0.3);
  FiberSolution s = solve_yau(bg, target);
  const double sigma = central2_symbol(1, g.spacing());
  CHECK(sup_distance(s.phi, cos_field(g, 0.3 / sigma)) <= 1e-12);
  CHECK(std::abs(integrate(s.phi * bg.w())) <= 1e-14);
  CHECK(s.residual_sup <= 1e-11);
}

TEST_CASE("Yau: incompatible mass") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  CHECK(code_of([&] { solve_yau(bg, 2.0 * bg.w()); }) == ErrorCode::incompatible_mass);
}

TEST_CASE("Aubin: exact constant solution") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  for (double eps : {0.5, 1e-2, 1e-4}) {
    FiberSolution s = solve_aubin_fiber(make_fiber_problem(bg, (1.0 / eps) * bg.w(), eps));
    CHECK(s.phi.sup_norm() <= 1e-12);
    CHECK(s.min_metric_eigen > 0.0);
  }
}

TEST_CASE("Aubin: degenerate data is rejected") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  CHECK(code_of([&] { solve_aubin_fiber(make_fiber_problem(bg, zero(g), 0.1)); }) == ErrorCode::precondition);
  CHECK(code_of([&] { solve_aubin_fiber(make_fiber_problem(bg, bg.w(), 0.0)); }) == ErrorCode::precondition);
  CHECK(code_of([&] { solve_aubin_fiber(make_fiber_problem(bg, cos_field(g, 1.0), 0.1)); }) ==
        ErrorCode::precondition);
}

TEST_CASE("Aubin: max principle, mass identity and monotone Newton") {
  SpatialGrid g(128);
  Background bg = make_background(cos_field(g, 0.003));
  PeriodicField slice = cos_field(g, kCanonicalAmplitude) + sin_field(g, 0.001, 3);
  REQUIRE(is_admissible(bg, slice));
  for (double eps : {0.1, 1e-2, 1e-3}) {
    CAPTURE(eps);
    FiberProblem p = make_fiber_problem(bg, (1.0 / eps) * metric_density(bg, slice), eps);
    FiberSolution s = solve_aubin_fiber(p);
    CHECK(s.residual_sup <= kFiberTolerance);
    CHECK(aubin_residual(p, s.phi).sup_norm() <= kFiberTolerance);

    const PeriodicField src = p.theta + p.beta;
    const PeriodicField bound = map(src, [eps](double v) { return std::log(eps * v); }) -
                                map(bg.w(), [](double v) { return std::log(v); });
    CHECK(s.phi.max() <= bound.max() + 1e-9);
    CHECK(s.phi.min() >= bound.min() - 1e-9);
    CHECK(max_principle_excess(p, s) <= 1e-8);
    // Same statement at the argmin.
    const auto lo = std::min_element(s.phi.values().begin(), s.phi.values().end()) - s.phi.values().begin();
    CHECK(s.phi[int(lo)] >= bound[int(lo)] - 1e-8);

    CHECK(std::abs(integrate(exp_of(s.phi) * bg.w()) - eps * integrate(src)) <= 1e-10);
    for (std::size_t k = 1; k < s.residual_history.size(); ++k)
      CHECK(s.residual_history[k] < s.residual_history[k - 1]);
  }
}

TEST_CASE("Aubin: stability constant is bounded") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  const double eps = 0.05;
  FiberProblem p = make_fiber_problem(bg, (1.0 / eps) * metric_density(bg, canonical(g)), eps);
  auto K = stability_constants(p, {1e-2, 1e-3, 1e-4});
  REQUIRE(K.size() == 3);
  for (double k : K) {
    CHECK(std::isfinite(k));
    CHECK(k > 0.0);
  }
  CHECK(*std::max_element(K.begin(), K.end()) <= 1.5 * *std::min_element(K.begin(), K.end()));
}

TEST_CASE("comparison principle on random pairs") {
  SpatialGrid g(128);
  Background bg = flat_background(g);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FourierTerm> tu, tv;
    for (int k = 1; k <= 3; ++k) {
      const double s = 0.8 / (3.0 * kTwoPi * kTwoPi * k * k);
      tu.push_back({k, s * amp(rng), s * amp(rng)});
      tv.push_back({k, s * amp(rng), s * amp(rng)});
    }
    PeriodicField u = fourier_field(g, tu), v = fourier_field(g, tv);
    REQUIRE(is_admissible(bg, u));
    REQUIRE(is_admissible(bg, v));
    CHECK(comparison_principle_margin(bg, u, v) >= -g.spacing());
  }
}

TEST_CASE("family on a constant path is zero") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  PathField path = PathField::linear(zero(g), zero(g), 8);
  FiberFamily fam = solve_family(bg, path, {0.1, 0.05, 0.025}, {0.05, 0.025});
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t t = 0; t < fam.n_times(); ++t) CHECK(fam.phi(e, t).sup_norm() <= 1e-12);
  BoundReport b = check_bounds(fam);
  CHECK(b.pass);
  CHECK(b.family_max.sup_phi <= 1e-12);
  CHECK(b.family_max.neg_eps_inf_phi <= 1e-12);
  CHECK(b.family_max.max_eps_d2_phi <= 1e-9);

  ConvergenceReport c = density_convergence(bg, fam, path, default_test_set(g));
  CHECK(sup_abs(c.max_error) <= 1e-12);
  CHECK(c.pass);
  VanishingReport v = eps_phi_vanishing(fam);
  CHECK(v.pass);
  CHECK(sup_abs(v.sup_eps_phi) <= 1e-12);
}

TEST_CASE("family preconditions") {
  SpatialGrid g(64);
  Background bg = flat_background(g);
  PathField path = PathField::linear(zero(g), zero(g), 8);
  CHECK_THROWS_AS(solve_family(bg, path, {0.1, 0.05}, {0.025, 0.05}), Error);
  CHECK_THROWS_AS(solve_family(bg, path, {0.05, 0.1}, {0.05}), Error);
  FiberFamily single = solve_family(bg, path, {0.1}, {0.05});
  CHECK_THROWS_AS(eps_phi_vanishing(single), Error);
  CHECK_THROWS_AS(density_convergence(bg, single, path, {}), Error);
}

TEST_CASE("family on the cos geodesic: uniform bounds") {
  const auto& f = cos_family();
  BoundReport b = check_bounds(f.fam);
  CHECK(b.pass);
  CHECK(b.margin >= 0.0);
  // Every solve converged, the delta-limit increments shrink, eps L(eps) stays bounded.
  for (const auto& per_eps : f.fam.solutions)
    for (const auto& per_delta : per_eps)
      for (const auto& s : per_delta) CHECK(s.residual_sup <= kFiberTolerance);
  for (const auto& inc : f.fam.cauchy_increments)
    for (std::size_t k = 1; k < inc.size(); ++k) CHECK(inc[k] < inc[k - 1]);
  for (std::size_t e = 0; e < f.fam.n_eps(); ++e)
    CHECK(f.fam.epsilons[e] * f.fam.equicontinuity[e] <= f.fam.equicontinuity_constant);
  CHECK(std::isfinite(f.fam.equicontinuity_constant));
}

TEST_CASE("scaled family fails the uniformity check") {
  FiberFamily fam = cos_family().fam;
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (auto& per_delta : fam.solutions[e])
      for (auto& s : per_delta) s.phi = (1.0 / (fam.epsilons[e] * fam.epsilons[e])) * s.phi;
  CHECK_FALSE(check_bounds(fam).pass);
}

TEST_CASE("density convergence on the cos geodesic") {
  const auto& f = cos_family();
  ConvergenceReport c = density_convergence(f.bg, f.fam, f.path, default_test_set(f.g));
  for (double m : c.mass_error) CHECK(m <= 1e-10);
  for (std::size_t e = 1; e < c.max_error.size(); ++e) CHECK(c.max_error[e] < c.max_error[e - 1]);
  // xi = 1 pairing is the mass identity: e^phi w integrates to int (w + D^2 Phi) + C delta.
  for (std::size_t t = 0; t < f.fam.n_times(); ++t)
    for (std::size_t e = 0; e < f.fam.n_eps(); ++e)
      CHECK(c.errors[0][t][e] <= f.fam.slack_constants.back() * f.fam.deltas.back() + 1e-10);
}

TEST_CASE("eps phi vanishes on the cos geodesic") {
  VanishingReport v = eps_phi_vanishing(cos_family().fam);
  for (std::size_t e = 1; e < v.sup_eps_phi.size(); ++e) CHECK(v.sup_eps_phi[e] < v.sup_eps_phi[e - 1]);
  // Halving needs a longer sweep.
  const auto& f = cos_family();
  FiberFamily longer = solve_family(f.bg, f.path, {0.1, 0.05, 0.025, 0.0125, 0.00625}, {0.05, 0.025});
  VanishingReport w = eps_phi_vanishing(longer);
  CHECK(w.pass);
  CHECK(w.sup_eps_phi.back() <= w.sup_eps_phi.front() / 2.0);
}

}
